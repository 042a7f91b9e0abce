"""Terms of the contour identity for alpha = Theta(sigma) sigma e^{-sigma}.

Prints A_Sigma(0), c(0), the three contour integrals and the residual of
A_Sigma(0) - B_Sigma(0) - c(0) - (I1 + I2 + I3) for a few (Sigma, T, M).
"""
from tauberweyl import CausalFunction, ContourParams, verify_identity


def main():
    alpha = CausalFunction.exp_poly([0.0, 1.0], rate=1.0)
    zero = CausalFunction.zero()
    print(f"{'Sigma':>6} {'T':>4} {'M':>2} {'A_Sigma(0)':>12} {'|I1|':>10} {'|I2|':>10} "
          f"{'|I3|':>10} {'residual':>10}")
    for Sigma in (1.0, 5.0, 10.0, 20.0):
        for T, M in ((2.0, 1), (3.0, 3)):
            d = verify_identity(alpha, zero, alpha, ContourParams(T, Sigma, M))
            print(f"{Sigma:6.1f} {T:4.1f} {M:2d} {d.A_Sigma0.real:12.8f} {abs(d.I1):10.3e} "
                  f"{abs(d.I2):10.3e} {abs(d.I3):10.3e} {d.residual:10.2e}")


if __name__ == "__main__":
    main()
