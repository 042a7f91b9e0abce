import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate

from tauberweyl.errors import DomainError, PreconditionError
from tauberweyl.fourier_laplace import CausalFunction
from tauberweyl.newman_contour import (
    ContourParams,
    compute_I1,
    compute_I2,
    compute_I3_direct,
    compute_I3_ibp,
    sigma_threshold,
    singular_term,
    smoothing_weight_derivative,
    sobolev_l1_norm,
    verify_identity,
)
from tauberweyl.pole_calculus import PolynomialAnsatz
from tauberweyl.spectral_models import Lattice, enumerate_torus_spectrum
from tauberweyl.suites import bound_qs, square_torus_i3

EXP = CausalFunction.exp_poly([1.0], rate=1.0)
SEXP = CausalFunction.exp_poly([0.0, 1.0], rate=1.0)
THETA = CausalFunction.exp_poly([1.0])
ZERO = CausalFunction.zero()


def arc_reference(F, T, M, lo, hi):
    """(1 / 2 pi) int_lo^hi F(T e^{i theta}) (1 + e^{2 i theta})^M d theta with scipy."""
    g = lambda th: F(T * np.exp(1j * th)) * (1 + np.exp(2j * th)) ** M
    re = integrate.quad(lambda th: g(th).real, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=500)[0]
    im = integrate.quad(lambda th: g(th).imag, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=500)[0]
    return (re + 1j * im) / (2 * np.pi)


def test_I1_vanishes_when_partial_equals_full():
    assert compute_I1(ZERO, ContourParams(2.0, 5.0, 2)) == 0


def test_I1_exponential_against_reference():
    T, S, M = 2.0, 5.0, 2
    p = ContourParams(T, S, M)
    # e^{t Sigma} (C_Sigma - C)(t) = -e^{-Sigma} / (1 + t)
    ref = arc_reference(lambda t: -np.exp(-S) / (1 + t), T, M, -np.pi / 2, np.pi / 2)
    assert_allclose(compute_I1(EXP, p), ref, rtol=1e-9)
    # the callable path with the unshifted difference agrees as well
    unshifted = lambda t: -np.exp(-S * (1 + t)) / (1 + t)
    assert_allclose(compute_I1(unshifted, p, shifted=False), ref, rtol=1e-9)


def test_I1_envelope_in_T():
    scaled = [abs(compute_I1(EXP, ContourParams(T, 5.0, 2))) * T for T in (2, 4, 8, 16)]
    assert max(scaled) / min(scaled) < 2.0


def test_I2_vanishes_for_zero():
    assert compute_I2(ZERO, ContourParams(2.0, 5.0, 2)) == 0


def test_I2_heaviside_against_reference():
    T, S, M = 2.0, 5.0, 2
    ref = arc_reference(lambda t: (np.exp(S * t) - 1) / t, T, M, np.pi / 2, 3 * np.pi / 2)
    assert_allclose(compute_I2(THETA, ContourParams(T, S, M)), ref, rtol=1e-9)


def test_I2_bound_sweep_heaviside():
    # K = 0 and budget 1: |I2| T stays below one constant, stable under enlarging the sweep
    base = max(abs(compute_I2(THETA, ContourParams(T, S, 1))) * T
               for T in (2, 4, 8) for S in (10, 20, 40))
    big = max(abs(compute_I2(THETA, ContourParams(T, S, 1))) * T
              for T in (2, 4, 8, 16) for S in (10, 20, 40, 80))
    assert math.isfinite(big)
    assert big / base < 2.0


def test_I3_zero():
    assert compute_I3_direct(lambda tau: np.zeros_like(tau), ContourParams(2.0, 5.0, 2)) == 0


def test_I3_polynomial_closed_form():
    T, S, M = 2.0, 7.0, 2
    p = ContourParams(T, S, M)
    Q = lambda tau: tau / (1 - tau ** 2 / T ** 2) ** M
    expected = 2j * (math.sin(T * S) / S ** 2 - T * math.cos(T * S) / S) / (2j * np.pi)
    assert_allclose(compute_I3_direct(Q, p), expected, rtol=1e-9)


def test_I3_non_integrable_rejected():
    with pytest.raises(DomainError):
        compute_I3_direct(lambda tau: 1.0 / tau, ContourParams(2.0, 5.0, 2))


def test_ibp_order_zero_is_direct():
    q = bound_qs()[0][1]
    p = ContourParams(2.0, 10.0, 1)
    assert compute_I3_ibp(q.derivatives(0), p, 0) == compute_I3_direct(q.derivative(0), p)


def test_ibp_polynomial_example():
    T = 2.0
    p = ContourParams(T, 10.0, 2)
    Q = [lambda tau: 1 - tau ** 2 / T ** 2, lambda tau: -2 * tau / T ** 2]
    assert_allclose(compute_I3_ibp(Q, p, 1), compute_I3_direct(Q[0], p), rtol=1e-10)


def test_ibp_precondition():
    q = bound_qs()[0][1]
    with pytest.raises(PreconditionError):
        compute_I3_ibp(q.derivatives(2), ContourParams(2.0, 10.0, 1), 2)


@pytest.mark.parametrize("N", [1, 2])
def test_I3_decay_slope(N):
    for _, q in bound_qs():
        sig = np.array([10.0, 20.0, 40.0, 80.0])
        vals = [abs(compute_I3_direct(q.derivative(0), ContourParams(2.0, S, N + 1))) for S in sig]
        slope = np.polyfit(np.log(sig), np.log(vals), 1)[0]
        assert slope <= -N + 0.15


def test_weight_derivative_is_exact():
    T, M = 1.7, 3
    x = np.linspace(-T, T, 7)
    base = (1 - x ** 2 / T ** 2) ** M
    d1 = -2 * M * x / T ** 2 * (1 - x ** 2 / T ** 2) ** (M - 1)
    assert_allclose(smoothing_weight_derivative(T, M, 0)(x), base, atol=1e-14)
    assert_allclose(smoothing_weight_derivative(T, M, 1)(x), d1, atol=1e-14)


@pytest.mark.parametrize("Sigma", [1.0, 5.0, 10.0])
def test_identity_exponential(Sigma):
    d = verify_identity(EXP, ZERO, EXP, ContourParams(2.0, Sigma, 2))
    assert d.residual < 1e-7
    assert_allclose(d.A_Sigma0, 1 - math.exp(-Sigma), rtol=1e-14)
    assert_allclose(d.c0, 1.0, rtol=1e-14)


def test_identity_trivial_split():
    d = verify_identity(EXP, EXP, ZERO, ContourParams(2.0, 5.0, 2))
    assert d.residual < 1e-15
    assert d.I1 == 0 and d.I2 == 0


def test_identity_sigma_exp():
    d = verify_identity(SEXP, ZERO, SEXP, ContourParams(3.0, 8.0, 3))
    assert d.residual < 1e-7


@pytest.mark.parametrize("M", [1, 2, 3, 4])
def test_identity_M_independent(M):
    jumps = CausalFunction.step([1.0, 2.0], [1.0, -1.0])
    for g in (EXP, SEXP, jumps):
        assert verify_identity(g, ZERO, g, ContourParams(2.5, 6.0, M)).residual < 1e-6


def test_identity_with_nonzero_beta():
    beta = CausalFunction.step([0.5], [2.0])
    alpha = beta + EXP
    d = verify_identity(alpha, beta, EXP, ContourParams(2.0, 5.0, 2))
    assert d.residual < 1e-12


def test_coarse_quadrature_residual_larger():
    coarse = verify_identity(SEXP, ZERO, SEXP, ContourParams(2.0, 5.0, 2, n_nodes=8, rtol=1e-4))
    fine = verify_identity(SEXP, ZERO, SEXP, ContourParams(2.0, 5.0, 2))
    assert fine.residual <= coarse.residual + 1e-15
    assert coarse.residual < 1e-3


def test_singular_term_large_sigma():
    # (1/pi) int_0^T sin(tau Sigma)/tau w d tau -> 1/2, so the term tends to 0
    vals = [abs(singular_term(ContourParams(2.0, S, 2))) for S in (50.0, 100.0, 200.0)]
    assert vals[-1] < 0.01
    assert vals[0] > vals[-1]


def test_identity_requires_convergent_gamma():
    with pytest.raises(DomainError):
        verify_identity(THETA, ZERO, THETA, ContourParams(2.0, 5.0, 2))


def test_params_validation():
    with pytest.raises(DomainError):
        ContourParams(0.0, 1.0, 1)
    with pytest.raises(DomainError):
        ContourParams(1.0, 1.0, 0)
    p = ContourParams(1.0, 5.0, 1)
    with pytest.raises(PreconditionError):
        p.check_singular_support([0.5, 1.0 + 1e-8])
    p.check_singular_support([0.5, 1.5])
    with pytest.raises(PreconditionError):
        p.check_bound_hypotheses(K=1.0)
    ContourParams(1.0, 5.0, 2).check_bound_hypotheses(K=1.0, N=2)
    assert sigma_threshold(0) == 0.0 and sigma_threshold(1.5) == 1.0


def test_sobolev_l1_norm_polynomial():
    Q = [lambda x: x, lambda x: np.ones_like(x)]
    # int_{-1}^{1} |x| + int_{-1}^{1} 1 = 1 + 2
    assert_allclose(sobolev_l1_norm(Q, -1.0, 1.0, 1), 3.0, rtol=1e-9)


def test_square_torus_quotient_direct_matches_ibp():
    spectrum = enumerate_torus_spectrum(Lattice(np.eye(2)), 2 * np.pi * 60)
    z = PolynomialAnsatz((0.0, 0.0, 1 / (4 * np.pi)))
    direct, ibp = square_torus_i3(spectrum, z, 10201, T=0.9, Sigma=50.0, M=3, N=2)
    assert abs(direct - ibp) <= 1e-8 * abs(direct)
