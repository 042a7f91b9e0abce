"""Closed-form verification suites for the contour identity and its bounds.

These are shared by the ``verify`` subcommand and the acceptance tests.
"""
from __future__ import annotations

import math

import numpy as np

from .fourier_laplace import CausalFunction, QuotientDerivatives
from .newman_contour import (
    ContourParams,
    arc_bound_constants,
    compute_I3_direct,
    compute_I3_ibp,
    oscillatory_bound_constants,
    run_grid,
    verify_identity,
)

IDENTITY_SIGMAS = (1.0, 5.0, 10.0)
IDENTITY_TS = (2.0, 3.0)
IDENTITY_MS = (1, 2, 3)


def closed_form_triples():
    """(name, alpha, beta, gamma) with alpha = beta + gamma and beta = 0."""
    zero = CausalFunction.zero()
    exp1 = CausalFunction.exp_poly([1.0], rate=1.0, label="Theta e^-sigma")
    sexp = CausalFunction.exp_poly([0.0, 1.0], rate=1.0, label="Theta sigma e^-sigma")
    jumps = CausalFunction.step([1.0, 2.0], [1.0, -1.0], label="1_[1,2)")
    return [("exp", exp1, zero, exp1), ("sigma_exp", sexp, zero, sexp), ("two_jumps", jumps, zero, jumps)]


def identity_suite(sigmas=IDENTITY_SIGMAS, Ts=IDENTITY_TS, Ms=IDENTITY_MS, threads=1):
    """Residual rows of the contour identity for every closed-form triple."""
    grid = [(name, a, b, g, S, T, M) for name, a, b, g in closed_form_triples()
            for S in sigmas for T in Ts for M in Ms]

    def one(item):
        name, a, b, g, S, T, M = item
        d = verify_identity(a, b, g, ContourParams(T, S, M))
        row = d.as_row()
        row["case"] = name
        return row

    return run_grid(one, grid, threads)


class ExpSum:
    """Q(tau) = sum_k c_k exp(lambda_k tau) with exact derivatives."""

    def __init__(self, c, lam):
        self.c = np.asarray(c, dtype=complex)
        self.lam = np.asarray(lam, dtype=complex)

    def derivative(self, k):
        c, lam = self.c, self.lam

        def f(tau):
            tau = np.asarray(tau, dtype=float)
            return np.sum(c[:, None] * lam[:, None] ** k * np.exp(np.outer(lam, tau.ravel())),
                          axis=0).reshape(tau.shape)

        return f

    def derivatives(self, N):
        return [self.derivative(k) for k in range(N + 1)]


def random_smooth_q(rng, terms=3):
    c = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    lam = rng.uniform(-0.5, 0.5, terms) + 1j * rng.uniform(-5, 5, terms)
    return ExpSum(c, lam)


def ibp_suite(seed=0, count=20, Ns=(1, 2), T=2.0, Sigma=10.0):
    """Relative difference between direct and integrated-by-parts I3 on random smooth Q."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(count):
        q = random_smooth_q(rng)
        for N in Ns:
            p = ContourParams(T, Sigma, N + 1)
            direct = compute_I3_direct(q.derivative(0), p)
            ibp = compute_I3_ibp(q.derivatives(N), p, N)
            rel = abs(direct - ibp) / max(abs(direct), 1e-300)
            rows.append({"case": f"q{i}", "N": N, "M": N + 1, "direct_re": direct.real,
                         "direct_im": direct.imag, "ibp_re": ibp.real, "ibp_im": ibp.imag,
                         "relative_difference": rel})
    return rows


def bound_gammas():
    """(name, gamma, K, budget) test functions for the arc bounds."""
    theta = CausalFunction.exp_poly([1.0], label="Theta")
    cos = (CausalFunction.exp_poly([0.5], rate=1j) + CausalFunction.exp_poly([0.5], rate=-1j))
    lin = CausalFunction.exp_poly([0.0, 1.0], label="Theta sigma")
    return [("theta", theta, 0.0, 1.0), ("theta_cos", cos, 0.0, 1.0), ("theta_sigma", lin, 1.0, 1.0)]


def bound_qs():
    """Fixed smooth Q with exact derivatives for the oscillatory bound."""
    return [("gauss_mod", ExpSum([1.0, 0.5j], [0.3 + 1j, -0.2 - 2j])),
            ("decaying", ExpSum([1.0 + 1j], [-0.7 + 0.5j]))]


def dyadic(start, count):
    return tuple(float(start * 2 ** k) for k in range(count))


def sweep_grids(scale=1):
    """Base sweep T in {2,4,8}, Sigma in {10,20,40}; ``scale`` extends each dyadically."""
    extra = int(round(math.log2(scale))) if scale > 1 else 0
    return dyadic(2.0, 3 + extra), dyadic(10.0, 3 + extra)


def bound_suite(sweep_scale=2, threads=1):
    """Sup constants on the base grid and on the grid enlarged by ``sweep_scale``.

    Returns rows ``{quantity, case, base, enlarged, ratio}``.
    """
    rows = []
    base_T, base_S = sweep_grids(1)
    big_T, big_S = sweep_grids(sweep_scale)
    for name, gamma, K, budget in bound_gammas():
        M = math.ceil(K) + 1
        sups = []
        for Ts, Ss in ((base_T, base_S), (big_T, big_S)):
            table = arc_bound_constants(gamma, K, budget, Ts, Ss, M, threads)
            sups.append((max(r["I1"] for r in table), max(r["I2"] for r in table)))
        for j, q in enumerate(("I1", "I2")):
            b, e = sups[0][j], sups[1][j]
            rows.append({"quantity": q, "case": name, "base": b, "enlarged": e,
                         "ratio": e / b if b > 0 else math.inf})
    for name, q in bound_qs():
        for N in (1, 2):
            sups = []
            for Ts, Ss in ((base_T, base_S), (big_T, big_S)):
                table = oscillatory_bound_constants(q.derivatives(N), N, Ts, Ss, N + 1, threads)
                sups.append(max(r["I3"] for r in table))
            rows.append({"quantity": f"I3_N{N}", "case": name, "base": sups[0],
                         "enlarged": sups[1], "ratio": sups[1] / sups[0]})
    return rows


def square_torus_remainder(spectrum, z, m):
    """<sigma>^{-1} (N - Z) for the sharp-cutoff spectrum, truncated after ``m`` eigenvalues."""
    from .weyl_analysis import remainder_causal_function
    sig, _ = spectrum.truncate_count(m)
    return remainder_causal_function(spectrum, z, 1, float(sig[-1]))


def square_torus_i3(spectrum, z, m, T=0.9, Sigma=50.0, M=3, N=2):
    """Direct and integrated-by-parts I3 for Q = (c - c(0)) / tau of the torus remainder."""
    gamma = square_torus_remainder(spectrum, z, m)
    derivs = QuotientDerivatives(gamma, N).as_list()
    p = ContourParams(T, Sigma, M)
    return compute_I3_direct(derivs[0], p), compute_I3_ibp(derivs, p, N)


#: Sigma of the high-frequency integration-by-parts row; here the relative accuracy
#: of the oscillatory quadrature is limited by cancellation (about 1e-8)
HIGH_FREQUENCY_SIGMA = 80.0


def boundary_suite(taus=None):
    """Extrapolated boundary values of Theta e^{-sigma} against 1 / (1 + i tau)."""
    from .fourier_laplace import boundary_value
    if taus is None:
        taus = np.linspace(-5.0, 5.0, 41)
    f = CausalFunction.exp_poly([1.0], rate=1.0)
    rows = []
    for t in taus:
        bv = boundary_value(f, float(t), exact_if_available=False)
        err = abs(bv.value - 1.0 / (1.0 + 1j * t)) if bv.converged else math.inf
        rows.append({"tau": float(t), "error": err, "order": bv.order})
    return rows
