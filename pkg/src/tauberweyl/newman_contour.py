"""Newman contour decomposition of a partial Fourier-Laplace transform.

With alpha = beta + gamma, A_Sigma, B_Sigma, C_Sigma the partial transforms
int_0^Sigma (.) e^{-sigma t} d sigma, C the full transform of gamma and c its
boundary value on the imaginary axis, Cauchy's theorem applied to the
counter-clockwise contour made of the right semicircle Gamma_+ of radius T
and the segment [iT, -iT] gives

    A_Sigma(0) = B_Sigma(0) + c(0) + I1 + I2 + I3,

    I1 = (2 pi i)^{-1} int_{Gamma_+} (C_Sigma - C)(t) e^{t Sigma} (1 + t^2/T^2)^M dt / t,
    I2 = (2 pi i)^{-1} int_{Gamma_-} C_Sigma(t) e^{t Sigma} (1 + t^2/T^2)^M dt / t,
    I3 = (2 pi i)^{-1} int_{-T}^{T} c(tau) e^{i tau Sigma} (1 - tau^2/T^2)^M dtau / (tau + i0).

Gamma_- is the left semicircle, traversed from iT to -iT; it replaces the
segment because C_Sigma is entire.  With t = T e^{i theta} one has
dt / t = i d theta, so both arc integrals become (1 / 2 pi) int d theta.
The i0 prescription in I3 is resolved by splitting c = c(0) + tau Q with
Q = (c - c(0)) / tau, which leaves a proper integral plus c(0) times an
explicit sine-integral term.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ._quad import adaptive_panels, panel_rule
from .errors import AccuracyError, DomainError, PreconditionError
from .fourier_laplace import CausalFunction, axis_quotient, boundary_value, partial_fl

__all__ = [
    "ContourParams",
    "Decomposition",
    "compute_I1",
    "compute_I2",
    "compute_I3_direct",
    "compute_I3_ibp",
    "singular_term",
    "verify_identity",
    "sobolev_l1_norm",
    "smoothing_weight_derivative",
    "sigma_threshold",
]


def sigma_threshold(K):
    """Smallest Sigma with <Sigma>^K <= 2 Sigma^K: 1 for K > 0, 0 for K = 0."""
    return 0.0 if K == 0 else 1.0


@dataclass(frozen=True)
class ContourParams:
    """Contour radius ``T``, cut-off ``Sigma``, smoothing power ``M`` and quadrature controls."""

    T: float
    Sigma: float
    M: int
    n_nodes: int = 64
    rtol: float = 1e-13
    atol: float = 1e-16
    max_panels: int = 1 << 14

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError("contour radius T must be positive")
        if not self.Sigma > 0:
            raise DomainError("Sigma must be positive")
        if int(self.M) != self.M or self.M < 1:
            raise DomainError("M must be a positive integer")

    def check_singular_support(self, lengths, tol=1e-6):
        """Raise if T lies within ``tol`` of a loop length (c is singular there)."""
        ell = np.asarray(getattr(lengths, "lengths", lengths), dtype=float)
        if ell.size and np.min(np.abs(ell - self.T)) < tol:
            raise PreconditionError(f"T = {self.T} lies on the singular support")

    def check_bound_hypotheses(self, K=None, N=None):
        """M >= ceil(K) + 1 for the arc bounds and M >= N for the oscillatory bound."""
        need = 0
        if K is not None:
            need = max(need, math.ceil(K) + 1)
        if N is not None:
            need = max(need, int(N))
        if self.M < need:
            raise PreconditionError(f"M = {self.M} is below the required {need}")

    def arc_panels(self):
        return max(1, int(math.ceil(self.T * self.Sigma / 20.0)))

    def line_panels(self):
        # at least 10 nodes per period 2 pi / Sigma on a half-interval of length T
        return max(1, int(math.ceil(self.T * self.Sigma / (2 * np.pi) * 10 / self.n_nodes)))


@dataclass(frozen=True)
class Decomposition:
    """Terms of the contour identity and its residual."""

    T: float
    Sigma: float
    M: int
    I1: complex
    I2: complex
    I3: complex
    c0: complex
    B_Sigma0: complex
    A_Sigma0: complex
    residual: float

    def as_row(self):
        row = {"T": self.T, "Sigma": self.Sigma, "M": self.M}
        for name in ("I1", "I2", "I3", "c0", "B_Sigma0", "A_Sigma0"):
            v = complex(getattr(self, name))
            row[f"{name}_re"] = v.real
            row[f"{name}_im"] = v.imag
        row["residual"] = self.residual
        return row


def _arc_integral(F, p, theta_lo, theta_hi):
    """(1 / 2 pi) int F(T e^{i theta}) (1 + e^{2 i theta})^M d theta."""
    def integrand(theta):
        t = p.T * np.exp(1j * theta)
        return F(t) * (1.0 + np.exp(2j * theta)) ** p.M

    val, _ = adaptive_panels(integrand, theta_lo, theta_hi, n_nodes=p.n_nodes,
                             panels=p.arc_panels(), rtol=p.rtol, atol=p.atol,
                             max_panels=p.max_panels)
    return complex(val) / (2 * np.pi)


def compute_I1(diff, p, shifted=True):
    """I1 over the right semicircle.

    ``diff`` is either a :class:`CausalFunction` gamma or a callable on
    complex arrays.  For callables, ``shifted=True`` means ``diff(t)`` returns
    e^{t Sigma} (C_Sigma - C)(t), which stays bounded for large Sigma;
    otherwise it returns (C_Sigma - C)(t) and the exponential is applied here.
    """
    if isinstance(diff, CausalFunction):
        g = diff
        F = lambda t: -g.integrate(t, p.Sigma, np.inf, shift=p.Sigma)  # noqa: E731
    elif shifted:
        F = diff
    else:
        F = lambda t: diff(t) * np.exp(t * p.Sigma)  # noqa: E731
    try:
        return _arc_integral(F, p, -0.5 * np.pi, 0.5 * np.pi)
    except AccuracyError:
        raise
    except Exception as exc:  # surface the failing arc
        raise type(exc)(f"I1 evaluation failed on the right arc |t| = {p.T}: {exc}") from exc


def compute_I2(f, p):
    """I2 over the left semicircle, using the entire partial transform C_Sigma."""
    if isinstance(f, CausalFunction):
        F = lambda t: f.integrate(t, 0.0, p.Sigma, shift=p.Sigma)  # noqa: E731
    else:
        F = f
    try:
        return _arc_integral(F, p, 0.5 * np.pi, 1.5 * np.pi)
    except AccuracyError:
        raise
    except Exception as exc:
        raise type(exc)(f"I2 evaluation failed on the left arc |t| = {p.T}: {exc}") from exc


def smoothing_weight_derivative(T, M, n):
    """Callable for the n-th derivative of (1 - tau^2 / T^2)^M (exact polynomial)."""
    base = np.polynomial.Polynomial([1.0, 0.0, -1.0 / T ** 2]) ** M
    return base.deriv(n) if n else base


def _check_integrable(g, T):
    """Detect a non-integrable singularity of g at tau = 0 from dyadic shell masses."""
    for sign in (1.0, -1.0):
        masses = []
        for k in range(18, 24):
            a, b = T * 2.0 ** (-k - 1), T * 2.0 ** (-k)
            x, w = panel_rule(np.array([a, b]), 16)
            masses.append(float(np.sum(w * np.abs(g(sign * x)))))
        masses = np.array(masses)
        if masses[0] > 0 and np.all(masses[1:] > 0.9 * masses[:-1]):
            raise DomainError("Q is not integrable at tau = 0 (dyadic shell masses do not decay)")


def _oscillatory(g, p, check=True):
    """int_{-T}^{T} g(tau) e^{i tau Sigma} d tau, split at 0 with graded panels there."""
    if check:
        _check_integrable(g, p.T)
    integrand = lambda tau: g(tau) * np.exp(1j * p.Sigma * tau)  # noqa: E731
    total = 0j
    for lo, hi, grade in ((-p.T, 0.0, "right"), (0.0, p.T, "left")):
        kw = {"grade_left": 12} if grade == "left" else {"grade_right": 12}
        try:
            val, _ = adaptive_panels(integrand, lo, hi, n_nodes=p.n_nodes,
                                     panels=p.line_panels(), rtol=p.rtol, atol=p.atol,
                                     max_panels=p.max_panels, **kw)
        except AccuracyError as exc:
            raise AccuracyError(f"oscillatory quadrature on [{lo:g}, {hi:g}] did not converge",
                                exc.achieved, exc.value) from exc
        total += val
    return total


def compute_I3_direct(Q, p):
    """(2 pi i)^{-1} int_{-T}^{T} Q(tau) e^{i tau Sigma} (1 - tau^2/T^2)^M d tau."""
    w = smoothing_weight_derivative(p.T, p.M, 0)
    g = lambda tau: Q(tau) * w(tau)  # noqa: E731
    return complex(_oscillatory(g, p)) / (2j * np.pi)


def compute_I3_ibp(Q_derivatives, p, N):
    """I3 after N integrations by parts.

    With w = (1 - tau^2/T^2)^M and e^{i tau Sigma} = (i Sigma)^{-N} d^N/dtau^N e^{i tau Sigma},
    the boundary terms vanish when M >= N and

        I3 = (2 pi i)^{-1} (-1)^N (i Sigma)^{-N} sum_n C(N, n) int Q^{(N-n)} w^{(n)} e^{i tau Sigma} d tau.

    ``Q_derivatives[k]`` must evaluate the k-th derivative of Q for k <= N.
    """
    N = int(N)
    if N < 0:
        raise DomainError("N must be >= 0")
    if p.M < N:
        raise PreconditionError(f"M = {p.M} < N = {N}: boundary terms would not vanish")
    if len(Q_derivatives) < N + 1:
        raise DomainError(f"need derivatives of Q up to order {N}")
    if N == 0:
        return compute_I3_direct(Q_derivatives[0], p)
    weights = [smoothing_weight_derivative(p.T, p.M, n) for n in range(N + 1)]

    def g(tau):
        acc = np.zeros(np.shape(tau), dtype=complex)
        for n in range(N + 1):
            acc = acc + math.comb(N, n) * Q_derivatives[N - n](tau) * weights[n](tau)
        return acc

    pref = (-1) ** N * (1j * p.Sigma) ** (-N) / (2j * np.pi)
    return complex(pref * _oscillatory(g, p))


def singular_term(p):
    """(2 pi i)^{-1} int_{-T}^{T} e^{i tau Sigma} (1 - tau^2/T^2)^M d tau / (tau + i0).

    Writing 1/(tau + i0) = p.v. 1/tau - i pi delta gives
    (1/pi) int_0^T sin(tau Sigma) / tau (1 - tau^2/T^2)^M d tau - 1/2.
    """
    w = smoothing_weight_derivative(p.T, p.M, 0)
    f = lambda tau: p.Sigma * np.sinc(tau * p.Sigma / np.pi) * w(tau)  # noqa: E731
    val, _ = adaptive_panels(f, 0.0, p.T, n_nodes=p.n_nodes, panels=p.line_panels(),
                             rtol=p.rtol, atol=p.atol, max_panels=p.max_panels)
    return float(val) / np.pi - 0.5


def _value_at_origin(gamma):
    bv = boundary_value(gamma, 0.0)
    if not bv.converged:
        raise DomainError(f"c(0) does not exist: {bv.message}")
    return bv.value


def verify_identity(f_alpha, f_beta, f_gamma, p):
    """Assemble every term of the contour identity and report its residual."""
    if not f_gamma.axis_convergent:
        raise DomainError("gamma must be structured with an absolutely convergent axis transform")
    A0 = partial_fl(f_alpha, p.Sigma, 0.0)
    B0 = partial_fl(f_beta, p.Sigma, 0.0)
    c0 = _value_at_origin(f_gamma)
    I1 = compute_I1(f_gamma, p)
    I2 = compute_I2(f_gamma, p)
    Q = lambda tau: axis_quotient(f_gamma, tau, 0, c0=c0)  # noqa: E731
    I3 = compute_I3_direct(Q, p) + c0 * singular_term(p)
    residual = abs(A0 - B0 - c0 - I1 - I2 - I3)
    return Decomposition(p.T, p.Sigma, p.M, I1, I2, I3, c0, B0, A0, float(residual))


def sobolev_l1_norm(Q_derivatives, a, b, N, rtol=1e-10):
    """sum_{k <= N} int_a^b |Q^{(k)}| by adaptive Gauss-Legendre panels."""
    total = 0.0
    for k in range(N + 1):
        g = Q_derivatives[k]
        val, _ = adaptive_panels(lambda x: np.abs(g(x)), a, b, n_nodes=32, panels=8,
                                 rtol=rtol, atol=1e-14, max_panels=1 << 14)
        total += float(val)
    return total


def run_grid(fn, grid, threads=1):
    """Apply ``fn`` to every grid point, optionally on a thread pool (order preserved)."""
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, grid))
    return [fn(g) for g in grid]


def arc_bound_constants(gamma, K, budget, T_list, Sigma_list, M, threads=1):
    """Rows of |I1| T / (Sigma^K budget) and |I2| T / (Sigma^K budget) over a sweep."""
    grid = [(T, S) for T in T_list for S in Sigma_list if S >= sigma_threshold(K)]

    def one(ts):
        T, S = ts
        p = ContourParams(T, S, M)
        p.check_bound_hypotheses(K=K)
        i1 = compute_I1(gamma, p)
        i2 = compute_I2(gamma, p)
        scale = T / (S ** K * budget)
        return {"T": T, "Sigma": S, "M": M, "I1": abs(i1) * scale, "I2": abs(i2) * scale}

    return run_grid(one, grid, threads)


def oscillatory_bound_constants(Q_derivatives, N, T_list, Sigma_list, M, threads=1):
    """Rows of |I3| Sigma^N / ||Q||_{L^{1,N}[-T,T]} over a sweep."""
    grid = [(T, S) for T in T_list for S in Sigma_list]

    def one(ts):
        T, S = ts
        p = ContourParams(T, S, M)
        p.check_bound_hypotheses(N=N)
        i3 = compute_I3_direct(Q_derivatives[0], p)
        norm = sobolev_l1_norm(Q_derivatives, -T, T, N)
        return {"T": T, "Sigma": S, "M": M, "N": N, "I3": abs(i3) * S ** N / norm}

    return run_grid(one, grid, threads)


def params_dict(p):
    return asdict(p)
