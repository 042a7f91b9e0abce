"""Weyl polynomial, remainder series, regulator estimation and the mean-to-max step.

Conventions: for a model manifold of dimension d the Weyl polynomial Z has
degree L = d and the remainder is weighted by <sigma>^{-J} with J = d - 1.
The mean-to-max step turns |A_Sigma - A_limit| <~ 1 / R(Sigma) into the
pointwise bound |N - Z|(sigma) <~ sigma^kappa R(sigma / 2)^{-1/2}, with
kappa = (L + J - 1) / 2 and Delta = (L - J + 1) / 2 = L - kappa.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UndefinedFitError
from .fourier_laplace import CausalFunction, japanese_bracket, partial_fl
from .pole_calculus import PolynomialAnsatz
from .spectral_models import Sphere, Torus, unit_ball_volume

__all__ = [
    "weyl_leading_coefficient",
    "weyl_polynomial",
    "RemainderSeries",
    "remainder_series",
    "remainder_extremes",
    "window_maxima",
    "EnvelopeFit",
    "envelope_exponent",
    "RegulatorEstimate",
    "estimate_regulator",
    "remainder_causal_function",
    "MeanToMaxReport",
    "mean_to_max_check",
    "dyadic_sigma_grid",
    "WeylPipelineResult",
    "run_weyl_pipeline",
]

#: first dyadic window edge for envelope fits
ENVELOPE_START = 8.0


def weyl_leading_coefficient(m):
    """(2 pi)^{-d} Vol(M) Vol(B^d)."""
    d = m.dimension
    return (2 * np.pi) ** (-d) * m.volume * unit_ball_volume(d)


def weyl_polynomial(m, spectrum=None, fit_sigma_max=None):
    """Weyl polynomial of a model manifold.

    The leading term is (2 pi)^{-d} Vol Vol(B^d) sigma^d and the sigma^{d-1}
    coefficient is zero.  For tori the lower terms are zero.  For spheres,
    when ``spectrum`` is supplied, the terms of degree <= d - 2 are fitted by
    least squares to N - c sigma^d on [1, fit_sigma_max] and then frozen.
    """
    d = m.dimension
    lead = weyl_leading_coefficient(m)
    coeffs = [0.0] * (d + 1)
    coeffs[d] = lead
    if isinstance(m, Sphere) and spectrum is not None and d >= 2:
        top = float(fit_sigma_max or spectrum.sigma_max)
        sig = np.linspace(1.0, top, int(40 * top) + 1)
        resid = spectrum.counts(sig) - lead * sig ** d
        basis = np.stack([sig ** j for j in range(d - 1)], axis=1)
        sol, *_ = np.linalg.lstsq(basis, resid, rcond=None)
        coeffs[: d - 1] = [float(c) for c in sol]
    return PolynomialAnsatz(tuple(coeffs))


def _degree(z):
    return max(z.degree, 0)


@dataclass(frozen=True, eq=False)
class RemainderSeries:
    """N - Z and <sigma>^{-J} (N - Z + E) on a sigma grid."""

    sigma: np.ndarray
    raw: np.ndarray
    weighted: np.ndarray
    J: int
    L: int

    @property
    def kappa(self):
        return (self.L + self.J - 1) / 2

    @property
    def Delta(self):
        return (self.L - self.J + 1) / 2


def remainder_series(spectrum, z, grid, J=None, bump=None):
    """Tabulate raw and weighted remainders on ``grid`` (J defaults to deg Z - 1)."""
    sig = np.asarray(grid, dtype=float)
    L = _degree(z)
    if J is None:
        J = max(L - 1, 0)
    N = spectrum.counts(sig)
    raw = N - np.real(z(sig))
    extra = np.real(bump(sig)) if bump is not None else 0.0
    weighted = japanese_bracket(sig) ** (-J) * (raw + extra)
    return RemainderSeries(sig, raw, weighted, int(J), int(L))


def remainder_extremes(spectrum, z, sigma_hi):
    """Exact one-sided values of N - Z at every jump up to ``sigma_hi``.

    Between jumps N is constant, so for a monotone Z the extreme values of
    |N - Z| on [0, sigma_hi] are attained at jumps (right values and left
    limits).  Returns ``(sigma, right_values, left_values)``.
    """
    keep = spectrum.sigma <= sigma_hi
    sig = spectrum.sigma[keep]
    right = spectrum.counts(sig, side="right") - np.real(z(sig))
    left = spectrum.counts(sig, side="left") - np.real(z(sig))
    return sig, right, left


def window_maxima(sigma, values, sigma_hi, start=ENVELOPE_START):
    """Maxima of ``values`` over complete dyadic windows [start 2^k, start 2^{k+1})."""
    sigma = np.asarray(sigma, dtype=float)
    values = np.asarray(values, dtype=float)
    edges = [start]
    while edges[-1] * 2 <= sigma_hi * (1 + 1e-12):
        edges.append(edges[-1] * 2)
    lows, maxima = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (sigma >= a) & (sigma < b)
        if np.any(sel):
            lows.append(a)
            maxima.append(float(np.max(values[sel])))
    return np.array(lows), np.array(maxima)


@dataclass(frozen=True)
class EnvelopeFit:
    slope: float
    intercept: float
    band: tuple
    windows: tuple
    maxima: tuple


def envelope_exponent(sigma, values, sigma_hi=None, start=ENVELOPE_START, n_boot=2000, seed=0):
    """Least-squares slope of log(window max |value|) against log sigma.

    The confidence band is the 2.5-97.5 percentile range of slopes refitted
    on windows resampled with replacement.
    """
    sigma = np.asarray(sigma, dtype=float)
    mag = np.abs(np.asarray(values, dtype=float))
    if sigma_hi is None:
        sigma_hi = float(np.max(sigma))
    lows, maxima = window_maxima(sigma, mag, sigma_hi, start)
    if lows.size < 4:
        raise DomainError(f"need at least 4 complete dyadic windows, got {lows.size}")
    if np.any(maxima <= 0):
        raise UndefinedFitError("a dyadic window has an all-zero maximum")
    x, y = np.log(lows), np.log(maxima)
    slope, intercept = np.polyfit(x, y, 1)
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        idx = rng.integers(0, x.size, x.size)
        if np.unique(x[idx]).size < 2:
            continue
        boots.append(np.polyfit(x[idx], y[idx], 1)[0])
    band = (float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5)))
    return EnvelopeFit(float(slope), float(intercept), band, tuple(lows.tolist()),
                       tuple(maxima.tolist()))


@dataclass(frozen=True, eq=False)
class RegulatorEstimate:
    """Tabulated norms and the induced nondecreasing regulator R(Sigma)."""

    ell: int
    Lam: float
    T_table: np.ndarray
    norm_table: np.ndarray
    sigma: np.ndarray
    R: np.ndarray
    saturated: np.ndarray

    def __call__(self, Sigma):
        return _regulator_values(self.T_table, self.norm_table, self.ell, self.Lam,
                                 np.asarray(Sigma, dtype=float))[0]

    def to_json(self):
        return {"ell": self.ell, "Lambda": self.Lam,
                "norm_table": [[float(t), float(n)] for t, n in zip(self.T_table, self.norm_table)],
                "sigma": self.sigma.tolist(), "R": self.R.tolist(),
                "saturated": [bool(s) for s in self.saturated]}


def _regulator_values(T, norms, ell, Lam, Sigma):
    # g(T) = T * norm(T), interpolated linearly in log T with the anchor g(1) = 0
    logT = np.concatenate([[0.0], np.log(T)]) if T[0] > 1 else np.log(T)
    g = np.concatenate([[0.0], T * norms]) if T[0] > 1 else T * norms
    target = Lam * np.power(Sigma, ell)
    R = np.empty(np.shape(Sigma))
    sat = np.zeros(np.shape(Sigma), dtype=bool)
    for i, tgt in np.ndenumerate(target):
        if tgt >= g[-1]:
            R[i], sat[i] = T[-1], True
            continue
        k = int(np.searchsorted(g, tgt, side="right"))
        if k == 0:
            R[i] = 1.0
            continue
        x0, x1, g0, g1 = logT[k - 1], logT[k], g[k - 1], g[k]
        R[i] = math.exp(x0 + (tgt - g0) / (g1 - g0) * (x1 - x0))
    return np.maximum(R, 1.0), sat


def estimate_regulator(norm_table, ell, Lam, Sigma_grid):
    """R(Sigma) = max{1, largest T with T * norm(T) <= Lam Sigma^ell}.

    Between table rows T * norm(T) is interpolated linearly in log T (with
    the anchor value 0 at T = 1, where the interval [1, T] is empty).  Beyond
    the last row the value is clamped and flagged as saturated.
    """
    rows = sorted((float(t), float(n)) for t, n in norm_table)
    if not rows:
        raise DomainError("empty norm table")
    T = np.array([r[0] for r in rows])
    norms = np.array([r[1] for r in rows])
    if np.any(T < 1):
        raise DomainError("table radii must be >= 1")
    if T.size > 1 and (np.any(np.diff(T) <= 0) or np.any(np.diff(norms) <= 0)):
        raise DomainError("norm table must be strictly increasing in T and in the norm")
    if not Lam > 0 or ell < 0:
        raise DomainError("need Lambda > 0 and ell >= 0")
    sig = np.asarray(Sigma_grid, dtype=float)
    if np.any(sig <= 0):
        raise DomainError("Sigma grid must be positive")
    R, sat = _regulator_values(T, norms, ell, Lam, sig)
    return RegulatorEstimate(int(ell), float(Lam), T, norms, sig, R, sat)


def remainder_causal_function(spectrum, z, J, sigma_hi=None):
    """<sigma>^{-J} (N - Z) as a structured causal function on [0, sigma_hi)."""
    top = float(spectrum.sigma_max if sigma_hi is None else sigma_hi)
    keep = spectrum.sigma < top
    jumps = spectrum.sigma[keep]
    levels = np.cumsum(spectrum.multiplicity[keep]).astype(float)
    edges = np.concatenate([jumps, [top]])
    zc = z.complex_coefficients()
    deg = max(zc.size - 1, 0)
    # local coefficients of N_k - Z(lo + u) in u
    coeffs = np.zeros((jumps.size, deg + 1), dtype=complex)
    for j in range(deg + 1):
        # j-th Taylor coefficient of Z at lo: sum_i c_i C(i, j) lo^(i-j)
        acc = np.zeros(jumps.size, dtype=complex)
        for i in range(j, zc.size):
            acc += zc[i] * math.comb(i, j) * jumps ** (i - j)
        coeffs[:, j] = -acc
    coeffs[:, 0] += levels
    f = CausalFunction.piecewise(edges, coeffs, label="weighted remainder")
    if J:
        f = f.with_weight(lambda s: japanese_bracket(s) ** (-J))
    return f


@dataclass(frozen=True)
class MeanToMaxReport:
    kappa: float
    Delta: float
    hypothesis_constant: float
    hypothesis_violations: tuple
    conclusion_constant: float
    conclusion_holdout_constant: float
    conclusion_violations: tuple
    fitted_exponent: float
    exponent_band: tuple
    slack: float

    @property
    def holds(self):
        return (math.isfinite(self.conclusion_constant)
                and not self.conclusion_violations)

    def to_json(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()} | {
            "holds": self.holds}


def mean_to_max_check(series_or_extremes, A_sigma, A_values, A_limit, regulator,
                      kappa, Delta=None, slack=2.0, seed=0):
    """Check the two sides of the mean-to-max step numerically.

    Parameters
    ----------
    series_or_extremes : tuple (sigma, values)
        Points where |N - Z| is tabulated (typically the exact jump extremes).
    A_sigma, A_values : arrays
        The dyadic Sigma grid and A_Sigma = int_0^Sigma alpha on it.
    A_limit : complex
        Limit of A_Sigma as Sigma -> infinity.
    regulator : callable
        Sigma -> R(Sigma), nondecreasing and >= 1.

    Each constant is fitted (as a supremum) on the lower half of its range
    and checked on the upper half with multiplicative ``slack``; points that
    exceed ``slack`` times the fitted constant are reported as violations.
    """
    sig, val = (np.asarray(a, dtype=float) for a in series_or_extremes)
    if Delta is None:
        Delta = math.nan
    A_sigma = np.asarray(A_sigma, dtype=float)
    dev = np.abs(np.asarray(A_values) - A_limit) * regulator(A_sigma)
    half = A_sigma.size // 2
    C_hyp = float(np.max(dev[: max(half, 1)]))
    hyp_viol = tuple(float(s) for s, v in zip(A_sigma[half:], dev[half:]) if v > slack * C_hyp)

    keep = sig > 0
    sig, val = sig[keep], np.abs(val[keep])
    env = sig ** kappa * regulator(sig / 2) ** -0.5
    ratio = val / env
    mid = 0.5 * (sig.min() + sig.max())
    lower = sig <= mid
    C_fit = float(np.max(ratio[lower]))
    C_all = float(np.max(ratio))
    viol = tuple(float(s) for s, r in zip(sig[~lower], ratio[~lower]) if r > slack * C_fit)
    scaled = val * regulator(sig / 2) ** 0.5
    try:
        fit = envelope_exponent(sig, scaled, seed=seed)
        slope, band = fit.slope, fit.band
    except (DomainError, UndefinedFitError):
        slope, band = math.nan, (math.nan, math.nan)
    return MeanToMaxReport(float(kappa), float(Delta), C_hyp, hyp_viol, C_all, C_fit, viol,
                           slope, band, float(slack))


def dyadic_sigma_grid(lo, hi, per_octave=4):
    """Geometric grid from ``lo`` to ``hi`` with ``per_octave`` points per doubling."""
    n = int(math.floor(per_octave * math.log2(hi / lo) + 1e-9))
    return lo * 2.0 ** (np.arange(n + 1) / per_octave)


@dataclass
class WeylPipelineResult:
    """Everything produced by :func:`run_weyl_pipeline`."""

    manifold: dict
    polynomial: PolynomialAnsatz
    J: int
    L: int
    envelope: EnvelopeFit
    A_sigma: np.ndarray
    A_values: np.ndarray
    A_limit: complex
    bump_amplitude: complex
    regulator: RegulatorEstimate | None
    regulator_check: dict = field(default_factory=dict)
    mean_to_max: MeanToMaxReport | None = None
    extremes: tuple = ()

    def to_json(self):
        out = {
            "manifold": self.manifold,
            "polynomial": self.polynomial.to_json(),
            "J": self.J, "L": self.L,
            "kappa": (self.L + self.J - 1) / 2, "Delta": (self.L - self.J + 1) / 2,
            "envelope": {"slope": self.envelope.slope, "band": list(self.envelope.band),
                         "windows": list(self.envelope.windows),
                         "maxima": list(self.envelope.maxima)},
            "A_sigma": self.A_sigma.tolist(),
            "A_values": [[complex(v).real, complex(v).imag] for v in self.A_values],
            "A_limit": [complex(self.A_limit).real, complex(self.A_limit).imag],
            "bump_amplitude": [complex(self.bump_amplitude).real,
                               complex(self.bump_amplitude).imag],
            "regulator": None if self.regulator is None else self.regulator.to_json(),
            "regulator_check": self.regulator_check,
            "mean_to_max": None if self.mean_to_max is None else self.mean_to_max.to_json(),
        }
        return out


def _spectrum_for(m, sigma_spec):
    from .spectral_models import enumerate_sphere_spectrum, enumerate_torus_spectrum
    if isinstance(m, Torus):
        return enumerate_torus_spectrum(m.lattice, sigma_spec)
    return enumerate_sphere_spectrum(m.dimension, sigma_spec)


def run_weyl_pipeline(m, sigma_max, *, regulator=True, h=None, ell=1, Lam=1.0,
                      T_list=(2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0), grid_step=0.01,
                      slack=2.0, seed=0, threads=1, norm_rtol=0.01):
    """Weyl polynomial, remainder envelope, A_Sigma, regulator and mean-to-max report.

    The spectrum is enumerated to 1.2 * sigma_max.  The regulator uses the
    inverse-tau weighted trace tau^{-1} a with a = F[<sigma>^{-J}(N - Z)],
    Gaussian cutoff ``h`` (default: the smallest the enumeration supports),
    and norms are recomputed at cutoff 2h to flag non-convergence.
    """
    from .half_wave_trace import GAUSSIAN_REACH, GaussianScale, RegularizationSpec
    from .half_wave_trace import sobolev_norm_table
    from .pole_calculus import solve_bump_amplitude

    sigma_spec = 1.2 * sigma_max
    spectrum = _spectrum_for(m, sigma_spec)
    fit_top = sigma_max if isinstance(m, Sphere) else None
    z = weyl_polynomial(m, spectrum, fit_top)
    L = _degree(z)
    J = max(m.dimension - 1, 0)

    sig, right, left = remainder_extremes(spectrum, z, sigma_max)
    ext_sig = np.concatenate([sig, sig])
    ext_val = np.concatenate([right, left])
    envelope = envelope_exponent(ext_sig, ext_val, sigma_max, seed=seed)

    alpha = remainder_causal_function(spectrum, z, J, sigma_spec)
    A_sigma = dyadic_sigma_grid(ENVELOPE_START, sigma_max)
    A_values = np.array([partial_fl(alpha, s, 0.0) for s in A_sigma])
    tail = np.linspace(sigma_max / 2, sigma_max, 65)
    A_limit = complex(np.mean([partial_fl(alpha, s, 0.0) for s in tail]))
    weight = lambda s: japanese_bracket(s) ** (-J)  # noqa: E731
    bump = solve_bump_amplitude(A_limit, weight)
    # the bump E is supported in (1, 2) and carries weighted mass -A_limit, so on the
    # grid (which starts at 8) adding it shifts every A_Sigma by exactly -A_limit
    A_values = A_values - A_limit
    A_limit_bumped = 0j

    result = WeylPipelineResult(
        manifold=m.describe(), polynomial=z, J=J, L=L, envelope=envelope,
        A_sigma=A_sigma, A_values=A_values, A_limit=A_limit_bumped,
        bump_amplitude=complex(bump.amplitude), regulator=None,
        extremes=(ext_sig, ext_val))
    if not regulator:
        return result

    if h is None:
        h = GAUSSIAN_REACH / sigma_spec
    specs = [RegularizationSpec(GaussianScale(h * f), float(J), True) for f in (2.0, 1.0)]
    tables = []
    for spec in specs:
        T_used, norms, step = sobolev_norm_table(
            spectrum, spec, ell, 1.0, T_list, grid_step, tau_power=1, subtract=z,
            rtol=norm_rtol, threads=threads)
        tables.append(norms)
    rel = np.abs(tables[1] - tables[0]) / np.abs(tables[1])
    Sigma_grid = dyadic_sigma_grid(1.0, sigma_max)
    est = estimate_regulator(list(zip(T_used, tables[1])), ell, Lam, Sigma_grid)
    result.regulator = est
    result.regulator_check = {
        "h": [float(h * 2.0), float(h)],
        "norms_coarse": tables[0].tolist(),
        "norms_fine": tables[1].tolist(),
        "max_relative_change": float(np.max(rel)),
        "converged": bool(np.max(rel) < 0.1),
    }
    kappa = (L + J - 1) / 2
    result.mean_to_max = mean_to_max_check((ext_sig, ext_val), A_sigma, A_values, 0.0, est,
                                           kappa, L - kappa, slack=slack, seed=seed)
    return result
