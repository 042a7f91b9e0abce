"""Regularised half-wave traces as finite mollified spectral sums.

The half-wave trace is HWT(tau) = sum_n e^{-i sigma_n tau}, the Fourier
transform of the spectral measure.  A cutoff (sharp eigenvalue count or a
Gaussian window w(sigma) = exp(-sigma^2 h^2 / 2)) and the Sobolev weight
<sigma>^{-s} turn it into the finite sum

    H_s^{(k)}(tau) = sum_n mult_n w(sigma_n) <sigma_n>^{-s} (-i sigma_n)^k e^{-i sigma_n tau},

which is the k-th termwise tau-derivative.  The inverse-tau weighted object
is the transform of the weighted counting function
N_w(sigma) = int_0^sigma <x>^{-s} w(x) dN(x); since F Theta = 1 / (i (tau - i0)),
away from tau = 0 it equals H_s(tau) / (i tau).  Optionally the weighted
Weyl polynomial int_0^sigma <x>^{-s} w(x) Z'(x) dx is subtracted; its
transform is evaluated by Gauss-Legendre quadrature.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.signal import find_peaks

from ._quad import panel_rule
from .errors import AccuracyError, DomainError, IncompleteSpectrumError
from .fourier_laplace import japanese_bracket

__all__ = [
    "SharpCount",
    "GaussianScale",
    "RegularizationSpec",
    "TauGrid",
    "TraceGrid",
    "Peak",
    "sample_trace",
    "detect_singularities",
    "sobolev_norm",
    "sobolev_norm_table",
    "GAUSSIAN_REACH",
]

#: the Gaussian window is treated as zero beyond sigma = GAUSSIAN_REACH / h
GAUSSIAN_REACH = 9.5
# tau samples evaluated per block of the direct sum
_TAU_BLOCK = 256


@dataclass(frozen=True)
class SharpCount:
    """Keep the first ``m`` eigenvalues counted with multiplicity."""

    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError("SharpCount needs m >= 1")


@dataclass(frozen=True)
class GaussianScale:
    """Gaussian window exp(-sigma^2 h^2 / 2)."""

    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError("GaussianScale needs h > 0")

    def window(self, sigma):
        return np.exp(-0.5 * (np.asarray(sigma) * self.h) ** 2)


@dataclass(frozen=True)
class RegularizationSpec:
    cutoff: SharpCount | GaussianScale
    sobolev_order: float = 0.0
    weight_by_inverse_tau: bool = False

    def __post_init__(self):
        if self.sobolev_order < 0:
            raise DomainError("sobolev_order must be >= 0")

    def describe(self):
        if isinstance(self.cutoff, SharpCount):
            cut = {"kind": "sharp", "m": int(self.cutoff.m)}
        else:
            cut = {"kind": "gaussian", "h": float(self.cutoff.h)}
        return {"cutoff": cut, "sobolev_order": float(self.sobolev_order),
                "weight_by_inverse_tau": bool(self.weight_by_inverse_tau)}


@dataclass(frozen=True)
class TauGrid:
    """Uniform grid ``start + step * arange(count)``."""

    start: float
    step: float
    count: int

    def __post_init__(self):
        if self.count < 2 or not self.step > 0:
            raise DomainError("a tau grid needs count >= 2 and step > 0")

    @classmethod
    def from_range(cls, lo, hi, step):
        count = int(round((hi - lo) / step)) + 1
        return cls(float(lo), float(step), count)

    @property
    def tau(self):
        return self.start + self.step * np.arange(self.count)


@dataclass(frozen=True, eq=False)
class TraceGrid:
    grid: TauGrid
    values: np.ndarray
    derivative_order: int
    spec: RegularizationSpec
    source: str = ""
    time_scale: float = 1.0

    @property
    def tau(self):
        return self.grid.tau

    def to_json(self):
        return {"grid": {"start": self.grid.start, "step": self.grid.step,
                         "count": self.grid.count},
                "derivative_order": self.derivative_order, "spec": self.spec.describe(),
                "source": self.source, "time_scale": self.time_scale}


@dataclass(frozen=True)
class Peak:
    tau: float
    uncertainty: float
    height: float


def _kept_terms(spectrum, spec):
    """Frequencies and real coefficients mult * w * <sigma>^{-s} of the cut-off sum."""
    cut = spec.cutoff
    if isinstance(cut, SharpCount):
        sig, mult = spectrum.truncate_count(cut.m)
        w = np.ones(sig.shape)
    else:
        reach = GAUSSIAN_REACH / cut.h
        if spectrum.sigma_max < reach:
            raise IncompleteSpectrumError(
                f"Gaussian cutoff h = {cut.h:g} needs the spectrum up to sigma = {reach:g}, "
                f"enumerated only to {spectrum.sigma_max:g}")
        keep = spectrum.sigma <= reach
        sig, mult = spectrum.sigma[keep], spectrum.multiplicity[keep]
        w = cut.window(sig)
    coef = mult * w * japanese_bracket(sig) ** (-spec.sobolev_order)
    return np.asarray(sig, float), np.asarray(coef, float)


def _direct_sum(sig, coef_by_order, tau, threads=1):
    """sum_n coef_k[n] e^{-i sig_n tau} for each order k, blocked over tau.

    Each tau row is reduced independently with numpy's pairwise summation,
    so the result does not depend on the number of threads.
    """
    out = np.empty((len(coef_by_order), tau.size), dtype=complex)
    starts = list(range(0, tau.size, _TAU_BLOCK))

    def block(start):
        tt = tau[start:start + _TAU_BLOCK]
        phase = np.exp(-1j * np.outer(tt, sig))
        for k, c in enumerate(coef_by_order):
            out[k, start:start + tt.size] = (phase * c[None, :]).sum(axis=1)

    if threads and threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(block, starts))
    else:
        for s in starts:
            block(s)
    return out


def _polynomial_transform(zprime, spec, orders, tau, sigma_hi, threads=1):
    """int_0^sigma_hi Z'(x) w(x) <x>^{-s} (-i x)^k e^{-i x tau} dx for each order k."""
    tmax = max(float(np.max(np.abs(tau))), 1.0)
    panel = min(2.0 * 2 * np.pi / tmax, 2.0)
    n_panels = max(4, int(math.ceil(sigma_hi / panel)))
    x, wq = panel_rule(np.linspace(0.0, sigma_hi, n_panels + 1), 32)
    base = wq * zprime(x) * japanese_bracket(x) ** (-spec.sobolev_order)
    if isinstance(spec.cutoff, GaussianScale):
        base = base * spec.cutoff.window(x)
    coefs = [base * (-1j * x) ** k for k in orders]
    return _direct_sum(x, coefs, tau, threads)


def _weighted_orders(H, P, tau, order):
    """k-th derivative of (H - P) / (i tau) from derivatives of H - P (Leibniz rule)."""
    acc = np.zeros(tau.shape, dtype=complex)
    for j in range(order + 1):
        m = order - j
        inv = (-1) ** m * math.factorial(m) / (1j * tau ** (m + 1))
        diff = H[j] - (P[j] if P is not None else 0.0)
        acc += math.comb(order, j) * diff * inv
    return acc


def _trace_values(spectrum, tau, spec, derivative_order, subtract, threads):
    sig, coef = _kept_terms(spectrum, spec)
    orders = range(derivative_order + 1) if spec.weight_by_inverse_tau else [derivative_order]
    coefs = [coef * (-1j * sig) ** k for k in orders]
    H = _direct_sum(sig, coefs, tau, threads)
    if not spec.weight_by_inverse_tau:
        return H[0]
    P = None
    if subtract is not None:
        zprime = subtract.derivative()
        if isinstance(spec.cutoff, GaussianScale):
            hi = GAUSSIAN_REACH / spec.cutoff.h
        else:
            hi = float(sig[-1])
        P = _polynomial_transform(zprime, spec, orders, tau, hi, threads)
    return _weighted_orders(H, P, tau, derivative_order)


def sample_trace(spectrum, grid, spec, derivative_order=0, *, time_scale=1.0,
                 subtract=None, threads=1):
    """Sample the regularised (optionally inverse-tau weighted) trace on a grid.

    ``time_scale`` multiplies the frequencies (tau is measured in units of
    ``1 / time_scale``).  ``subtract`` is a polynomial ansatz Z whose weighted
    transform is removed from the weighted trace.
    """
    if int(derivative_order) != derivative_order or derivative_order < 0:
        raise DomainError("derivative_order must be a nonnegative integer")
    tau = grid.tau
    if spec.weight_by_inverse_tau:
        near = max(grid.step, 1e-12)
        if np.any(np.abs(tau) < 0.5 * near) or (tau[0] < 0 < tau[-1]):
            raise DomainError("the inverse-tau weighted trace needs a grid avoiding tau = 0")
    scaled = tau * time_scale
    vals = _trace_values(spectrum, scaled, spec, derivative_order, subtract, threads)
    vals = vals * time_scale ** derivative_order
    if spec.weight_by_inverse_tau:
        vals = vals * time_scale
    return TraceGrid(grid, vals, int(derivative_order), spec, spectrum.label, float(time_scale))


def detect_singularities(trace, window=0.05, prominence=None, tau_range=None):
    """Prominent local maxima of |values| with parabolic refinement.

    ``prominence`` defaults to five times the median of |values| over the
    search range.  Peaks closer than ``window`` are merged (the higher one
    survives) and each location carries an uncertainty of ``window / 2``.
    """
    if trace.values.size == 0:
        raise DomainError("empty trace grid")
    if trace.derivative_order != 0:
        raise DomainError("singularity detection works on order-0 traces")
    tau = trace.tau
    amp = np.abs(trace.values)
    if tau_range is not None:
        sel = (tau > tau_range[0]) & (tau < tau_range[1])
        tau, amp = tau[sel], amp[sel]
    if amp.size < 3:
        raise DomainError("search range contains fewer than three samples")
    if prominence is None:
        prominence = 5.0 * float(np.median(amp))
    if prominence <= 0:
        return []
    distance = max(1, int(round(window / trace.grid.step)))
    idx, props = find_peaks(amp, prominence=prominence, distance=distance)
    step = trace.grid.step
    peaks = []
    for i in idx:
        loc = tau[i]
        if 0 < i < amp.size - 1:
            y0, y1, y2 = amp[i - 1], amp[i], amp[i + 1]
            den = y0 - 2 * y1 + y2
            if den < 0:
                loc = tau[i] + 0.5 * step * (y0 - y2) / den
        peaks.append(Peak(float(loc), 0.5 * window, float(amp[i])))
    return peaks


def _norm_integrand(spectrum, spec, ell, tau, tau_power, subtract, threads):
    """|d^k/dtau^k (tau^{-p} Q)| for k = 0..ell on the given tau samples."""
    grid_vals = []
    for k in range(ell + 1):
        grid_vals.append(_trace_values(spectrum, tau, spec, k, subtract, threads)
                         if spec.weight_by_inverse_tau else
                         _direct_sum(*_kept_pair(spectrum, spec, k), tau, threads)[0])
    out = []
    for k in range(ell + 1):
        acc = np.zeros(tau.shape, dtype=complex)
        for j in range(k + 1):
            m = k - j
            # d^m tau^{-p} = (-p)(-p-1)...(-p-m+1) tau^{-p-m}
            fall = 1.0
            for r in range(m):
                fall *= (-tau_power - r)
            acc += math.comb(k, j) * grid_vals[j] * fall * tau ** (-tau_power - m)
        out.append(np.abs(acc))
    return out


def _kept_pair(spectrum, spec, k):
    sig, coef = _kept_terms(spectrum, spec)
    return sig, [coef * (-1j * sig) ** k]


def _simpson_grid(a, b, n_intervals):
    n = n_intervals + (n_intervals % 2)
    return np.linspace(a, b, n + 1)


def sobolev_norm(spectrum, spec, ell, interval, grid_step, *, tau_power=0, subtract=None,
                 rtol=0.01, max_points=1 << 20, threads=1):
    """sum_{k <= ell} int_a^b |d^k/dtau^k (tau^{-tau_power} Q)| d tau.

    Q is the regularised trace described by ``spec`` (normally the
    inverse-tau weighted one).  Composite Simpson on a uniform grid whose
    step starts at ``grid_step`` and is halved until the norm changes by less
    than ``rtol`` relatively.
    """
    a, b = map(float, interval)
    if not a < b:
        raise DomainError("need a < b")
    if a <= 0 <= b:
        raise DomainError("the interval must not contain tau = 0")
    if ell < 0:
        raise DomainError("ell must be >= 0")
    n = max(2, int(math.ceil((b - a) / grid_step)))
    prev = None
    while True:
        tau = _simpson_grid(a, b, n)
        parts = _norm_integrand(spectrum, spec, ell, tau, tau_power, subtract, threads)
        val = float(sum(simpson(p, x=tau) for p in parts))
        if prev is not None and abs(val - prev) <= rtol * abs(val):
            return val
        if tau.size * 2 > max_points:
            raise AccuracyError("Simpson refinement reached the point cap",
                                abs(val - prev) / max(abs(val), 1e-300) if prev else np.inf, val)
        prev = val
        n *= 2


def sobolev_norm_table(spectrum, spec, ell, a, T_list, grid_step, *, tau_power=0,
                       subtract=None, rtol=0.01, max_points=1 << 20, threads=1):
    """Norms on [a, T] for every T in ``T_list``, sharing one refined grid.

    Returns ``(T_array, norms, final_step)``.
    """
    T = np.asarray(sorted(T_list), dtype=float)
    if a <= 0 or np.any(T <= a):
        raise DomainError("need 0 < a < every T")
    step = float(grid_step)
    prev = None
    while True:
        # align every T with the grid: (T - a) must be an even multiple of step
        idx = np.round((T - a) / step).astype(int)
        idx += idx % 2
        n = int(idx[-1])
        tau = a + step * np.arange(n + 1)
        parts = _norm_integrand(spectrum, spec, ell, tau, tau_power, subtract, threads)
        integrand = np.sum(parts, axis=0)
        norms = np.array([simpson(integrand[: i + 1], x=tau[: i + 1]) for i in idx])
        if prev is not None and np.all(np.abs(norms - prev) <= rtol * np.abs(norms)):
            return a + step * idx, norms, step
        if 2 * tau.size > max_points:
            raise AccuracyError("Simpson refinement reached the point cap",
                                float(np.max(np.abs(norms - prev) / np.abs(norms)))
                                if prev is not None else np.inf, norms)
        prev = norms
        step /= 2
