"""Fourier-Laplace transforms of causal functions and their boundary values.

The transform of a causal function alpha is

    A(t) = int_0^inf alpha(sigma) exp(-sigma t) d sigma,   Re t > 0,

and the Fourier transform F alpha(tau) = int alpha(sigma) exp(-i sigma tau) d sigma
is its boundary value A(0+ + i tau).

Functions built from exponential-polynomial pieces
``P(sigma - lo) exp(-rate sigma)`` on ``[lo, hi)`` are integrated in closed
form.  Pieces may carry a smooth weight (for example <sigma>^{-J}), in
which case each piece is integrated by Gauss-Legendre panels.  Arbitrary
callables are integrated by adaptive quadrature with a truncation radius
chosen from the growth bound |alpha| <= budget <sigma>^K.
"""
from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from ._quad import bisect_panels, gauss_legendre
from .errors import AccuracyError, DomainError

__all__ = [
    "CausalFunction",
    "BoundaryValue",
    "fl_transform",
    "partial_fl",
    "boundary_value",
    "axis_value",
    "axis_quotient",
    "axis_quotients",
    "QuotientDerivatives",
    "tail_bound",
    "japanese_bracket",
]

# entries of (t, piece) arrays processed per block in the closed-form path
_BLOCK = 1 << 21
# Gauss-Legendre nodes per panel for weighted pieces
_WEIGHT_NODES = 16
# Taylor terms for difference quotients near tau = 0 (|tau| * scale < 1/2)
_QUOTIENT_TERMS = 60


def japanese_bracket(sigma):
    """<sigma> = (1 + sigma^2)^(1/2)."""
    return np.sqrt(1.0 + np.square(sigma))


def _taylor_shift(q, delta):
    """Coefficients of P(u + delta) given ascending coefficients ``q`` of P(u).

    ``q`` has shape (n, p+1) and ``delta`` shape (n,).
    """
    q = np.asarray(q, dtype=complex)
    p = q.shape[1] - 1
    out = np.zeros_like(q)
    delta = np.asarray(delta, dtype=float)
    for i in range(p + 1):
        for j in range(i + 1):
            out[:, j] += q[:, i] * math.comb(i, j) * delta ** (i - j)
    return out


def _scaled_moments(s, L, X, jmax):
    """exp(X) * int_0^L u^j exp(-s u) du for j = 0..jmax.

    ``s``, ``L``, ``X`` broadcast to a common shape.  ``L`` may be ``inf``
    (then Re s > 0 is required).  Small |s L| uses the power series, large
    |s L| the closed form j!/s^{j+1} (1 - exp(-sL) sum_{i<=j} (sL)^i / i!).
    """
    s, L, X = np.broadcast_arrays(np.asarray(s, complex), np.asarray(L, float),
                                  np.asarray(X, complex))
    shape = s.shape
    out = np.empty((jmax + 1,) + shape, dtype=complex)
    finite = np.isfinite(L)
    Lf = np.where(finite, L, 0.0)
    z = s * Lf
    absz = np.abs(z)
    eX = np.exp(X)
    with np.errstate(over="ignore", invalid="ignore"):
        tail_exp = np.where(finite, np.exp(X - z), 0.0)
    n_terms = 44 + 2 * jmax
    for j in range(jmax + 1):
        series = finite & (absz < j + 2)
        closed = ~series
        res = np.empty(shape, dtype=complex)
        if np.any(closed):
            sc = s[closed]
            zc = z[closed]
            partial = np.zeros_like(zc)
            term = np.ones_like(zc)
            for i in range(j + 1):
                if i:
                    term = term * zc / i
                partial = partial + term
            res[closed] = math.factorial(j) / sc ** (j + 1) * (eX[closed] - tail_exp[closed] * partial)
        if np.any(series):
            zs = z[series]
            acc = np.zeros_like(zs)
            term = np.ones_like(zs)
            for n in range(n_terms):
                if n:
                    term = term * (-zs) / n
                acc = acc + term / (n + j + 1)
            res[series] = eX[series] * Lf[series] ** (j + 1) * acc
        out[j] = res
    return out


@dataclass(frozen=True, eq=False)
class CausalFunction:
    """A function of sigma >= 0 (zero for sigma < 0).

    Structured form: pieces ``[lo_i, hi_i)`` on which the function equals
    ``weight(sigma) * sum_j coeffs[i, j] (sigma - lo_i)^j * exp(-rate_i sigma)``.
    Pieces are summed where they overlap.  Black-box form: ``func``.

    Attributes
    ----------
    growth : float
        K in the bound |f(sigma)| <= budget <sigma>^K.
    budget : float or None
        The witness norm; estimated by sampling when omitted for structured input.
    """

    lo: np.ndarray = field(default_factory=lambda: np.empty(0))
    hi: np.ndarray = field(default_factory=lambda: np.empty(0))
    coeffs: np.ndarray = field(default_factory=lambda: np.zeros((0, 1), complex))
    rate: np.ndarray = field(default_factory=lambda: np.empty(0, complex))
    weight: object = None
    func: object = None
    growth: float = 0.0
    budget: float | None = None
    label: str = ""

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        q = np.asarray(self.coeffs, dtype=complex)
        if q.ndim == 1:
            q = q.reshape(lo.size, -1) if lo.size else q.reshape(0, max(q.size, 1))
        rate = np.broadcast_to(np.asarray(self.rate, dtype=complex), lo.shape).copy()
        if lo.shape != hi.shape or q.shape[0] != lo.size:
            raise DomainError("inconsistent piece arrays")
        if np.any(lo < 0) or np.any(hi <= lo):
            raise DomainError("pieces need 0 <= lo < hi")
        if self.growth < 0:
            raise DomainError("growth class K must be >= 0")
        if self.budget is not None and not self.budget > 0:
            raise DomainError("budget must be positive")
        order = np.argsort(lo, kind="stable")
        for name, arr in (("lo", lo[order]), ("hi", hi[order]), ("coeffs", q[order]),
                          ("rate", rate[order])):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    # ------------------------------------------------------------------ builders
    @classmethod
    def exp_poly(cls, coeffs, rate=0.0, lo=0.0, hi=np.inf, **kw):
        """``sum_j coeffs[j] sigma^j exp(-rate sigma)`` on [lo, hi)."""
        q = np.asarray(coeffs, dtype=complex).reshape(1, -1)
        q = _taylor_shift(q, np.array([lo]))
        return cls(np.array([lo]), np.array([hi]), q, np.array([rate]), **kw)

    @classmethod
    def piecewise(cls, edges, local_coeffs, rate=0.0, **kw):
        """Pieces between consecutive ``edges`` with coefficients in (sigma - lo)."""
        edges = np.asarray(edges, dtype=float)
        q = np.asarray(local_coeffs, dtype=complex)
        if q.ndim == 1:
            q = q[:, None]
        return cls(edges[:-1], edges[1:], q, rate, **kw)

    @classmethod
    def step(cls, jumps, heights, **kw):
        """``sum_i heights[i] Theta(sigma - jumps[i])``."""
        jumps = np.asarray(jumps, dtype=float)
        order = np.argsort(jumps)
        jumps = jumps[order]
        levels = np.cumsum(np.asarray(heights, dtype=complex)[order])
        edges = np.concatenate([jumps, [np.inf]])
        return cls.piecewise(edges, levels, **kw)

    @classmethod
    def indicator(cls, a, b, **kw):
        return cls(np.array([a]), np.array([b]), np.ones((1, 1)), 0.0, **kw)

    @classmethod
    def from_callable(cls, func, growth, budget, label=""):
        """Black-box causal function with |func(sigma)| <= budget <sigma>^growth."""
        if budget is None:
            raise DomainError("a black-box function needs an explicit budget")
        return cls(func=func, growth=float(growth), budget=float(budget), label=label)

    @classmethod
    def zero(cls):
        return cls()

    # ------------------------------------------------------------------ structure
    @property
    def structured(self):
        return self.func is None

    @property
    def degree(self):
        return self.coeffs.shape[1] - 1

    @property
    def axis_convergent(self):
        """Whether int f e^{-i sigma tau} converges absolutely (exact boundary values)."""
        if not self.structured:
            return False
        inf = ~np.isfinite(self.hi)
        nonzero = np.any(self.coeffs != 0, axis=1)
        return bool(np.all(self.rate.real[inf & nonzero] > 0))

    @property
    def sigma_scale(self):
        """Rough length scale of the support, used to pick expansions near tau = 0."""
        if not self.structured or self.lo.size == 0:
            return 1.0
        fin = np.isfinite(self.hi)
        scale = np.max(self.hi[fin]) if np.any(fin) else 0.0
        inf = ~fin
        if np.any(inf):
            re = np.maximum(self.rate.real[inf], 1e-300)
            scale = max(scale, float(np.max(self.lo[inf] + (self.degree + 1) / re)))
        return max(scale, 1e-12)

    def _replace(self, **kw):
        base = dict(lo=self.lo, hi=self.hi, coeffs=self.coeffs, rate=self.rate,
                    weight=self.weight, func=self.func, growth=self.growth,
                    budget=self.budget, label=self.label)
        base.update(kw)
        return CausalFunction(**base)

    def scaled(self, factor):
        if self.structured:
            b = None if self.budget is None else self.budget * abs(factor)
            return self._replace(coeffs=self.coeffs * factor, budget=b or None)
        f = self.func
        return self._replace(func=lambda s: factor * f(s), budget=self.budget * max(abs(factor), 1e-300))

    def times_monomial(self, k, factor=1.0):
        """The function ``factor * sigma^k * f(sigma)``."""
        if k == 0 and factor == 1.0:
            return self
        if not self.structured:
            f = self.func
            return self._replace(func=lambda s: factor * np.power(s, k) * f(s),
                                 growth=self.growth + k, budget=self.budget * abs(factor))
        # sigma^k = (lo + u)^k expanded in u, then multiplied into each piece
        n, p1 = self.coeffs.shape
        mono = np.zeros((n, k + 1), dtype=complex)
        for i in range(k + 1):
            mono[:, i] = math.comb(k, i) * self.lo ** (k - i)
        out = np.zeros((n, p1 + k), dtype=complex)
        for a in range(p1):
            out[:, a:a + k + 1] += self.coeffs[:, a:a + 1] * mono
        return self._replace(coeffs=out * factor, growth=self.growth + k, budget=None)

    def with_weight(self, weight, growth_shift=0.0):
        """Multiply every structured piece by the smooth function ``weight``."""
        if not self.structured:
            f = self.func
            return self._replace(func=lambda s: weight(s) * f(s),
                                 growth=max(self.growth + growth_shift, 0.0))
        if self.weight is not None:
            w0 = self.weight
            combined = lambda s: w0(s) * weight(s)  # noqa: E731
        else:
            combined = weight
        return self._replace(weight=combined, growth=max(self.growth + growth_shift, 0.0),
                             budget=None)

    def __add__(self, other):
        if not isinstance(other, CausalFunction):
            return NotImplemented
        if not (self.structured and other.structured) or self.weight is not other.weight:
            f, g = self, other
            return CausalFunction.from_callable(lambda s: f(s) + g(s),
                                                max(f.growth, g.growth),
                                                f.effective_budget() + g.effective_budget())
        p = max(self.degree, other.degree) + 1
        q = np.zeros((self.lo.size + other.lo.size, p), dtype=complex)
        q[: self.lo.size, : self.degree + 1] = self.coeffs
        q[self.lo.size:, : other.degree + 1] = other.coeffs
        return CausalFunction(np.concatenate([self.lo, other.lo]),
                              np.concatenate([self.hi, other.hi]), q,
                              np.concatenate([self.rate, other.rate]), weight=self.weight,
                              growth=max(self.growth, other.growth))

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        return self + (-other)

    # ------------------------------------------------------------------ evaluation
    def __call__(self, sigma):
        sig = np.asarray(sigma, dtype=float)
        if not self.structured:
            out = np.where(sig >= 0, self.func(np.maximum(sig, 0.0)), 0.0)
            return out
        flat = sig.ravel()
        total = np.zeros(flat.shape, dtype=complex)
        # pieces are sorted by lo; walk them in blocks so memory stays bounded
        block = max(1, _BLOCK // max(flat.size, 1))
        for start in range(0, self.lo.size, block):
            sl = slice(start, start + block)
            lo, hi = self.lo[sl, None], self.hi[sl, None]
            u = flat[None, :] - lo
            inside = (u >= 0) & (flat[None, :] < hi)
            uu = np.where(inside, u, 0.0)
            poly = np.zeros(uu.shape, dtype=complex)
            for j in range(self.degree, -1, -1):
                poly = poly * uu + self.coeffs[sl, j:j + 1]
            with np.errstate(over="ignore", invalid="ignore"):
                ex = np.exp(-self.rate[sl, None] * np.where(inside, flat[None, :], 0.0))
            total += np.sum(np.where(inside, poly * ex, 0.0), axis=0)
        if self.weight is not None:
            total = total * self.weight(np.maximum(flat, 0.0))
        total = total.reshape(sig.shape)
        if np.all(np.imag(total) == 0):
            return total.real
        return total

    def effective_budget(self, sigma_max=None, samples=4001):
        """The supplied budget, or a sampled estimate of sup |f| / <sigma>^K."""
        if self.budget is not None:
            return float(self.budget)
        if sigma_max is None:
            sigma_max = min(self.sigma_scale * 4, 1e6) if self.structured else 100.0
        grid = np.linspace(0.0, sigma_max, samples)
        if self.structured:
            grid = np.unique(np.concatenate([grid, self.lo[self.lo <= sigma_max]]))
        ratio = np.abs(self(grid)) / japanese_bracket(grid) ** self.growth
        return float(max(np.max(ratio), 1e-300))

    # ------------------------------------------------------------------ integrals
    def _clipped(self, a, b):
        lo = np.maximum(self.lo, a)
        hi = np.minimum(self.hi, b)
        keep = (hi > lo) & np.any(self.coeffs != 0, axis=1)
        q = self.coeffs[keep]
        shift = (lo - self.lo)[keep]
        if np.any(shift > 0):
            q = _taylor_shift(q, shift)
        return lo[keep], hi[keep], q, self.rate[keep]

    def integrate(self, t, a=0.0, b=np.inf, shift=0.0):
        """``exp(t*shift) * int_a^b f(sigma) exp(-sigma t) d sigma`` for an array of t.

        The ``shift`` factor is folded into the exponent so that partial
        transforms can be evaluated far into the left half-plane without
        overflow.  Only the structured form is supported here.
        """
        if not self.structured:
            raise DomainError("closed-form integration needs a structured function")
        t = np.atleast_1d(np.asarray(t, dtype=complex))
        lo, hi, q, rate = self._clipped(a, b)
        if lo.size == 0:
            return np.zeros(t.shape, dtype=complex)
        inf = ~np.isfinite(hi)
        if np.any(inf):
            nz = np.any(q[inf] != 0, axis=1)
            re = (rate[inf][:, None] + t[None, :]).real[nz]
            if re.size and np.any(re <= 0):
                raise DomainError("transform diverges: Re(rate + t) <= 0 on an unbounded piece")
        if self.weight is None:
            return self._closed_form(t, lo, hi, q, rate, shift)
        return self._weighted_quadrature(t, lo, hi, q, rate, shift)

    def _closed_form(self, t, lo, hi, q, rate, shift):
        deg = q.shape[1] - 1
        out = np.empty(t.shape, dtype=complex)
        rows = max(1, _BLOCK // max(lo.size * (deg + 1), 1))
        for start in range(0, t.size, rows):
            tt = t[start:start + rows, None]
            s = rate[None, :] + tt
            X = -s * lo[None, :] + tt * shift
            mom = _scaled_moments(s, (hi - lo)[None, :], X, deg)
            out[start:start + rows] = np.einsum("jmn,nj->m", mom, q)
        return out

    def _weighted_nodes(self, t, lo, hi, q, rate):
        """Gauss-Legendre nodes for weighted pieces: (sigma, weight * P, piece rate)."""
        s_abs = float(np.max(np.abs(rate[:, None] + t[None, :])))
        hi = hi.copy()
        inf = ~np.isfinite(hi)
        if np.any(inf):
            re = float(np.min((rate[inf][:, None] + t[None, :]).real))
            deg = q.shape[1] - 1
            hi[inf] = lo[inf] + (60.0 + 10.0 * (deg + self.growth)) / re
        length = hi - lo
        h = np.minimum(0.5 * np.maximum(1.0, lo), 2.0 / max(s_abs, 1e-300))
        panels = np.maximum(1, np.ceil(length / h).astype(np.int64))
        x, w = gauss_legendre(_WEIGHT_NODES)
        piece = np.repeat(np.arange(lo.size), panels)
        first = np.concatenate([[0], np.cumsum(panels)[:-1]])
        k = np.arange(piece.size) - np.repeat(first, panels)
        hp = (length / panels)[piece]
        left = lo[piece] + k * hp
        sig = (left[:, None] + 0.5 * hp[:, None] * (x[None, :] + 1.0)).ravel()
        wq = (0.5 * hp[:, None] * w[None, :]).ravel()
        pid = np.repeat(piece, _WEIGHT_NODES)
        u = sig - lo[pid]
        poly = np.zeros(sig.shape, dtype=complex)
        for j in range(q.shape[1] - 1, -1, -1):
            poly = poly * u + q[pid, j]
        return sig, wq * poly * self.weight(sig), rate[pid]

    @staticmethod
    def _node_sums(t, sig, bases, r, shift=0.0):
        """sum over nodes of base_k * exp(-(r + t) sig + t shift) for each base, per t."""
        out = np.empty((len(bases), t.size), dtype=complex)
        rows = max(1, _BLOCK // max(sig.size, 1))
        for start in range(0, t.size, rows):
            tt = t[start:start + rows, None]
            ex = np.exp(-(r[None, :] + tt) * sig[None, :] + tt * shift)
            for k, base in enumerate(bases):
                out[k, start:start + rows] = np.sum(base[None, :] * ex, axis=1)
        return out

    def _weighted_quadrature(self, t, lo, hi, q, rate, shift):
        sig, base, r = self._weighted_nodes(t, lo, hi, q, rate)
        return self._node_sums(t, sig, [base], r, shift)[0]

    def axis_values(self, tau, orders):
        """Rows c^{(k)}(tau) = F[(-i sigma)^k f](tau) for each k in ``orders``."""
        if not self.axis_convergent:
            raise DomainError(
                "exact axis values need a structured function decaying on unbounded pieces")
        tau = np.atleast_1d(np.asarray(tau, dtype=float)).ravel()
        t = 1j * tau
        if self.weight is None:
            rows = [(self.times_monomial(k, (-1j) ** k) if k else self).integrate(t)
                    for k in orders]
            return np.array(rows).reshape(len(orders), tau.size)
        lo, hi, q, rate = self._clipped(0.0, np.inf)
        if lo.size == 0:
            return np.zeros((len(orders), tau.size), dtype=complex)
        sig, base, r = self._weighted_nodes(t, lo, hi, q, rate)
        return self._node_sums(t, sig, [base * (-1j * sig) ** k for k in orders], r)


def tail_bound(f, R, x):
    """Rigorous bound for |int_R^inf f e^{-sigma t}| when Re t = x > 0 and R >= 1.

    Uses <sigma> <= sqrt(2) sigma for sigma >= 1, so the tail is at most
    budget 2^{K/2} Gamma(K+1, R x) / x^{K+1}.
    """
    K = float(f.growth)
    budget = f.effective_budget()
    R = max(float(R), 1.0)
    upper = special.gammaincc(K + 1.0, R * x) * special.gamma(K + 1.0)
    return budget * 2.0 ** (K / 2) * upper / x ** (K + 1.0)


def _blackbox_integral(f, t, a, b, tol):
    t = complex(t)
    span = b - a
    panels = max(1, int(math.ceil(span * max(abs(t.imag), abs(t.real), 1.0) / 4.0)))
    integrand = lambda s: f.func(s) * np.exp(-s * t)  # noqa: E731
    val, _ = bisect_panels(integrand, a, b, n_nodes=32, panels=panels,
                           rtol=tol, atol=tol * 1e-3, max_panels=max(1 << 16, 4 * panels))
    return val


def fl_transform(f, t, tol=1e-12):
    """A(t) = int_0^inf f(sigma) exp(-sigma t) d sigma for Re t > 0.

    Structured input is integrated in closed form.  Black-box input is
    truncated at the smallest dyadic radius R whose rigorous tail bound is
    below ``tol`` times the current estimate.
    """
    t_arr = np.asarray(t, dtype=complex)
    if np.any(t_arr.real <= 0):
        raise DomainError("fl_transform needs Re t > 0")
    if f.structured:
        out = f.integrate(t_arr.ravel())
        return complex(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)
    if t_arr.ndim:
        return np.array([fl_transform(f, tt, tol) for tt in t_arr.ravel()]).reshape(t_arr.shape)
    t = complex(t_arr)
    x = t.real
    R = max(1.0, 4.0 / x)
    est = _blackbox_integral(f, t, 0.0, R, tol)
    while True:
        bound = tail_bound(f, R, x)
        if bound < tol * max(abs(est), 1e-300) or bound < 1e-300:
            return complex(est)
        if R > 1e7:
            raise AccuracyError("truncation radius exceeded 1e7", bound, est)
        est = est + _blackbox_integral(f, t, R, 2 * R, tol)
        R *= 2


def partial_fl(f, Sigma, t, tol=1e-12):
    """A_Sigma(t) = int_0^Sigma f(sigma) exp(-sigma t) d sigma (entire in t)."""
    if Sigma < 0:
        raise DomainError("Sigma must be >= 0")
    t_arr = np.asarray(t, dtype=complex)
    if f.structured:
        out = f.integrate(t_arr.ravel(), 0.0, float(Sigma))
        return complex(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)
    if Sigma == 0:
        return 0j if t_arr.ndim == 0 else np.zeros(t_arr.shape, complex)
    vals = [_blackbox_integral(f, tt, 0.0, float(Sigma), tol) for tt in t_arr.ravel()]
    return complex(vals[0]) if t_arr.ndim == 0 else np.array(vals).reshape(t_arr.shape)


@dataclass(frozen=True)
class BoundaryValue:
    """Result of a boundary-value limit eps -> 0+ of A(eps + i tau)."""

    value: complex | None
    converged: bool
    order: float
    method: str
    eps: tuple = ()
    samples: tuple = ()
    message: str = ""


def _neville_at_zero(x, y):
    """Value at 0 of the interpolating polynomial through (x, y)."""
    p = list(y)
    n = len(x)
    for k in range(1, n):
        for i in range(n - k):
            p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i])
    return p[0]


DEFAULT_EPS = tuple(0.05 * 0.5 ** k for k in range(8))


def boundary_value(f, tau, eps_list=DEFAULT_EPS, exact_if_available=True):
    """Boundary value lim_{eps -> 0+} A(eps + i tau) with convergence diagnostics.

    If the structured transform converges absolutely on the axis the value
    is returned directly.  Otherwise A is evaluated along ``eps_list`` and
    the samples are extrapolated to eps = 0 by repeated Richardson steps
    (Neville's table); the observed order is measured from the last three
    samples.  A sequence whose successive differences do not shrink is
    reported as non-convergent with ``value=None``.
    """
    tau = float(tau)
    if exact_if_available and f.axis_convergent:
        val = complex(f.integrate(np.array([1j * tau]))[0])
        return BoundaryValue(val, True, math.inf, "exact")
    eps = np.asarray(eps_list, dtype=float)
    if eps.size == 0 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise DomainError("eps_list must be nonempty, positive and strictly decreasing")
    samples = np.array([fl_transform(f, e + 1j * tau) for e in eps])
    eps_t = tuple(float(e) for e in eps)
    smp_t = tuple(complex(v) for v in samples)
    if eps.size < 3:
        return BoundaryValue(complex(samples[-1]), False, math.nan, "raw",
                             eps_t, smp_t, "fewer than three samples")
    d1 = abs(samples[-2] - samples[-3])
    d2 = abs(samples[-1] - samples[-2])
    scale = max(abs(samples[-1]), 1e-300)
    if d2 <= 1e-15 * scale:
        order = math.inf
    elif d1 == 0:
        order = -math.inf
    else:
        order = math.log(d1 / d2) / math.log((eps[-3] - eps[-2]) / (eps[-2] - eps[-1]))
    if not order > 0.5:
        return BoundaryValue(None, False, order, "extrapolate", eps_t, smp_t,
                             f"successive differences do not shrink (observed order {order:.3g})")
    val = _neville_at_zero(eps, samples)
    return BoundaryValue(complex(val), True, order, "extrapolate", eps_t, smp_t)


def axis_value(f, tau, order=0):
    """c^{(order)}(tau) for c = F f, via the transform of (-i sigma)^order f."""
    tau = np.asarray(tau, dtype=float)
    return f.axis_values(tau.ravel(), [order])[0].reshape(tau.shape)


_MOMENTS = weakref.WeakKeyDictionary()


def _axis_moments(f, top):
    """c^{(n)}(0) = int (-i sigma)^n f for n = 0..top, cached per function."""
    cached = _MOMENTS.get(f)
    if cached is None or cached.size <= top:
        cached = f.axis_values(np.array([0.0]), list(range(top + 1)))[:, 0]
        _MOMENTS[f] = cached
    return cached


def axis_quotients(f, tau, N, c0=None):
    """Derivatives of order 0..N of Q(tau) = (c(tau) - c(0)) / tau with c = F f.

    Near the origin the Taylor series of Q, built from the moments
    c^{(n)}(0) = int (-i sigma)^n f, is used, which is free of cancellation;
    elsewhere the Leibniz rule is applied.  Returns an array of shape
    (N + 1, len(tau)).
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float)).ravel()
    if c0 is None:
        c0 = complex(axis_value(f, np.array([0.0]))[0])
    out = np.empty((N + 1, tau.size), dtype=complex)
    small = np.abs(tau) * f.sigma_scale < 0.5
    if np.any(small):
        # Q(tau) = sum_n c^{(n+1)}(0) tau^n / (n+1)!, and |tau| sigma_scale < 1/2 makes
        # the terms decay at least like 2^-n; the moments c^{(n)}(0) are computed once
        n_terms = _QUOTIENT_TERMS + N
        mom = _axis_moments(f, n_terms + 1)
        ts = tau[small]
        for k in range(N + 1):
            acc = np.zeros(ts.shape, dtype=complex)
            for n in range(n_terms, k - 1, -1):
                coef = mom[n + 1] * math.factorial(n) / (math.factorial(n - k) * math.factorial(n + 1))
                acc = acc * ts + coef
            out[k, small] = acc
    big = ~small
    if np.any(big):
        tb = tau[big]
        c = f.axis_values(tb, list(range(N + 1)))
        c[0] = c[0] - c0
        for k in range(N + 1):
            acc = np.zeros(tb.shape, dtype=complex)
            for i in range(k + 1):
                m = k - i
                inv = (-1) ** m * math.factorial(m) * tb ** (-1.0 - m)
                acc += math.comb(k, i) * c[i] * inv
            out[k, big] = acc
    return out


def axis_quotient(f, tau, order=0, c0=None):
    """The ``order``-th derivative of Q(tau) = (c(tau) - c(0)) / tau; see :func:`axis_quotients`."""
    tau = np.asarray(tau, dtype=float)
    return axis_quotients(f, tau, order, c0)[order].reshape(tau.shape)


class QuotientDerivatives:
    """Callables for Q, Q', ..., Q^{(N)} that share one evaluation per tau array."""

    def __init__(self, f, N, c0=None):
        self.f = f
        self.N = int(N)
        self.c0 = complex(axis_value(f, np.array([0.0]))[0]) if c0 is None else complex(c0)
        self._key = None
        self._vals = None

    def _all(self, tau):
        tau = np.asarray(tau, dtype=float)
        key = (tau.shape, tau.tobytes())
        if key != self._key:
            self._vals = axis_quotients(self.f, tau.ravel(), self.N, self.c0)
            self._key = key
        return self._vals

    def __getitem__(self, k):
        if not 0 <= k <= self.N:
            raise IndexError(k)
        return lambda tau: self._all(tau)[k].reshape(np.shape(tau))

    def __len__(self):
        return self.N + 1

    def as_list(self):
        return [self[k] for k in range(self.N + 1)]
