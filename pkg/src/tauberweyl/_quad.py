"""Small quadrature helpers: Gauss-Legendre panels, uniform doubling and local bisection."""
from functools import lru_cache

import numpy as np

from .errors import AccuracyError


@lru_cache(maxsize=32)
def gauss_legendre(n):
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def panel_rule(edges, n_nodes):
    """Flattened nodes/weights of Gauss-Legendre panels between consecutive edges."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(n_nodes)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def graded_edges(a, b, levels):
    """Edges on [a, b] refined geometrically towards the left endpoint ``a``."""
    if levels <= 0:
        return np.array([a, b], dtype=float)
    frac = 2.0 ** -np.arange(levels, 0, -1, dtype=float)
    return np.concatenate([[a], a + (b - a) * frac, [b]])


def adaptive_panels(f, a, b, *, n_nodes=64, panels=1, rtol=1e-12, atol=1e-15,
                    max_panels=1 << 14, grade_left=0, grade_right=0):
    """Integrate a vectorised ``f`` over [a, b] by doubling uniform panels.

    Panels adjacent to either endpoint may additionally be graded
    geometrically, which handles mild integrable endpoint singularities.
    Two successive values are accepted when they agree to ``rtol``
    relatively, to ``atol`` absolutely, or to the rounding floor set by the
    L1 mass of the integrand (relevant for strongly cancelling integrals).
    Returns ``(value, error_estimate)``; raises :class:`AccuracyError` if
    ``max_panels`` is reached before two successive values agree.
    """
    prev = None
    err = np.inf
    n = max(1, int(panels))
    while True:
        edges = np.linspace(a, b, n + 1)
        parts = [edges]
        if grade_left:
            parts.append(graded_edges(edges[0], edges[1], grade_left))
        if grade_right:
            width = edges[-1] - edges[-2]
            parts.append(edges[-1] - graded_edges(0.0, width, grade_right))
        all_edges = np.unique(np.concatenate(parts))
        x, w = panel_rule(all_edges, n_nodes)
        fx = f(x)
        val = np.sum(w * fx)
        # cancellation floor: rounding in an oscillatory sum scales with int |f|
        floor = 256 * np.finfo(float).eps * float(np.sum(np.abs(w * fx)))
        if prev is not None:
            err = abs(val - prev)
            if err <= max(rtol * abs(val), atol, floor):
                return val, err
        if not np.isfinite(val):
            raise AccuracyError("non-finite quadrature value", err, val)
        if n >= max_panels:
            raise AccuracyError(
                f"panel cap {max_panels} reached on [{a:g}, {b:g}]", err, val)
        prev = val
        n *= 2


@lru_cache(maxsize=8)
def gauss_lobatto(n):
    """Nodes and weights of the n-point Gauss-Lobatto rule on [-1, 1] (endpoints included)."""
    leg = np.polynomial.legendre.Legendre.basis(n - 1)
    x = np.concatenate([[-1.0], np.sort(leg.deriv().roots().real), [1.0]])
    w = 2.0 / (n * (n - 1) * leg(x) ** 2)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


# split point of the asymmetric comparison rule (relative to the panel)
_GOLDEN = 0.5 * (3.0 - 5.0 ** 0.5)


def _panel_estimates(f, lo, hi, n_nodes):
    """Per-panel value, error estimate and L1 mass.

    The value is the Gauss-Legendre rule on the two halves.  The error is its
    largest distance to three other rules: Gauss on the whole panel, Gauss
    on a split at the golden-section point, and Gauss-Lobatto on the whole
    panel.  The symmetric rules alone cannot see a jump sitting at the panel
    centre, and the Gauss rules alone cannot see one in the sliver between
    an endpoint and the first node.
    """
    x, w = gauss_legendre(n_nodes)
    xl, wl = gauss_lobatto(n_nodes)
    k = lo.size
    mid = 0.5 * (lo + hi)
    gold = lo + _GOLDEN * (hi - lo)
    los = np.concatenate([lo, lo, mid, lo, gold])
    his = np.concatenate([hi, mid, hi, gold, hi])
    half = 0.5 * (his - los)
    nodes = (0.5 * (los + his))[:, None] + half[:, None] * x[None, :]
    wts = half[:, None] * w[None, :]
    lob_nodes = mid[:, None] + half[:k, None] * xl[None, :]
    lob_wts = half[:k, None] * wl[None, :]
    fx = f(np.concatenate([nodes.ravel(), lob_nodes.ravel()]))
    fg = fx[: nodes.size].reshape(nodes.shape)
    fl = fx[nodes.size:].reshape(lob_nodes.shape)
    vals = np.sum(fg * wts, axis=1)
    mass = np.sum(np.abs(fg) * np.abs(wts), axis=1)
    whole = vals[:k]
    halves = vals[k:2 * k] + vals[2 * k:3 * k]
    golden = vals[3 * k:4 * k] + vals[4 * k:]
    lobatto = np.sum(fl * lob_wts, axis=1)
    err = np.max(np.abs([halves - whole, halves - golden, halves - lobatto]), axis=0)
    return halves, err, mass[k:2 * k] + mass[2 * k:3 * k]


def bisect_panels(f, a, b, *, n_nodes=32, panels=1, rtol=1e-12, atol=1e-15, max_panels=1 << 16):
    """Integrate a vectorised ``f`` over [a, b] with locally adaptive bisection.

    Each panel's error is estimated by comparing the rule on the panel with
    the rule on its two halves; panels whose error exceeds their share of
    the tolerance are bisected until the summed error estimate meets
    ``max(rtol * |value|, atol, rounding floor)``.  Unlike
    :func:`adaptive_panels` this copes with interior jumps and kinks.
    """
    lo = np.linspace(a, b, max(1, int(panels)) + 1)
    lo, hi = lo[:-1], lo[1:]
    est, err, mass = _panel_estimates(f, lo, hi, n_nodes)
    while True:
        val = np.sum(est)
        total_err = float(np.sum(err))
        if not np.isfinite(val):
            raise AccuracyError("non-finite quadrature value", total_err, val)
        floor = 256 * np.finfo(float).eps * float(np.sum(mass))
        tol = max(rtol * abs(val), atol, floor)
        if total_err <= tol:
            return val, total_err
        split = err > tol / err.size
        split[np.argmax(err)] = True
        if err.size + np.count_nonzero(split) > max_panels:
            raise AccuracyError(
                f"panel cap {max_panels} reached on [{a:g}, {b:g}]", total_err, val)
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        e2, r2, m2 = _panel_estimates(f, new_lo, new_hi, n_nodes)
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        est = np.concatenate([est[keep], e2])
        err = np.concatenate([err[keep], r2])
        mass = np.concatenate([mass[keep], m2])
