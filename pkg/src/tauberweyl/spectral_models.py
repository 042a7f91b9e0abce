"""Exact spectra, counting functions and length spectra of model manifolds.

Two families are supported: flat tori R^d / Lambda and unit round spheres S^d.

Frequency convention for tori: eigenfunctions are exp(i <xi, x>) with xi in
the dual lattice {xi : <xi, v> in 2 pi Z for all v in Lambda}, and the
frequency is sigma = |xi|.  For Lambda = 2 pi Z^d this gives sigma = |n| and
loop lengths 2 pi |n|; for Lambda = Z^d it gives sigma = 2 pi |n| and loop
lengths |n|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from .errors import DomainError, IncompleteSpectrumError, InvalidLatticeError

__all__ = [
    "Lattice",
    "Torus",
    "Sphere",
    "Spectrum",
    "LengthSpectrum",
    "enumerate_torus_spectrum",
    "enumerate_sphere_spectrum",
    "geodesic_length_spectrum",
    "counting_function",
    "unit_ball_volume",
]

#: relative tolerance used to merge frequencies when no exact integer
#: representation of the squared norms is available
GROUPING_RTOL = 1e-9


def unit_ball_volume(d):
    """Volume of the unit ball in R^d."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True, eq=False)
class Lattice:
    """Full-rank lattice in R^d given by column generators.

    Parameters
    ----------
    basis : array_like, shape (d, d)
        Columns are the generators of the lattice.
    """

    basis: np.ndarray
    dual: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.ndim == 0:
            b = b.reshape(1, 1)
        if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] == 0:
            raise InvalidLatticeError(f"basis must be a square matrix, got shape {b.shape}")
        if not np.all(np.isfinite(b)):
            raise InvalidLatticeError("basis has non-finite entries")
        scale = np.max(np.abs(b))
        det = np.linalg.det(b)
        if scale == 0 or abs(det) <= 1e-12 * scale ** b.shape[0]:
            raise InvalidLatticeError(f"singular lattice basis (det = {det:.3g})")
        b.flags.writeable = False
        dual = 2.0 * np.pi * np.linalg.inv(b).T
        dual.flags.writeable = False
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "dual", dual)

    @property
    def dimension(self):
        return self.basis.shape[0]

    @property
    def covolume(self):
        return abs(float(np.linalg.det(self.basis)))

    @classmethod
    def scaled_integer(cls, d, scale=1.0):
        """The lattice ``scale * Z^d``."""
        return cls(scale * np.eye(d))


@dataclass(frozen=True, eq=False)
class Torus:
    """Flat torus R^d / lattice."""

    lattice: Lattice

    @property
    def dimension(self):
        return self.lattice.dimension

    @property
    def volume(self):
        return self.lattice.covolume

    def describe(self):
        return {"variant": "torus", "basis": self.lattice.basis.tolist()}


@dataclass(frozen=True)
class Sphere:
    """Unit round sphere S^d."""

    dimension: int

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise DomainError(f"sphere dimension must be a positive integer, got {self.dimension}")

    @property
    def volume(self):
        d = self.dimension
        return 2.0 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)

    def describe(self):
        return {"variant": "sphere", "dimension": int(self.dimension)}


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Distinct frequencies with multiplicities, complete up to ``sigma_max``."""

    sigma: np.ndarray
    multiplicity: np.ndarray
    sigma_max: float
    label: str = ""
    _cumulative: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        m = np.asarray(self.multiplicity, dtype=np.int64)
        if s.shape != m.shape or s.ndim != 1:
            raise DomainError("sigma and multiplicity must be 1-d arrays of equal length")
        if s.size and (np.any(np.diff(s) <= 0) or s[0] < 0):
            raise DomainError("frequencies must be nonnegative and strictly increasing")
        if np.any(m <= 0):
            raise DomainError("multiplicities must be positive")
        s.flags.writeable = False
        m.flags.writeable = False
        cum = np.cumsum(m)
        cum.flags.writeable = False
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "multiplicity", m)
        object.__setattr__(self, "sigma_max", float(self.sigma_max))
        object.__setattr__(self, "_cumulative", cum)

    def __len__(self):
        return self.sigma.size

    @property
    def entries(self):
        """List of ``(sigma, multiplicity)`` pairs."""
        return [(float(s), int(m)) for s, m in zip(self.sigma, self.multiplicity)]

    @property
    def total(self):
        """Number of eigenvalues counted with multiplicity."""
        return int(self._cumulative[-1]) if self.sigma.size else 0

    def counts(self, sigma, side="right"):
        """Vectorised counting function.

        ``side="right"`` gives N(sigma) = #{sigma_n <= sigma} (right-continuous);
        ``side="left"`` gives the left limit #{sigma_n < sigma}.
        """
        sig = np.asarray(sigma, dtype=float)
        if np.any(sig > self.sigma_max * (1 + 1e-15)):
            raise IncompleteSpectrumError(
                f"sigma = {np.max(sig):g} exceeds the enumeration radius {self.sigma_max:g}")
        idx = np.searchsorted(self.sigma, sig, side=side)
        cum = np.concatenate([[0], self._cumulative])
        return cum[idx]

    def truncate_count(self, m):
        """Sigma values and (possibly partial) multiplicities of the first ``m`` eigenvalues."""
        if m < 1:
            raise DomainError("eigenvalue count must be >= 1")
        if m > self.total:
            raise IncompleteSpectrumError(
                f"requested {m} eigenvalues but only {self.total} are enumerated")
        k = int(np.searchsorted(self._cumulative, m, side="left"))
        mult = self.multiplicity[: k + 1].copy()
        mult[k] -= int(self._cumulative[k] - m)
        return self.sigma[: k + 1], mult

    def to_csv_rows(self):
        return [(float(s), int(m)) for s, m in zip(self.sigma, self.multiplicity)]


@dataclass(frozen=True, eq=False)
class LengthSpectrum:
    """Distinct positive loop lengths up to ``T_max``."""

    lengths: np.ndarray
    T_max: float

    def __post_init__(self):
        ell = np.asarray(self.lengths, dtype=float)
        if ell.size and (ell[0] <= 0 or np.any(np.diff(ell) <= 0)):
            raise DomainError("lengths must be positive and strictly increasing")
        ell.flags.writeable = False
        object.__setattr__(self, "lengths", ell)
        object.__setattr__(self, "T_max", float(self.T_max))

    def signed(self):
        """The symmetric set {+-lengths} together with 0, sorted."""
        return np.concatenate([-self.lengths[::-1], [0.0], self.lengths])

    def scaled(self, factor):
        return LengthSpectrum(self.lengths * factor, self.T_max * factor)


def _integer_box(rows_norms, radius):
    """Integer coefficient box that covers every vector of norm <= radius."""
    bounds = np.floor(rows_norms * radius * (1 + 1e-12) + 1e-12).astype(np.int64)
    axes = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _rational_gram(gram, max_den=10_000):
    """Return ``(unit, integer_matrix)`` with gram == unit * integer_matrix, or None."""
    ref = np.max(np.abs(gram))
    fracs = []
    for g in (gram / ref).ravel():
        f = Fraction(float(g)).limit_denominator(max_den)
        if abs(float(f) - g) > 1e-13:
            return None
        fracs.append(f)
    den = reduce(math.lcm, (f.denominator for f in fracs), 1)
    ints = np.array([int(f * den) for f in fracs], dtype=np.int64).reshape(gram.shape)
    return ref / den, ints


def _group_norms(vectors, gram, radius):
    """Distinct norms and multiplicities of ``vectors`` (integer coordinates)."""
    exact = _rational_gram(gram)
    if exact is not None:
        unit, g_int = exact
        q = np.einsum("ni,ij,nj->n", vectors, g_int, vectors)
        keys, mult = np.unique(q, return_counts=True)
        sig = np.sqrt(keys * unit)
    else:
        q = np.einsum("ni,ij,nj->n", vectors.astype(float), gram, vectors.astype(float))
        q = np.sort(np.maximum(q, 0.0))
        sig_all = np.sqrt(q)
        brk = np.flatnonzero(np.diff(sig_all) > GROUPING_RTOL * np.maximum(sig_all[1:], 1e-300))
        starts = np.concatenate([[0], brk + 1])
        mult = np.diff(np.concatenate([starts, [sig_all.size]]))
        sig = sig_all[starts]
    keep = sig <= radius * (1 + 1e-12)
    return sig[keep], mult[keep]


def enumerate_torus_spectrum(lattice, sigma_max):
    """All frequencies of R^d/lattice up to ``sigma_max``, with multiplicities.

    Dual vectors are xi = D n with D = 2 pi B^{-T}.  Since n = D^{-1} xi and
    D^{-1} = B^T / (2 pi), coefficient i is bounded by |column_i(B)| sigma_max / (2 pi),
    which gives an exact bounding box for the integer scan.
    """
    if isinstance(lattice, Torus):
        lattice = lattice.lattice
    if not sigma_max > 0:
        raise DomainError("sigma_max must be positive")
    col_norms = np.linalg.norm(lattice.basis, axis=0) / (2 * np.pi)
    n = _integer_box(col_norms, sigma_max)
    gram = lattice.dual.T @ lattice.dual
    sig, mult = _group_norms(n, gram, sigma_max)
    sig[0] = 0.0
    return Spectrum(sig, mult, sigma_max, label=f"torus{lattice.dimension}")


def sphere_multiplicity(k, d):
    """Dimension of degree-k spherical harmonics on S^d."""
    top = math.comb(k + d, d)
    low = math.comb(k + d - 2, d) if k >= 2 else 0
    return top - low


def enumerate_sphere_spectrum(d, sigma_max):
    """Frequencies sqrt(k(k+d-1)) of the unit sphere S^d up to ``sigma_max``."""
    if int(d) != d or d < 1:
        raise DomainError(f"sphere dimension must be a positive integer, got {d}")
    if not sigma_max > 0:
        raise DomainError("sigma_max must be positive")
    d = int(d)
    lam_max = sigma_max * sigma_max
    k_max = int((-(d - 1) + math.sqrt((d - 1) ** 2 + 4 * lam_max)) / 2) + 2
    ks = [k for k in range(k_max + 1) if k * (k + d - 1) <= lam_max * (1 + 1e-15)]
    sig = np.sqrt(np.array([k * (k + d - 1) for k in ks], dtype=float))
    mult = np.array([sphere_multiplicity(k, d) for k in ks], dtype=np.int64)
    return Spectrum(sig, mult, sigma_max, label=f"sphere{d}")


def geodesic_length_spectrum(m, T_max):
    """Distinct positive lengths of closed geodesic loops up to ``T_max``."""
    if not T_max > 0:
        raise DomainError("T_max must be positive")
    if isinstance(m, Lattice):
        m = Torus(m)
    if isinstance(m, Sphere):
        laps = np.arange(1, int(T_max / (2 * np.pi)) + 1)
        return LengthSpectrum(2 * np.pi * laps, T_max)
    basis = m.lattice.basis
    row_norms = np.linalg.norm(np.linalg.inv(basis), axis=1)
    n = _integer_box(row_norms, T_max)
    n = n[np.any(n != 0, axis=1)]
    if n.size == 0:
        return LengthSpectrum(np.empty(0), T_max)
    gram = basis.T @ basis
    ell, _ = _group_norms(n, gram, T_max)
    return LengthSpectrum(ell, T_max)


def counting_function(s, sigma):
    """N_{1/2}(sigma): number of frequencies <= sigma, counted with multiplicity."""
    out = s.counts(sigma)
    return int(out) if np.ndim(out) == 0 else out
