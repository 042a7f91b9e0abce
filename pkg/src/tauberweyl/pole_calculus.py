"""Dictionary between principal parts at the origin and polynomial ansaetze.

The Fourier transform (convention F u(tau) = int u(sigma) e^{-i sigma tau} d sigma)
of Theta(sigma) Z(sigma) with Z(sigma) = sum_j b_j sigma^j is

    sum_j a_{j+1} (tau - i0)^{-(j+1)},   a_{j+1} = j! b_j i^{-(j+1)},

equivalently b_j = i^{j+1} a_{j+1} / j!.  For example F Theta = -i (tau - i0)^{-1}.
Integer orders are handled in exact Gaussian-rational arithmetic; fractional
orders only enter through :func:`asymptotic_contribution`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Number

import numpy as np
from scipy import integrate

from .errors import DomainError

__all__ = [
    "GaussianRational",
    "PoleExpansion",
    "Bump",
    "PolynomialAnsatz",
    "poles_to_polynomial",
    "polynomial_to_poles",
    "asymptotic_contribution",
    "bump_profile_integral",
    "solve_bump_amplitude",
]


def _to_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x))


class GaussianRational:
    """Exact complex number p + i q with rational p, q."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _to_fraction(re)
        self.im = _to_fraction(im)

    @classmethod
    def coerce(cls, x):
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (complex, np.complexfloating)):
            return cls(x.real, x.imag)
        if isinstance(x, Number):
            return cls(x, 0)
        raise TypeError(f"cannot convert {type(x).__name__} to GaussianRational")

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussianRational.coerce(other))

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * GaussianRational(o.re, -o.im)
        return GaussianRational(num.re / den, num.im / den)

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def to_json(self):
        return [str(self.re), str(self.im)]


_I_POWERS = (GaussianRational(1, 0), GaussianRational(0, 1),
             GaussianRational(-1, 0), GaussianRational(0, -1))


def _i_pow(n):
    """i^n for any integer n, exactly."""
    return _I_POWERS[n % 4]


def _order_key(j):
    """Canonical order: Fraction for rationals, float otherwise."""
    if isinstance(j, Fraction):
        return j
    if isinstance(j, (int, np.integer)):
        return Fraction(int(j))
    jf = float(j)
    if jf.is_integer():
        return Fraction(int(jf))
    return jf


@dataclass(frozen=True)
class PoleExpansion:
    """Principal part sum_j a_j (tau - i0)^{-j} plus a constant a00.

    ``terms`` maps positive orders j to coefficients.  Integer orders are
    stored as :class:`fractions.Fraction` keys, fractional ones as given.
    """

    terms: dict = field(default_factory=dict)
    a00: complex = 0j

    def __post_init__(self):
        clean = {}
        for j, a in dict(self.terms).items():
            key = _order_key(j)
            if not float(key) > 0:
                raise DomainError(f"pole orders must be positive, got {j}")
            clean[key] = a
        object.__setattr__(self, "terms", clean)

    @property
    def integer_orders(self):
        return all(isinstance(j, Fraction) and j.denominator == 1 for j in self.terms)

    def to_json(self):
        out = {}
        for j, a in sorted(self.terms.items(), key=lambda kv: float(kv[0])):
            key = str(j) if isinstance(j, Fraction) else repr(float(j))
            c = complex(a)
            out[key] = [c.real, c.imag]
        return {"terms": out, "a00": [complex(self.a00).real, complex(self.a00).imag]}


def _bump_shape(x):
    """exp(-1/(1-x^2)) on (-1, 1), zero elsewhere."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1
    out = np.zeros_like(x)
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (1.0 - xi * xi))
    return out


@lru_cache(maxsize=1)
def bump_profile_integral():
    """int_{-1}^{1} exp(-1/(1-x^2)) dx, computed once by adaptive quadrature."""
    val, _ = integrate.quad(lambda x: float(_bump_shape(x)), -1.0, 1.0,
                            epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


@dataclass(frozen=True)
class Bump:
    """``amplitude`` times a unit-integral mollifier supported on (center -+ width/2)."""

    center: float = 1.5
    width: float = 1.0
    amplitude: complex = 0.0

    def __post_init__(self):
        if not self.width > 0:
            raise DomainError("bump width must be positive")
        if self.center - self.width / 2 <= 0:
            raise DomainError("bump support must lie in (0, inf)")

    @property
    def support(self):
        return (self.center - self.width / 2, self.center + self.width / 2)

    def unit(self, sigma):
        half = self.width / 2
        return _bump_shape((np.asarray(sigma, dtype=float) - self.center) / half) / (
            bump_profile_integral() * half)

    def __call__(self, sigma):
        return self.amplitude * self.unit(sigma)

    def weighted_integral(self, weight, upper=np.inf):
        """int_0^upper weight(sigma) * unit(sigma) d sigma (unit amplitude)."""
        a, b = self.support
        b = min(b, upper)
        if b <= a:
            return 0.0
        val, _ = integrate.quad(lambda s: float(weight(s) * self.unit(s)), a, b,
                                epsabs=1e-15, epsrel=1e-13, limit=200)
        return val


@dataclass(frozen=True)
class PolynomialAnsatz:
    """Z(sigma) = sum_j coefficients[j] sigma^j plus an optional bump E."""

    coefficients: tuple = ()
    bump: Bump | None = None

    def __post_init__(self):
        coeffs = [GaussianRational.coerce(c) for c in self.coefficients]
        while coeffs and not coeffs[-1]:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @property
    def degree(self):
        """Index of the highest nonzero coefficient (-1 for the zero polynomial)."""
        return len(self.coefficients) - 1

    def complex_coefficients(self):
        return np.array([complex(c) for c in self.coefficients], dtype=complex)

    def __call__(self, sigma):
        c = self.complex_coefficients()
        sig = np.asarray(sigma, dtype=float)
        if c.size == 0:
            return np.zeros(sig.shape)
        val = np.polynomial.polynomial.polyval(sig, c)
        if np.all(c.imag == 0):
            val = val.real
        return val

    def derivative(self):
        return PolynomialAnsatz(tuple(c * k for k, c in enumerate(self.coefficients))[1:])

    def integral_to(self, Sigma):
        """int_0^Sigma Z(sigma) d sigma, exactly when Sigma is rational."""
        S = GaussianRational.coerce(_to_fraction(Sigma))
        total = GaussianRational()
        power = S
        for j, c in enumerate(self.coefficients):
            total = total + c * power / (j + 1)
            power = power * S
        return total

    def to_json(self):
        out = {"coefficients": [c.to_json() for c in self.coefficients]}
        if self.bump is not None:
            amp = complex(self.bump.amplitude)
            out["bump"] = {"center": self.bump.center, "width": self.bump.width,
                           "amplitude": [amp.real, amp.imag]}
        return out


def poles_to_polynomial(p):
    """Z with F(Theta Z) having principal part ``p``: b_j = i^{j+1} a_{j+1} / j!."""
    if not p.integer_orders:
        raise DomainError(
            "fractional pole orders have no polynomial ansatz; use asymptotic_contribution")
    if not p.terms:
        return PolynomialAnsatz(())
    top = max(int(j) for j in p.terms)
    coeffs = [GaussianRational() for _ in range(top)]
    for j, a in p.terms.items():
        k = int(j) - 1
        coeffs[k] = _i_pow(k + 1) * GaussianRational.coerce(a) / math.factorial(k)
    return PolynomialAnsatz(tuple(coeffs))


def polynomial_to_poles(z):
    """Inverse of :func:`poles_to_polynomial`: a_{j+1} = j! b_j i^{-(j+1)}."""
    terms = {}
    for j, b in enumerate(z.coefficients):
        if b:
            terms[j + 1] = b * math.factorial(j) * _i_pow(-(j + 1))
    return PoleExpansion(terms)


def asymptotic_contribution(p, Sigma):
    """a00 + sum_j e^{i pi j / 2} a_j Sigma^j / Gamma(j + 1).

    Fractional j use the principal branch of Sigma^j (Sigma > 0).
    """
    if not Sigma > 0:
        raise DomainError("Sigma must be positive")
    total = complex(p.a00)
    for j, a in p.terms.items():
        jf = float(j)
        total += np.exp(0.5j * np.pi * jf) * complex(a) * Sigma ** jf / math.gamma(jf + 1.0)
    return total


def solve_bump_amplitude(limit_without_bump, weight, center=1.5, width=1.0):
    """Bump E with int_0^inf weight * E = -limit_without_bump.

    The condition is linear in the amplitude, so it is solved directly.
    """
    shape = Bump(center, width, 1.0)
    mass = shape.weighted_integral(weight)
    return Bump(center, width, -complex(limit_without_bump) / mass)
