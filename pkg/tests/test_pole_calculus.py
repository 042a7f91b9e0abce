import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from tauberweyl.errors import DomainError
from tauberweyl.fourier_laplace import CausalFunction, boundary_value
from tauberweyl.pole_calculus import (
    Bump,
    GaussianRational,
    PoleExpansion,
    PolynomialAnsatz,
    asymptotic_contribution,
    bump_profile_integral,
    poles_to_polynomial,
    polynomial_to_poles,
    solve_bump_amplitude,
)

G = GaussianRational


def test_heaviside_pole():
    z = poles_to_polynomial(PoleExpansion({1: -1j}))
    assert z.coefficients == (G(1),)


def test_double_pole_gives_linear():
    z = poles_to_polynomial(PoleExpansion({2: -1}))
    assert z.coefficients == (G(0), G(1))


def test_empty_expansion():
    z = poles_to_polynomial(PoleExpansion({}))
    assert z.degree == -1
    assert_allclose(z(np.array([1.0, 2.0])), 0.0)


def test_half_sigma_squared():
    p = polynomial_to_poles(PolynomialAnsatz((0, 0, Fraction(1, 2))))
    assert p.terms == {Fraction(3): G(0, 1)}


def test_nonpositive_order_rejected():
    with pytest.raises(DomainError):
        PoleExpansion({0: 1})


gaussian_rationals = st.builds(
    G,
    st.fractions(min_value=-50, max_value=50, max_denominator=20),
    st.fractions(min_value=-50, max_value=50, max_denominator=20),
)


@settings(max_examples=200, deadline=None)
@given(st.dictionaries(st.integers(1, 12), gaussian_rationals, max_size=6))
def test_round_trip_exact(terms):
    p = PoleExpansion(terms)
    back = polynomial_to_poles(poles_to_polynomial(p))
    assert {j: a for j, a in back.terms.items()} == {j: a for j, a in p.terms.items() if a}


@settings(max_examples=100, deadline=None)
@given(st.lists(gaussian_rationals, max_size=10))
def test_round_trip_from_polynomial(coeffs):
    z = PolynomialAnsatz(tuple(coeffs))
    assert poles_to_polynomial(polynomial_to_poles(z)) == z


@pytest.mark.parametrize("j", range(5))
@pytest.mark.parametrize("tau", [-2.0, -1.0, 1.0, 2.0])
def test_transform_consistency(j, tau):
    # F(Theta sigma^j / j!) on the axis must match the principal part of its ansatz
    f = CausalFunction.exp_poly([0.0] * j + [1.0 / math.factorial(j)])
    p = polynomial_to_poles(PolynomialAnsatz((0,) * j + (Fraction(1, math.factorial(j)),)))
    expected = sum(complex(a) * tau ** (-float(k)) for k, a in p.terms.items())
    bv = boundary_value(f, tau, exact_if_available=False)
    assert bv.converged
    assert_allclose(bv.value, expected, rtol=1e-8)


def test_fractional_orders():
    p = PoleExpansion({Fraction(1, 2): 1})
    assert not p.integer_orders
    assert_allclose(asymptotic_contribution(p, 4.0),
                    np.exp(0.25j * np.pi) * 2.0 / math.gamma(1.5), rtol=1e-14)
    with pytest.raises(DomainError):
        poles_to_polynomial(p)


def test_asymptotic_contribution_rejects_nonpositive_sigma():
    with pytest.raises(DomainError):
        asymptotic_contribution(PoleExpansion({1: 1}), 0.0)


@settings(max_examples=100, deadline=None)
@given(st.lists(gaussian_rationals, min_size=1, max_size=6),
       st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=10))
def test_contribution_is_integral_of_ansatz(coeffs, Sigma):
    # sum_j e^{i pi j/2} a_j Sigma^j / Gamma(j+1) equals int_0^Sigma Z exactly
    z = PolynomialAnsatz(tuple(coeffs))
    lhs = asymptotic_contribution(polynomial_to_poles(z), float(Sigma))
    rhs = complex(z.integral_to(Sigma))
    assert_allclose(lhs, rhs, rtol=1e-11, atol=1e-11 * max(1.0, abs(rhs)))


def test_integral_to_is_exact():
    z = PolynomialAnsatz((1, 0, 3))
    assert z.integral_to(Fraction(1, 2)) == G(Fraction(1, 2) + Fraction(1, 8))


def test_bump_profile_integral():
    assert_allclose(bump_profile_integral(), 0.443993816168079, rtol=1e-12)


def test_bump_has_unit_mass():
    b = Bump(2.0, 0.5, 1.0)
    assert_allclose(b.weighted_integral(lambda s: 1.0), 1.0, rtol=1e-10)
    assert b(np.array([1.7, 2.3]))[0] == 0.0


def test_bump_support_validation():
    with pytest.raises(DomainError):
        Bump(0.4, 1.0)
    with pytest.raises(DomainError):
        Bump(1.5, 0.0)


def test_solve_bump_amplitude_cancels_limit():
    weight = lambda s: 1.0 / (1.0 + s * s)
    bump = solve_bump_amplitude(0.3 - 0.1j, weight)
    total = bump.weighted_integral(weight) * bump.amplitude
    assert_allclose(total, -(0.3 - 0.1j), rtol=1e-12)


def test_gaussian_rational_arithmetic():
    a, b = G(1, 2), G(Fraction(1, 3), -1)
    assert complex(a * b) == pytest.approx(complex(1, 2) * complex(1 / 3, -1))
    assert (a / b) * b == a
    with pytest.raises(ZeroDivisionError):
        a / G()
