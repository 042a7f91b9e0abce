import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from tauberweyl.errors import DomainError, IncompleteSpectrumError, InvalidLatticeError
from tauberweyl.spectral_models import (
    Lattice,
    Sphere,
    Torus,
    counting_function,
    enumerate_sphere_spectrum,
    enumerate_torus_spectrum,
    geodesic_length_spectrum,
    sphere_multiplicity,
    unit_ball_volume,
)

TWO_PI = 2 * np.pi


def entries_close(spectrum, expected):
    got = spectrum.entries
    assert [m for _, m in got] == [m for _, m in expected]
    assert_allclose([s for s, _ in got], [s for s, _ in expected], rtol=1e-12, atol=1e-14)


# ---------------------------------------------------------------- worked examples

def test_torus_two_pi_z2_small():
    s = enumerate_torus_spectrum(Lattice.scaled_integer(2, TWO_PI), 1.5)
    entries_close(s, [(0.0, 1), (1.0, 4), (math.sqrt(2), 4)])


def test_torus_only_zero_vector():
    s = enumerate_torus_spectrum(Lattice.scaled_integer(2, TWO_PI), 0.5)
    entries_close(s, [(0.0, 1)])


def test_circle_frequency_pairs():
    s = enumerate_torus_spectrum(Lattice.scaled_integer(1, TWO_PI), 3.0)
    entries_close(s, [(0.0, 1), (1.0, 2), (2.0, 2), (3.0, 2)])


@pytest.mark.parametrize("d,smax,expected", [
    (2, 2.5, [(0.0, 1), (math.sqrt(2), 3), (math.sqrt(6), 5)]),
    (1, 2.0, [(0.0, 1), (1.0, 2), (2.0, 2)]),
    (3, 2.0, [(0.0, 1), (math.sqrt(3), 4)]),
])
def test_sphere_examples(d, smax, expected):
    entries_close(enumerate_sphere_spectrum(d, smax), expected)


def test_length_spectrum_examples():
    assert_allclose(geodesic_length_spectrum(Torus(Lattice(np.eye(2))), 2.0).lengths,
                    [1.0, math.sqrt(2), 2.0])
    assert_allclose(geodesic_length_spectrum(Sphere(2), 7.0).lengths, [TWO_PI])
    assert_allclose(geodesic_length_spectrum(Torus(Lattice(np.eye(1))), 3.5).lengths, [1, 2, 3])


def test_counting_examples():
    z2 = enumerate_torus_spectrum(Lattice.scaled_integer(2, TWO_PI), 3.0)
    assert counting_function(z2, 1.0) == 5
    assert counting_function(z2, 0.0) == 1
    s2 = enumerate_sphere_spectrum(2, 3.0)
    assert counting_function(s2, math.sqrt(6)) == 9


def test_counting_beyond_radius_raises():
    s = enumerate_sphere_spectrum(2, 3.0)
    with pytest.raises(IncompleteSpectrumError):
        counting_function(s, 3.5)


def test_lattice_invariants():
    b = np.array([[1.0, 0.3], [0.2, 2.0]])
    lat = Lattice(b)
    assert_allclose(lat.dual @ lat.basis.T, TWO_PI * np.eye(2), atol=1e-12)
    assert_allclose(Torus(lat).volume, abs(np.linalg.det(b)), rtol=1e-12)


@pytest.mark.parametrize("bad", [np.zeros((2, 2)), [[1.0, 2.0], [2.0, 4.0]], np.ones((2, 3))])
def test_singular_basis_rejected(bad):
    with pytest.raises(InvalidLatticeError):
        Lattice(bad)


def test_sphere_volume_and_domain():
    assert_allclose(Sphere(2).volume, 4 * np.pi)
    assert_allclose(Sphere(1).volume, TWO_PI)
    assert_allclose(Sphere(3).volume, 2 * np.pi ** 2)
    with pytest.raises(DomainError):
        Sphere(0)


def test_unit_ball_volume():
    assert_allclose([unit_ball_volume(d) for d in (1, 2, 3)], [2.0, np.pi, 4 * np.pi / 3])


def test_truncate_count_partial_multiplicity():
    s = enumerate_torus_spectrum(Lattice.scaled_integer(2, TWO_PI), 3.0)
    sig, mult = s.truncate_count(7)
    assert_array_equal(mult, [1, 4, 2])
    assert_allclose(sig, [0.0, 1.0, math.sqrt(2)])


# ---------------------------------------------------------------- properties

def _random_lattice(seed, d):
    rng = np.random.default_rng(seed)
    while True:
        a = rng.normal(size=(d, d))
        if np.linalg.cond(a) <= 50:
            return Lattice(TWO_PI * a * rng.uniform(0.5, 2.0))


def _brute_force_frequencies(lattice, sigma_max):
    """Dual vectors D n inside a coefficient box derived from the smallest singular value."""
    D = lattice.dual
    smin = np.linalg.svd(D, compute_uv=False).min()
    r = int(math.ceil(sigma_max / smin))
    axes = [np.arange(-r, r + 1)] * D.shape[0]
    n = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    norms = np.linalg.norm(n @ D.T, axis=1)
    return np.sort(norms[norms <= sigma_max])


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), d=st.integers(1, 3), sigma_max=st.floats(0.5, 20.0))
def test_completeness_against_brute_force(seed, d, sigma_max):
    lat = _random_lattice(seed, d)
    s = enumerate_torus_spectrum(lat, sigma_max)
    brute = _brute_force_frequencies(lat, sigma_max)
    assert s.total == brute.size
    assert_allclose(np.repeat(s.sigma, s.multiplicity), brute, rtol=1e-9, atol=1e-12)


def _disk_count(k):
    """Integer points with x^2 + y^2 <= k, by a direct loop."""
    r = math.isqrt(k)
    return sum(2 * math.isqrt(k - x * x) + 1 for x in range(-r, r + 1))


def test_gauss_circle_consistency():
    s = enumerate_torus_spectrum(Lattice.scaled_integer(2, TWO_PI), 200.0)
    rng = np.random.default_rng(1)
    ks = np.concatenate([np.arange(0, 200), rng.integers(0, 40_000, 200), [40_000]])
    for k in ks:
        assert counting_function(s, math.sqrt(int(k))) == _disk_count(int(k))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 30.0), min_size=2, max_size=40))
def test_counting_monotone_and_right_continuous(points):
    s = enumerate_sphere_spectrum(3, 30.0)
    pts = np.sort(np.array(points))
    vals = s.counts(pts)
    assert np.all(np.diff(vals) >= 0)
    # right-continuity: the value at a jump equals the limit from the right
    assert_array_equal(s.counts(s.sigma), s.counts(np.minimum(s.sigma + 1e-9, 30.0)))
    assert np.all(s.counts(s.sigma, side="left") < s.counts(s.sigma))


@settings(max_examples=60, deadline=None)
@given(k=st.integers(0, 200), d=st.integers(1, 6))
def test_sphere_multiplicity_closed_form(k, d):
    # dim of degree-k harmonics: C(k+d-1, d-1) (2k+d-1) / (k+d-1), with the k=0 value 1
    expected = 1 if k == 0 else math.comb(k + d - 1, d - 1) * (2 * k + d - 1) // (k + d - 1)
    assert sphere_multiplicity(k, d) == expected


@settings(max_examples=40, deadline=None)
@given(k=st.integers(0, 60), d=st.integers(1, 5))
def test_sphere_cumulative_count(k, d):
    s = enumerate_sphere_spectrum(d, math.sqrt(k * (k + d - 1)) + 0.5)
    # sum_{i<=k} mult_i = C(k+d, d) + C(k+d-1, d)
    assert counting_function(s, math.sqrt(k * (k + d - 1))) == math.comb(k + d, d) + math.comb(k + d - 1, d)


def test_length_spectrum_against_brute_force():
    b = np.array([[1.0, 0.4], [0.0, 1.3]])
    ls = geodesic_length_spectrum(Torus(Lattice(b)), 6.0)
    n = np.stack(np.meshgrid(np.arange(-20, 21), np.arange(-20, 21), indexing="ij"), -1).reshape(-1, 2)
    norms = np.linalg.norm(n @ b.T, axis=1)
    brute = np.unique(np.round(norms[(norms > 0) & (norms <= 6.0)], 10))
    assert_allclose(ls.lengths, brute, atol=1e-9)
    signed = ls.signed()
    assert_allclose(signed, -signed[::-1])
    assert signed[len(signed) // 2] == 0.0
