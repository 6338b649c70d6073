import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhgeom.closed_form import (
    hyperbolic_ball_distance,
    hyperbolic_halfspace_distance,
    j_metric,
    mobius_inversion,
    qh_punctured_distance,
    qh_punctured_geodesic,
)
from qhgeom.domains import HalfSpace, UnitBall
from qhgeom.errors import OutsideDomainError
from qhgeom.norms import EUCLIDEAN
from qhgeom.paths import qh_length

from conftest import DISK, DOMAINS, PLANE, UPPER, sample_inside


def test_j_examples():
    assert j_metric(PLANE, (1, 0), (3, 0)) == pytest.approx(math.log(3), abs=1e-15)
    assert j_metric(PLANE, (1, 0), (-1, 0)) == pytest.approx(math.log(3), abs=1e-15)
    for d in DOMAINS.values():
        x = sample_inside(d, np.random.default_rng(1), 1)[0]
        assert j_metric(d, x, x) == 0.0


def test_j_outside_point_is_an_error():
    with pytest.raises(OutsideDomainError):
        j_metric(PLANE, (0, 0), (1, 0))


def test_hyperbolic_ball_examples():
    assert hyperbolic_ball_distance(DISK, (0, 0), (0, 0)) == 0.0
    assert hyperbolic_ball_distance(DISK, (0, 0), (0.5, 0)) == pytest.approx(math.log(3), abs=1e-14)
    a = hyperbolic_ball_distance(DISK, (0.3, 0), (0, 0.3))
    assert a == hyperbolic_ball_distance(DISK, (0, 0.3), (0.3, 0))


def test_hyperbolic_ball_matches_radial_integral():
    # integral of 2/(1 - s^2) from 0 to t
    for t in (0.1, 0.5, 0.9, 0.999):
        assert hyperbolic_ball_distance(DISK, (0, 0), (0, t)) == pytest.approx(math.log((1 + t) / (1 - t)), rel=1e-13)


def test_hyperbolic_ball_with_shifted_centre_and_radius():
    b = UnitBall((2.0, -1.0), 3.0)
    x, y = np.array([2.0, -1.0]), np.array([3.5, -1.0])
    assert hyperbolic_ball_distance(b, x, y) == pytest.approx(math.log(3), rel=1e-13)


def test_hyperbolic_halfspace_examples():
    assert hyperbolic_halfspace_distance(UPPER, (0, 1), (0, math.e)) == pytest.approx(1.0, abs=1e-14)
    assert hyperbolic_halfspace_distance(UPPER, (0, 1), (1, 1)) == pytest.approx(math.acosh(1.5), abs=1e-14)
    assert hyperbolic_halfspace_distance(UPPER, (3, 2), (3, 2)) == 0.0


def test_halfspace_with_offset_is_a_translate():
    hs = HalfSpace((0.0, 1.0), -2.0)
    shifted = hyperbolic_halfspace_distance(hs, (0, -1), (1, -1))
    assert shifted == pytest.approx(hyperbolic_halfspace_distance(UPPER, (0, 1), (1, 1)), rel=1e-13)


@pytest.mark.parametrize(
    "y, expected",
    [((-1, 0), math.pi), ((math.e, 0), 1.0), ((0, math.exp(math.pi)), math.pi * math.sqrt(5) / 2)],
)
def test_punctured_examples(y, expected):
    assert qh_punctured_distance((1, 0), y) == pytest.approx(expected, rel=1e-14)


def test_punctured_distance_in_three_dimensions():
    # angle pi/2, equal radii
    assert qh_punctured_distance((1, 0, 0), (0, 0, 1)) == pytest.approx(math.pi / 2, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(t=st.floats(0.01, 0.99), s=st.floats(0.01, 0.99))
def test_hyperbolic_pythagoras(t, s):
    a = hyperbolic_ball_distance(DISK, (0, 0), (t, 0))
    b = hyperbolic_ball_distance(DISK, (0, 0), (0, s))
    c = hyperbolic_ball_distance(DISK, (t, 0), (0, s))
    assert abs(math.cosh(c) - math.cosh(a) * math.cosh(b)) <= 1e-10 * max(1.0, math.cosh(c))


def test_mobius_examples():
    assert np.allclose(mobius_inversion((2, 0)), (0.5, 0))
    assert np.allclose(mobius_inversion((0, 1)), (0, 1))
    assert np.allclose(mobius_inversion(mobius_inversion((3, 4))), (3, 4), rtol=1e-15)


def test_mobius_quasi_invariance(rng):
    X = sample_inside(PLANE, rng, 200, box=5.0, dmin=1e-2)
    Y = sample_inside(PLANE, rng, 200, box=5.0, dmin=1e-2)
    for x, y in zip(X, Y):
        k = qh_punctured_distance(x, y)
        kf = qh_punctured_distance(mobius_inversion(x), mobius_inversion(y))
        assert 0.5 * k - 1e-12 <= kf <= 2 * k + 1e-12


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_j_is_a_metric(name, rng):
    d = DOMAINS[name]
    P = sample_inside(d, rng, 3000).reshape(1000, 3, 2)
    for x, y, z in P:
        xy = j_metric(d, x, y)
        assert xy == j_metric(d, y, x)
        assert xy <= j_metric(d, x, z) + j_metric(d, z, y) + 1e-12


def test_k_dominates_j_in_punctured_plane(rng):
    X = sample_inside(PLANE, rng, 1000, box=5.0)
    Y = sample_inside(PLANE, rng, 1000, box=5.0)
    for x, y in zip(X, Y):
        assert qh_punctured_distance(x, y) >= j_metric(PLANE, x, y) - 1e-12


def test_geodesic_on_circle_for_equal_radii():
    path, nonunique = qh_punctured_geodesic((1, 0), (0, 1), samples=64)
    assert not nonunique
    assert np.allclose(np.linalg.norm(path.vertices, axis=1), 1.0, atol=1e-9)


def test_antipodal_geodesic_is_flagged():
    path, nonunique = qh_punctured_geodesic((1, 0), (-1, 0), samples=64)
    assert nonunique
    assert np.allclose(np.linalg.norm(path.vertices, axis=1), 1.0, atol=1e-9)
    assert qh_length(PLANE, EUCLIDEAN, path) == pytest.approx(math.pi, rel=1e-3)


def test_radial_geodesic():
    path, _ = qh_punctured_geodesic((1, 0), (math.e, 0), samples=16)
    V = path.vertices
    assert np.all(V[:, 1] == 0) and np.all(V[:, 0] > 0)
    assert np.all(np.diff(V[:, 0]) > 0)


def test_spiral_geodesic_length_matches_distance():
    path, _ = qh_punctured_geodesic((1, 0), (0, math.e), samples=512)
    expected = math.sqrt(math.pi ** 2 / 4 + 1)
    assert qh_length(PLANE, EUCLIDEAN, path) == pytest.approx(expected, abs=1e-4)
    assert qh_punctured_distance((1, 0), (0, math.e)) == pytest.approx(expected, rel=1e-14)
