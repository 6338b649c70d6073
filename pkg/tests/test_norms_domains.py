import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import Point, Polygon

from qhgeom.domains import (
    ConvexPolygon,
    HalfSpace,
    PuncturedSpace,
    SlitPlane,
    UnitBall,
    boundary_distance,
    contains,
    domain_from_json,
    domain_to_json,
)
from qhgeom.errors import InvalidInputError, OutsideDomainError, UnsupportedCombinationError
from qhgeom.norms import EUCLIDEAN, NormSpec, norm_value

from conftest import DOMAINS, HEXAGON, SQUARE, sample_inside

finite = st.floats(-1e3, 1e3, allow_nan=False)


@pytest.mark.parametrize(
    "norm, v, expected",
    [(EUCLIDEAN, (3, 4), 5.0), (NormSpec.lp(1), (1, -2), 3.0), (NormSpec.lp(math.inf), (1, -2), 2.0)],
)
def test_norm_examples(norm, v, expected):
    assert norm_value(norm, v) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, 4.0, math.inf])
@settings(max_examples=50, deadline=None)
@given(x=st.tuples(finite, finite), y=st.tuples(finite, finite), a=finite)
def test_norm_axioms(p, x, y, a):
    n = NormSpec.lp(p)
    x, y = np.array(x), np.array(y)
    scale = 1 + np.abs(x).sum() + np.abs(y).sum()
    assert n(x + y) <= n(x) + n(y) + 1e-12 * scale
    assert n(a * x) == pytest.approx(abs(a) * n(x), rel=1e-12, abs=1e-300)


def test_lp_two_is_euclidean():
    v = np.array([[0.3, -1.7], [2.0, 5.0]])
    assert np.allclose(NormSpec.lp(2).rows(v), EUCLIDEAN.rows(v), rtol=1e-15)


@pytest.mark.parametrize("bad", [0.5, float("nan"), -1.0])
def test_norm_rejects_bad_exponent(bad):
    with pytest.raises(InvalidInputError):
        NormSpec.lp(bad)


@pytest.mark.parametrize("text", ["euclidean", "l1", "linf", "p=1.5", "l4"])
def test_norm_json_round_trip(text):
    n = NormSpec.parse(text)
    assert NormSpec.from_json(json.loads(json.dumps(n.to_json()))) == n


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_domain_json_round_trip(name):
    d = DOMAINS[name]
    assert domain_from_json(json.loads(json.dumps(domain_to_json(d)))) == d


@pytest.mark.parametrize(
    "domain, x, expected",
    [
        (PuncturedSpace(((0.0, 0.0),)), (3, 4), 5.0),
        (HalfSpace((0.0, 1.0), 0.0), (7, 2), 2.0),
        (PuncturedSpace(((1.0, 0.0), (-1.0, 0.0))), (0, math.sqrt(3)), 2.0),
    ],
)
def test_boundary_distance_examples(domain, x, expected):
    assert boundary_distance(domain, EUCLIDEAN, x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize(
    "domain, x, expected",
    [
        (PuncturedSpace(((0.0, 0.0),)), (0, 0), False),
        (HalfSpace((0.0, 1.0), 0.0), (5, -1), False),
        (UnitBall((0.0, 0.0), 1.0), (0.5, 0), True),
        (SlitPlane((0.0, 0.0), (1.0, 0.0)), (3, 0), False),
        (SlitPlane((0.0, 0.0), (1.0, 0.0)), (-3, 0), True),
    ],
)
def test_contains_examples(domain, x, expected):
    assert contains(domain, x) is expected


def test_p_norm_distance_in_punctured_space():
    d = PuncturedSpace(((0.0, 0.0),))
    assert boundary_distance(d, NormSpec.lp(1), (3, 4)) == 7.0
    assert boundary_distance(d, NormSpec.lp(math.inf), (3, 4)) == 4.0


@pytest.mark.parametrize("domain", [HalfSpace((0.0, 1.0), 0.0), SQUARE, SlitPlane((0.0, 0.0), (1.0, 0.0))])
def test_non_euclidean_norm_is_refused(domain):
    with pytest.raises(UnsupportedCombinationError):
        boundary_distance(domain, NormSpec.lp(1), (0.5, 0.5))


def test_distance_outside_is_an_error():
    with pytest.raises(OutsideDomainError):
        boundary_distance(PuncturedSpace(((0.0, 0.0),)), EUCLIDEAN, (0, 0))


@pytest.mark.parametrize(
    "build",
    [
        lambda: HalfSpace((0.0, 2.0), 0.0),
        lambda: SlitPlane((0.0, 0.0), (1.0, 1.0)),
        lambda: ConvexPolygon(((0, 0), (1, 1), (1, 0), (0, 1))),
        lambda: UnitBall((0.0, 0.0), -1.0),
        lambda: PuncturedSpace(()),
    ],
)
def test_invalid_domains_are_rejected(build):
    with pytest.raises(InvalidInputError):
        build()


def test_nd_domains():
    assert UnitBall((0.0, 0.0, 0.0), 1.0).boundary_distance((0.5, 0, 0)) == pytest.approx(0.5)
    assert HalfSpace((0.0, 0.0, 1.0), 0.0).boundary_distance((4, 5, 0.25)) == 0.25
    assert PuncturedSpace(((0.0, 0.0, 0.0),)).boundary_distance((0, 3, 4)) == 5.0


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_balls_of_radius_d_fit_inside(name, rng):
    d = DOMAINS[name]
    X = sample_inside(d, rng, 1000)
    D = d.distances(X)
    assert np.all(D > 0)
    u = rng.normal(size=X.shape)
    u /= np.linalg.norm(u, axis=1)[:, None]
    h = D * rng.uniform(0, 0.999, size=len(X))
    assert np.all(d.inside(X + h[:, None] * u))


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_boundary_distance_is_one_lipschitz(name, rng):
    d = DOMAINS[name]
    X = sample_inside(d, rng, 500)
    Y = sample_inside(d, rng, 500)
    lhs = np.abs(d.distances(X) - d.distances(Y))
    assert np.all(lhs <= np.linalg.norm(X - Y, axis=1) + 1e-12)


@pytest.mark.parametrize("poly", [SQUARE, HEXAGON])
def test_polygon_distance_matches_independent_geometry(poly, rng):
    ring = Polygon(poly.vertices).exterior
    X = sample_inside(poly, rng, 300, dmin=0.0)
    expected = np.array([ring.distance(Point(*x)) for x in X])
    assert np.allclose(poly.distances(X), expected, atol=1e-9, rtol=0)


def test_slit_distance_clamps_at_apex():
    s = SlitPlane((0.0, 0.0), (1.0, 0.0))
    assert s.boundary_distance((-3, 4)) == pytest.approx(5.0)
    assert s.boundary_distance((7, -2)) == pytest.approx(2.0)
