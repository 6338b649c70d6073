import math

import numpy as np
import pytest

from qhgeom.closed_form import (
    hyperbolic_ball_distance,
    hyperbolic_halfspace_distance,
    j_metric,
    qh_punctured_distance,
)
from qhgeom.errors import EmptyEffectiveSetError, InvalidInputError, PathExitsDomainError
from qhgeom.geodesic import SolverOptions, qh_distance_numeric, refine_path, uniformity_ratio
from qhgeom.norms import EUCLIDEAN
from qhgeom.paths import PathPolyline, norm_length, qh_length

from conftest import DISK, DOMAINS, PLANE, SLIT, SQUARE, UPPER, sample_inside

COARSE = SolverOptions(grid_resolution=0.5, refine_iterations=0)


@pytest.mark.parametrize("R", [2.0, math.e, 10.0])
def test_radial_quadrature(R):
    path = PathPolyline([(1.0, 0.0), (R, 0.0)])
    assert qh_length(PLANE, EUCLIDEAN, path, nodes=64) == pytest.approx(math.log(R), abs=1e-10)


def test_vertical_quadrature_in_half_plane():
    path = PathPolyline([(0.0, 1.0), (0.0, math.e)])
    assert qh_length(UPPER, EUCLIDEAN, path, nodes=64) == pytest.approx(1.0, abs=1e-10)


def test_repeated_vertex_is_rejected():
    with pytest.raises(InvalidInputError):
        PathPolyline([(1.0, 0.0), (1.0, 0.0)])


def test_constant_path_has_zero_length():
    assert qh_length(PLANE, EUCLIDEAN, PathPolyline([(1.0, 0.0)])) == 0.0
    assert norm_length(EUCLIDEAN, PathPolyline([(1.0, 0.0)])) == 0.0


@pytest.mark.parametrize(
    "domain, a, b",
    [(PLANE, (-1.0, 0.0), (1.0, 0.0)), (SLIT, (2.0, 1.0), (2.0, -1.0)), (SQUARE, (0.5, 0.5), (1.5, 0.5))],
)
def test_path_leaving_the_domain(domain, a, b):
    with pytest.raises(PathExitsDomainError):
        qh_length(domain, EUCLIDEAN, PathPolyline([a, b]))


def test_path_round_the_slit_is_finite():
    path = PathPolyline([(2.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (2.0, -1.0)])
    assert math.isfinite(qh_length(SLIT, EUCLIDEAN, path))


def test_equal_points():
    value, path = qh_distance_numeric(PLANE, EUCLIDEAN, (1.0, 0.0), (1.0, 0.0))
    assert value == 0.0 and len(path) == 1


def test_half_turn():
    value, path = qh_distance_numeric(PLANE, EUCLIDEAN, (1.0, 0.0), (-1.0, 0.0))
    assert value == pytest.approx(math.pi, rel=1e-2)
    assert value >= math.pi - 1e-9
    assert np.max(np.abs(np.linalg.norm(path.vertices, axis=1) - 1)) <= 0.02


def _pairs(domain, exact, rng, n, limit=5.0):
    out = []
    while len(out) < n:
        x, y = sample_inside(domain, rng, 2, box=3.0, dmin=0.05)
        v = exact(x, y)
        if 0 < v <= limit:
            out.append((x, y, v))
    return out


def test_half_plane_oracle(rng):
    for x, y, v in _pairs(UPPER, lambda a, b: hyperbolic_halfspace_distance(UPPER, a, b), rng, 6):
        k, _ = qh_distance_numeric(UPPER, EUCLIDEAN, x, y)
        assert v - 1e-9 <= k <= v * 1.01


def test_punctured_oracle(rng):
    for x, y, v in _pairs(PLANE, qh_punctured_distance, rng, 6):
        k, _ = qh_distance_numeric(PLANE, EUCLIDEAN, x, y)
        assert v - 1e-9 <= k <= v * 1.01


def test_upper_bound_even_without_refinement(rng):
    for x, y, v in _pairs(PLANE, qh_punctured_distance, rng, 10):
        k, path = qh_distance_numeric(PLANE, EUCLIDEAN, x, y, COARSE)
        assert k >= v - 1e-9
        assert qh_length(PLANE, EUCLIDEAN, path) == pytest.approx(k, rel=1e-12)


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_numeric_k_dominates_j(name, rng):
    d = DOMAINS[name]
    for x, y in zip(sample_inside(d, rng, 8), sample_inside(d, rng, 8)):
        k, _ = qh_distance_numeric(d, EUCLIDEAN, x, y, COARSE)
        assert k >= j_metric(d, x, y) - 1e-12


def test_symmetry_within_tolerance():
    opts = SolverOptions()
    for d, x, y in [(PLANE, (1.0, 0.0), (0.3, 2.0)), (SQUARE, (0.1, 0.1), (0.9, 0.5))]:
        a, _ = qh_distance_numeric(d, EUCLIDEAN, x, y, opts)
        b, _ = qh_distance_numeric(d, EUCLIDEAN, y, x, opts)
        assert abs(a - b) <= 2 * opts.target_rel_error * a


def test_refinement_convergence():
    cases = [
        (PLANE, (1.0, 0.0), (-1.0, 0.0)),
        (UPPER, (0.0, 1.0), (3.0, 0.5)),
        (SQUARE, (0.1, 0.1), (0.9, 0.5)),
    ]
    for d, x, y in cases:
        base, _ = qh_distance_numeric(d, EUCLIDEAN, x, y)
        fine, _ = qh_distance_numeric(d, EUCLIDEAN, x, y, SolverOptions().finer())
        assert fine <= base + 1e-9


def test_disk_comparison(rng):
    for x, y in zip(sample_inside(DISK, rng, 5, dmin=0.05), sample_inside(DISK, rng, 5, dmin=0.05)):
        k, _ = qh_distance_numeric(DISK, EUCLIDEAN, x, y)
        rho = hyperbolic_ball_distance(DISK, x, y)
        assert rho <= 2 * k
        assert k <= rho * 1.01


def test_refine_chord():
    chord = PathPolyline([(1.0, 0.0), (0.0, 1.0)])
    refined = refine_path(PLANE, EUCLIDEAN, chord, 12)
    length = qh_length(PLANE, EUCLIDEAN, refined)
    assert length < qh_length(PLANE, EUCLIDEAN, chord)
    assert length == pytest.approx(math.pi / 2, rel=1e-2)


def test_refine_keeps_a_geodesic():
    radial = PathPolyline([(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)])
    out = refine_path(PLANE, EUCLIDEAN, radial, 5)
    assert qh_length(PLANE, EUCLIDEAN, out) == pytest.approx(math.log(3), abs=1e-9)


def test_refine_zero_iterations_is_identity():
    chord = PathPolyline([(1.0, 0.0), (0.0, 1.0)])
    assert refine_path(PLANE, EUCLIDEAN, chord, 0) is chord


def test_slit_ratio_grows():
    pairs = [((s, 1.0), (s, -1.0)) for s in (2.0, 8.0, 32.0)]
    ratios = [uniformity_ratio(SLIT, [p])[0] for p in pairs]
    assert ratios[0] < ratios[1] < ratios[2]


def test_half_plane_ratio_is_moderate(rng):
    pairs = [tuple(sample_inside(UPPER, rng, 2, dmin=0.05)) for _ in range(5)]
    ratio, _ = uniformity_ratio(UPPER, pairs, COARSE)
    assert ratio <= 2 * 1.01


def test_uniformity_ratio_without_effective_pairs():
    with pytest.raises(EmptyEffectiveSetError):
        uniformity_ratio(PLANE, [((1.0, 0.0), (1.0, 0.0))])
