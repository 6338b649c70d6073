import math
import warnings

import numpy as np
import pytest

from qhgeom.errors import InvalidInputError, NotPowerTypeError, PreconditionError
from qhgeom.moduli import (
    AnnulusPathPair,
    OutsideRecommendedRange,
    convexity_table,
    modulus_of_convexity,
    modulus_of_smoothness,
    power_type_fit,
    qhlemma_margin,
    random_annulus_pair,
)
from qhgeom.norms import EUCLIDEAN, NormSpec
from qhgeom.paths import PathPolyline

L1 = NormSpec.lp(1)
LINF = NormSpec.lp(math.inf)
EPS_LADDER = (0.1, 0.2, 0.4, 0.8, 1.0)
TAU_LADDER = (0.1, 0.2, 0.5, 1.0)


def test_euclidean_convexity_at_one():
    assert modulus_of_convexity(EUCLIDEAN, 1.0).value == pytest.approx(1 - math.sqrt(3) / 2, abs=1e-4)


def test_euclidean_convexity_at_two():
    est = modulus_of_convexity(EUCLIDEAN, 2.0)
    # the chord is flat to rounding near antipodal pairs, costing ~1e-8
    assert est.value == pytest.approx(1.0, abs=1e-7)
    x, y = est.witness
    assert np.allclose(x, -y, atol=1e-3)


def test_sup_norm_flat_sides():
    assert modulus_of_convexity(LINF, 1.0).value == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("tau", [0.1, 0.5, 1.0])
def test_l1_smoothness_is_identity(tau):
    assert modulus_of_smoothness(L1, tau).value == pytest.approx(tau, abs=1e-3)


def test_euclidean_smoothness_at_one():
    assert modulus_of_smoothness(EUCLIDEAN, 1.0).value == pytest.approx(math.sqrt(2) - 1, abs=1e-4)


@pytest.mark.parametrize("norm", [EUCLIDEAN, L1, NormSpec.lp(1.5), NormSpec.lp(4), LINF])
def test_moduli_are_monotone(norm):
    d = [modulus_of_convexity(norm, e).value for e in EPS_LADDER]
    r = [modulus_of_smoothness(norm, t).value for t in TAU_LADDER]
    assert all(a <= b + 1e-12 for a, b in zip(d, d[1:]))
    assert all(a <= b + 1e-12 for a, b in zip(r, r[1:]))
    assert r[0] < r[-1]


@pytest.mark.parametrize("p", [1.0, 1.5, 4.0, math.inf])
def test_euclidean_convexity_dominates(p):
    norm = NormSpec.lp(p)
    for e in EPS_LADDER + (1.5, 2.0):
        assert modulus_of_convexity(EUCLIDEAN, e).value >= modulus_of_convexity(norm, e).value - 1e-4


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_smoothness_ratio_decreases_towards_zero(p):
    norm = NormSpec.lp(p)
    ratio = [modulus_of_smoothness(norm, t).value / t for t in TAU_LADDER]
    assert all(a <= b + 1e-9 for a, b in zip(ratio, ratio[1:]))


@pytest.mark.parametrize("p", [1.0, math.inf])
def test_non_smooth_norms_keep_a_positive_ratio(p):
    norm = NormSpec.lp(p)
    ratio = [modulus_of_smoothness(norm, t).value / t for t in (0.01, 0.05) + TAU_LADDER]
    assert min(ratio) > 0.5


@pytest.mark.parametrize("norm", [EUCLIDEAN, NormSpec.lp(3), L1])
def test_convexity_witness_reproduces_value(norm):
    for e in (0.3, 1.0, 1.7):
        est = modulus_of_convexity(norm, e)
        x, y = est.witness
        assert norm(x) == pytest.approx(1, abs=1e-12) and norm(y) == pytest.approx(1, abs=1e-12)
        assert norm(x - y) == pytest.approx(e, abs=1e-9)
        assert max(0.0, 1 - norm(x + y) / 2) == pytest.approx(est.value, abs=1e-9)


@pytest.mark.parametrize("norm", [EUCLIDEAN, NormSpec.lp(3), L1])
def test_smoothness_witness_reproduces_value(norm):
    for t in (0.2, 1.0):
        est = modulus_of_smoothness(norm, t)
        x, y = est.witness
        assert norm(x) == pytest.approx(1, abs=1e-12) and norm(y) == pytest.approx(t, abs=1e-12)
        assert (norm(x + y) + norm(x - y)) / 2 - 1 == pytest.approx(est.value, abs=1e-9)


@pytest.mark.parametrize("bad", [0.0, -1.0, 2.5, float("nan")])
def test_convexity_parameter_range(bad):
    with pytest.raises(InvalidInputError):
        modulus_of_convexity(EUCLIDEAN, bad)


def test_euclidean_convexity_power_type():
    samples = [(e, modulus_of_convexity(EUCLIDEAN, e).value) for e in EPS_LADDER]
    K, p = power_type_fit(samples, "convexity")
    assert p == pytest.approx(2, abs=0.05)
    assert K == pytest.approx(1 / 8, rel=0.1)


def test_l1_smoothness_power_type():
    samples = [(t, modulus_of_smoothness(L1, t).value) for t in TAU_LADDER]
    _, p = power_type_fit(samples, "smoothness")
    assert p == pytest.approx(1, abs=0.05)


def test_sup_norm_is_not_of_power_type():
    samples = [(e, modulus_of_convexity(LINF, e).value) for e in EPS_LADDER]
    with pytest.raises(NotPowerTypeError):
        power_type_fit(samples, "convexity")


def test_fit_preconditions():
    with pytest.raises(InvalidInputError):
        power_type_fit([(0.1, 1.0), (0.2, 2.0), (1.0, 3.0)])
    # 0.1 .. 0.8 spans less than a decade
    with pytest.raises(InvalidInputError):
        power_type_fit([(e, e * e / 8) for e in (0.1, 0.2, 0.4, 0.8)])


def test_fit_recovers_synthetic_power():
    K, p = power_type_fit([(t, 0.3 * t ** 2.5) for t in (0.05, 0.1, 0.5, 1.0)])
    assert (K, p) == (pytest.approx(0.3, rel=1e-12), pytest.approx(2.5, rel=1e-12))


def test_convexity_table_is_monotone():
    eps, delta = convexity_table(EUCLIDEAN)
    assert np.all(np.diff(delta) >= 0)
    assert delta[0] == pytest.approx(0, abs=1e-12)


def _radial():
    return PathPolyline([[1.5, 0.0], [1.55, 0.0], [1.6, 0.0]])


def test_degenerate_margin():
    g = _radial()
    lhs, rhs, margin = qhlemma_margin(EUCLIDEAN, AnnulusPathPair(g, g))
    assert abs(margin) <= 1e-9
    assert lhs == pytest.approx(math.log(1.6 / 1.5), rel=1e-12)


def test_random_pairs_margins(rng):
    margins = [qhlemma_margin(EUCLIDEAN, random_annulus_pair(rng)).margin for _ in range(20)]
    assert all(math.isfinite(m) for m in margins)


def test_path_leaving_annulus_names_condition_i():
    g1 = PathPolyline([[1.95, 0.0], [2.05, 0.0]])
    with pytest.raises(PreconditionError) as err:
        qhlemma_margin(EUCLIDEAN, AnnulusPathPair(g1, g1))
    assert err.value.condition == "i"


def test_different_starts_name_condition_ii():
    g1 = PathPolyline([[1.5, 0.0], [1.52, 0.0]])
    g2 = PathPolyline([[1.5, 0.01], [1.53, 0.01]])
    with pytest.raises(PreconditionError) as err:
        qhlemma_margin(EUCLIDEAN, AnnulusPathPair(g1, g2))
    assert err.value.condition == "ii"


def test_long_paths_name_condition_iii():
    g = PathPolyline([[1.1, 0.0], [1.9, 0.0]])
    with pytest.raises(PreconditionError) as err:
        qhlemma_margin(EUCLIDEAN, AnnulusPathPair(g, g))
    assert err.value.condition == "iii"


def test_order_of_lengths_names_condition_iv():
    g1 = PathPolyline([[1.5, 0.0], [1.6, 0.0]])
    g2 = PathPolyline([[1.5, 0.0], [1.55, 0.0]])
    with pytest.raises(PreconditionError) as err:
        qhlemma_margin(EUCLIDEAN, AnnulusPathPair(g1, g2))
    assert err.value.condition == "iv"


def test_bad_parametrisation_names_condition_v():
    g = _radial()
    with pytest.raises(PreconditionError) as err:
        qhlemma_margin(EUCLIDEAN, AnnulusPathPair(g, g, params1=(0.0, 0.1, 0.2)))
    assert err.value.condition == "v"


def test_warning_outside_recommended_exponents():
    g = _radial()
    with pytest.warns(OutsideRecommendedRange):
        qhlemma_margin(NormSpec.lp(4), AnnulusPathPair(g, g))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        qhlemma_margin(NormSpec.lp(2.5), AnnulusPathPair(g, g))
