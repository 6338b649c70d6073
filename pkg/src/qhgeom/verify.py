"""Named reproducibility checks, one per acceptance criterion.

Each check returns a record ``{check, expected, got, tolerance, verdict}``;
verdict is ``"pass"`` or ``"fail"``.  Randomised checks draw from
``numpy.random.default_rng(seed)``.
"""

from __future__ import annotations

import math
import traceback
from typing import Callable, Dict, List

import numpy as np

from . import balls
from .balls import Budget
from .closed_form import (
    hyperbolic_ball_distance,
    hyperbolic_halfspace_distance,
    j_metric,
    mobius_inversion,
    qh_punctured_distance,
)
from .constants import solve_kappa, solve_lambda
from .domains import ConvexPolygon, HalfSpace, PuncturedSpace, SlitPlane, UnitBall
from .geodesic import SolverOptions, qh_distance_numeric
from .moduli import (
    AnnulusPathPair,
    modulus_of_convexity,
    modulus_of_smoothness,
    power_type_fit,
    qhlemma_margin,
    random_annulus_pair,
)
from .norms import EUCLIDEAN, NormSpec
from .paths import PathPolyline

KAPPA_APPROX = 2.83297
LAMBDA_APPROX = 2.97169

PLANE = PuncturedSpace(((0.0, 0.0),))
UPPER = HalfSpace((0.0, 1.0), 0.0)
SQUARE = ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
TWO_POINTS = PuncturedSpace(((1.0, 0.0), (-1.0, 0.0)))
DISK = UnitBall((0.0, 0.0), 1.0)
SLIT = SlitPlane((0.0, 0.0), (1.0, 0.0))

FAST_SOLVER = SolverOptions(grid_resolution=0.5, refine_iterations=0)


def _record(check, expected, got, tolerance, ok):
    return {
        "check": check,
        "expected": expected,
        "got": got,
        "tolerance": tolerance,
        "verdict": "pass" if ok else "fail",
    }


# ---------------------------------------------------------------------------
# 1-3: constants and distances


def check_constants(rng, fast=False):
    k, lam = solve_kappa(), solve_lambda()
    got = {"kappa": k.value, "lambda": lam.value, "kappa_residual": k.residual(), "lambda_residual": lam.residual()}
    ok = (
        abs(k.value - KAPPA_APPROX) <= 5e-6
        and abs(lam.value - LAMBDA_APPROX) <= 5e-6
        and abs(k.residual()) <= 1e-12
        and abs(lam.residual()) <= 1e-12
    )
    return _record("constants", {"kappa": KAPPA_APPROX, "lambda": LAMBDA_APPROX, "residual": 0.0},
                   got, {"value": 5e-6, "residual": 1e-12}, ok)


def _random_pairs(rng, draw, exact, n, limit=5.0):
    out = []
    while len(out) < n:
        x, y = draw(), draw()
        v = exact(x, y)
        if 0 < v <= limit:
            out.append((x, y, v))
    return out


def check_closed_form_oracles(rng, fast=False):
    n = 10 if fast else 50
    opts = SolverOptions()
    half = _random_pairs(
        rng,
        lambda: np.array([rng.uniform(-3, 3), rng.uniform(0.05, 3)]),
        lambda x, y: hyperbolic_halfspace_distance(UPPER, x, y),
        n,
    )
    punct = _random_pairs(
        rng,
        lambda: rng.uniform(0.1, 3) * np.array([math.cos(a := rng.uniform(0, 2 * math.pi)), math.sin(a)]),
        qh_punctured_distance,
        n,
    )
    worst = {}
    for name, dom, pairs in (("half_plane", UPPER, half), ("punctured", PLANE, punct)):
        errs = [abs(qh_distance_numeric(dom, EUCLIDEAN, x, y, opts)[0] - v) / v for x, y, v in pairs]
        worst[name] = max(errs)
    ok = all(v <= 0.01 for v in worst.values())
    return _record("closed_form_oracles", {"max_relative_error": 0.0}, {"max_relative_error": worst}, 0.01, ok)


def check_pi_example(rng, fast=False):
    exact = qh_punctured_distance((1.0, 0.0), (-1.0, 0.0))
    num, path = qh_distance_numeric(PLANE, EUCLIDEAN, (1.0, 0.0), (-1.0, 0.0))
    radii = np.linalg.norm(path.vertices, axis=1)
    dev = float(np.max(np.abs(radii - 1.0)))
    ok = abs(exact - math.pi) <= 1e-12 and abs(num - math.pi) / math.pi <= 0.01 and dev <= 0.02
    return _record(
        "half_turn_distance",
        {"closed_form": math.pi, "numeric": math.pi, "vertex_radius": 1.0},
        {"closed_form": exact, "numeric": num, "max_vertex_radius_deviation": dev},
        {"closed_form": 1e-12, "numeric_rel": 0.01, "vertex_radius": 0.02},
        ok,
    )


# ---------------------------------------------------------------------------
# 4-6 and 10: ball verdicts

def _k_thresholds():
    return [
        ("convex", 0.9, "pass"),
        ("convex", 1.2, "fail"),
        ("starlike", 2.8, "pass"),
        ("starlike", 2.9, "fail"),
        ("close_to_convex", 2.9, "pass"),
        ("close_to_convex", 3.1, "not_pass"),
    ]


_TESTS = {
    "convex": balls.test_convex,
    "starlike": balls.test_starlike,
    "close_to_convex": balls.test_close_to_convex,
}


def _matches(verdict, expected):
    return verdict != "pass" if expected == "not_pass" else verdict == expected


def k_ball_verdicts(budget):
    return {
        f"{prop}@{r}": _TESTS[prop](PLANE, "k", (1.0, 0.0), r, budget).verdict for prop, r, _ in _k_thresholds()
    }


def j_ball_verdicts(budget):
    r_c = math.log(2) - 0.01
    r_s = math.log(1 + math.sqrt(2)) - 0.01
    r_t = math.log(1 + math.sqrt(3))
    c = (0.0, math.sqrt(3))
    out = {
        "convex@log2-0.01": balls.test_convex(PLANE, "j", (1.0, 0.0), r_c, budget).verdict,
        "starlike@log(1+sqrt2)-0.01": balls.test_starlike(PLANE, "j", (1.0, 0.0), r_s, budget).verdict,
    }
    for tag, r in (("-0.05", r_t - 0.05), ("+0.05", r_t + 0.05)):
        fld = balls.ball_field(TWO_POINTS, "j", c, r, budget)
        out[f"components@log(1+sqrt3){tag}"] = balls.count_components(fld, r)
    return out


def convex_domain_verdicts(budget):
    out = {}
    for name, dom, c in (("square", SQUARE, (0.5, 0.5)), ("half_plane", UPPER, (0.0, 1.0))):
        for m in ("k", "j"):
            for r in (0.5, 1.0, 2.0, 4.0):
                out[f"{name}/{m}@{r}"] = balls.test_convex(dom, m, c, r, budget).verdict
    return out


K_EXPECTED = {f"{p}@{r}": e for p, r, e in _k_thresholds()}
J_EXPECTED = {
    "convex@log2-0.01": "pass",
    "starlike@log(1+sqrt2)-0.01": "pass",
    "components@log(1+sqrt3)-0.05": 1,
    "components@log(1+sqrt3)+0.05": 2,
}


def _budget(fast):
    return Budget().fast() if fast else Budget()


def check_k_ball_thresholds(rng, fast=False):
    got = k_ball_verdicts(_budget(fast))
    ok = all(_matches(got[k], e) for k, e in K_EXPECTED.items())
    return _record("k_ball_thresholds", K_EXPECTED, got, "verdict", ok)


def check_j_ball_thresholds(rng, fast=False):
    got = j_ball_verdicts(_budget(fast))
    ok = all(got[k] == e for k, e in J_EXPECTED.items())
    return _record("j_ball_thresholds", J_EXPECTED, got, "verdict", ok)


def check_convex_domains(rng, fast=False):
    got = convex_domain_verdicts(_budget(fast))
    expected = {k: "pass" for k in got}
    ok = all(v == "pass" for v in got.values())
    return _record("convex_domain_balls", expected, got, "verdict", ok)


def check_stability(rng, fast=False):
    base = _budget(fast)
    fine = base.doubled()
    a = {**k_ball_verdicts(base), **j_ball_verdicts(base), **convex_domain_verdicts(base)}
    b = {**k_ball_verdicts(fine), **j_ball_verdicts(fine), **convex_domain_verdicts(fine)}
    changed = {k: [a[k], b[k]] for k in a if a[k] != b[k]}
    return _record("verdict_stability", {"changed": {}}, {"changed": changed, "compared": len(a)}, "verdict", not changed)


# ---------------------------------------------------------------------------
# 7: property suites


def _sample_in(dom, rng, box=2.0, dmin=1e-3):
    bb = dom.bounding_box()
    lo, hi = (np.full(2, -box), np.full(2, box)) if bb is None else (np.maximum(bb[0], -box), np.minimum(bb[1], box))
    while True:
        p = rng.uniform(lo, hi)
        if dom.contains(p) and dom.boundary_distance(p) > dmin:
            return p


def check_properties(rng, fast=False):
    got, ok = {}, True
    # right triangles at the origin of the disk
    worst = 0.0
    for _ in range(100):
        t, s = rng.uniform(0, 1, size=2)
        a = hyperbolic_ball_distance(DISK, (0, 0), (t, 0))
        b = hyperbolic_ball_distance(DISK, (0, 0), (0, s))
        c = hyperbolic_ball_distance(DISK, (t, 0), (0, s))
        worst = max(worst, abs(math.cosh(c) - math.cosh(a) * math.cosh(b)))
    got["pythagoras_max_defect"] = worst
    ok &= worst <= 1e-10
    # inversion changes k by at most a factor 2
    bad = 0
    for _ in range(200):
        x, y = _sample_in(PLANE, rng), _sample_in(PLANE, rng)
        k = qh_punctured_distance(x, y)
        kf = qh_punctured_distance(mobius_inversion(x), mobius_inversion(y))
        bad += not (0.5 * k - 1e-12 <= kf <= 2 * k + 1e-12)
    got["mobius_violations"] = bad
    ok &= bad == 0
    # numeric k dominates j everywhere
    doms = (UPPER, PLANE, TWO_POINTS, DISK, SLIT, SQUARE)
    n = 120 if fast else 1000
    bad = 0
    for i in range(n):
        dom = doms[i % len(doms)]
        x, y = _sample_in(dom, rng), _sample_in(dom, rng)
        k, _ = qh_distance_numeric(dom, EUCLIDEAN, x, y, FAST_SOLVER)
        bad += k < j_metric(dom, x, y) - 1e-12
    got["k_below_j"] = {"violations": bad, "pairs": n}
    ok &= bad == 0
    # disk: rho <= 2 k and k <= rho within the solver budget
    bad_lo = bad_hi = 0
    n = 20 if fast else 100
    for _ in range(n):
        x, y = _sample_in(DISK, rng), _sample_in(DISK, rng)
        k, _ = qh_distance_numeric(DISK, EUCLIDEAN, x, y)
        rho = hyperbolic_ball_distance(DISK, x, y)
        bad_lo += rho > 2 * k + 1e-12
        bad_hi += k > rho * 1.01
    got["disk_comparison_violations"] = {"rho_above_2k": bad_lo, "k_above_rho": bad_hi, "pairs": n}
    ok &= bad_lo == 0 and bad_hi == 0
    # slit plane: k / j grows with the distance from the slit apex
    ratios = []
    for s in (2.0, 8.0, 32.0):
        k, _ = qh_distance_numeric(SLIT, EUCLIDEAN, (s, 1.0), (s, -1.0))
        ratios.append(k / j_metric(SLIT, (s, 1.0), (s, -1.0)))
    got["slit_ratios"] = ratios
    ok &= ratios[0] < ratios[1] < ratios[2]
    expected = {
        "pythagoras_max_defect": 0.0,
        "mobius_violations": 0,
        "k_below_j": 0,
        "disk_comparison_violations": 0,
        "slit_ratios": "strictly increasing",
    }
    return _record("property_suites", expected, got, {"pythagoras": 1e-10, "disk_k_rel": 0.01}, ok)


# ---------------------------------------------------------------------------
# 8-9: moduli


def check_moduli(rng, fast=False):
    l1 = NormSpec.lp(1)
    rho = {t: modulus_of_smoothness(l1, t).value for t in (0.1, 0.5, 1.0)}
    d1 = modulus_of_convexity(EUCLIDEAN, 1.0).value
    conv = [(e, modulus_of_convexity(EUCLIDEAN, e).value) for e in (0.1, 0.2, 0.4, 0.8, 1.0)]
    smooth = [(t, modulus_of_smoothness(l1, t).value) for t in (0.1, 0.2, 0.5, 1.0)]
    _, p_conv = power_type_fit(conv, "convexity")
    _, p_smooth = power_type_fit(smooth, "smoothness")
    ok = (
        all(abs(v - t) <= 1e-3 for t, v in rho.items())
        and abs(d1 - (1 - math.sqrt(3) / 2)) <= 1e-4
        and abs(p_conv - 2) <= 0.05
        and abs(p_smooth - 1) <= 0.05
    )
    return _record(
        "moduli",
        {"l1_smoothness": "tau", "euclid_convexity_1": 1 - math.sqrt(3) / 2, "p_convexity": 2.0, "p_smoothness": 1.0},
        {"l1_smoothness": {str(k): v for k, v in rho.items()}, "euclid_convexity_1": d1,
         "p_convexity": p_conv, "p_smoothness": p_smooth},
        {"l1_smoothness": 1e-3, "euclid_convexity_1": 1e-4, "exponents": 0.05},
        ok,
    )


def check_averaging_estimate(rng, fast=False):
    g = PathPolyline([[1.5, 0.0], [1.55, 0.0], [1.6, 0.0]])
    degenerate = qhlemma_margin(EUCLIDEAN, AnnulusPathPair(g, g)).margin
    margins = [qhlemma_margin(EUCLIDEAN, random_annulus_pair(rng)).margin for _ in range(100)]
    negative = int(sum(m < -1e-6 for m in margins))
    got = {
        "degenerate_margin": degenerate,
        "random_pairs": len(margins),
        "negative_margins": negative,
        "min_margin": min(margins),
        "max_margin": max(margins),
    }
    # the random-pair statistics are reported, not asserted
    return _record("averaging_estimate", {"degenerate_margin": 0.0, "negative_margins": "reported"},
                   got, {"degenerate": 1e-9, "negative": -1e-6}, abs(degenerate) <= 1e-9)


CHECKS: Dict[str, Callable] = {
    "constants": check_constants,
    "closed_form_oracles": check_closed_form_oracles,
    "half_turn_distance": check_pi_example,
    "k_ball_thresholds": check_k_ball_thresholds,
    "j_ball_thresholds": check_j_ball_thresholds,
    "convex_domain_balls": check_convex_domains,
    "property_suites": check_properties,
    "moduli": check_moduli,
    "averaging_estimate": check_averaging_estimate,
    "verdict_stability": check_stability,
}

SUITES = {
    "constants": ["constants"],
    "distances": ["closed_form_oracles", "half_turn_distance", "property_suites"],
    "balls": ["k_ball_thresholds", "j_ball_thresholds", "convex_domain_balls", "verdict_stability"],
    "moduli": ["moduli", "averaging_estimate"],
    "all": list(CHECKS),
}


def run_suite(suite: str = "all", seed: int = 42, fast: bool = False) -> List[dict]:
    """Run the checks of ``suite``; a crashing check is recorded as a failure."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    out = []
    for name in SUITES[suite]:
        rng = np.random.default_rng(seed)
        try:
            rec = CHECKS[name](rng, fast)
        except Exception as exc:  # a failing check must not abort the suite
            rec = _record(name, None, f"{type(exc).__name__}: {exc}", None, False)
            rec["traceback"] = traceback.format_exc(limit=3)
        out.append(rec)
    return out
