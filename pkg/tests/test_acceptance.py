"""Acceptance criteria, one test per criterion.

Each criterion runs its named check from :mod:`qhgeom.verify` once (seed 42,
full budgets), asserts the stated tolerances on the reported numbers and
prints a single ``criterion N <check>: PASS|FAIL`` line.  Run directly with
``python3 tests/test_acceptance.py`` for the summary alone.
"""

import math
import sys
from functools import lru_cache

import numpy as np
import pytest

from qhgeom import verify

SEED = 42


@lru_cache(maxsize=None)
def record(check):
    return verify.CHECKS[check](np.random.default_rng(SEED), False)


def crit_constants(r):
    g = r["got"]
    assert abs(g["kappa"] - 2.83297) <= 5e-6
    assert abs(g["lambda"] - 2.97169) <= 5e-6
    assert abs(g["kappa_residual"]) <= 1e-12 and abs(g["lambda_residual"]) <= 1e-12


def crit_oracles(r):
    errs = r["got"]["max_relative_error"]
    assert errs["half_plane"] <= 0.01 and errs["punctured"] <= 0.01


def crit_half_turn(r):
    g = r["got"]
    assert g["closed_form"] == pytest.approx(math.pi, abs=1e-12)
    assert abs(g["numeric"] / math.pi - 1) <= 0.01
    assert g["max_vertex_radius_deviation"] <= 0.02


def crit_k_balls(r):
    g = r["got"]
    assert g["convex@0.9"] == "pass" and g["convex@1.2"] == "fail"
    assert g["starlike@2.8"] == "pass" and g["starlike@2.9"] == "fail"
    assert g["close_to_convex@2.9"] == "pass" and g["close_to_convex@3.1"] in ("fail", "inconclusive")


def crit_j_balls(r):
    g = r["got"]
    assert g["convex@log2-0.01"] == "pass"
    assert g["starlike@log(1+sqrt2)-0.01"] == "pass"
    assert g["components@log(1+sqrt3)-0.05"] == 1
    assert g["components@log(1+sqrt3)+0.05"] == 2


def crit_convex_domains(r):
    g = r["got"]
    keys = [f"{d}/{m}@{x}" for d in ("square", "half_plane") for m in ("k", "j") for x in (0.5, 1.0, 2.0, 4.0)]
    assert all(g[k] == "pass" for k in keys)


def crit_properties(r):
    g = r["got"]
    assert g["pythagoras_max_defect"] <= 1e-10
    assert g["mobius_violations"] == 0
    assert g["k_below_j"]["violations"] == 0 and g["k_below_j"]["pairs"] == 1000
    assert g["disk_comparison_violations"]["rho_above_2k"] == 0
    assert g["disk_comparison_violations"]["pairs"] == 100
    s = g["slit_ratios"]
    assert s[0] < s[1] < s[2]


def crit_moduli(r):
    g = r["got"]
    for tau, v in g["l1_smoothness"].items():
        assert abs(v - float(tau)) <= 1e-3
    assert abs(g["euclid_convexity_1"] - (1 - math.sqrt(3) / 2)) <= 1e-4
    assert abs(g["p_convexity"] - 2) <= 0.05
    assert abs(g["p_smoothness"] - 1) <= 0.05


def crit_averaging(r):
    g = r["got"]
    assert abs(g["degenerate_margin"]) <= 1e-9
    assert g["random_pairs"] == 100
    # reported, not asserted
    assert isinstance(g["negative_margins"], int)


def crit_stability(r):
    assert r["got"]["changed"] == {}
    assert r["got"]["compared"] > 0


CRITERIA = [
    (1, "constants", crit_constants),
    (2, "closed_form_oracles", crit_oracles),
    (3, "half_turn_distance", crit_half_turn),
    (4, "k_ball_thresholds", crit_k_balls),
    (5, "j_ball_thresholds", crit_j_balls),
    (6, "convex_domain_balls", crit_convex_domains),
    (7, "property_suites", crit_properties),
    (8, "moduli", crit_moduli),
    (9, "averaging_estimate", crit_averaging),
    (10, "verdict_stability", crit_stability),
]


def evaluate(number, check, assertion):
    rec = record(check)
    try:
        assertion(rec)
        ok = rec["verdict"] == "pass"
        detail = ""
    except (AssertionError, KeyError, TypeError) as exc:
        ok, detail = False, f" ({type(exc).__name__}: {exc})"
    return ok, f"criterion {number:2d} {check}: {'PASS' if ok else 'FAIL'}{detail}", rec


def test_every_criterion_has_a_check():
    assert sorted(c for _, c, _ in CRITERIA) == sorted(verify.CHECKS)


@pytest.mark.parametrize("number, check, assertion", CRITERIA, ids=[c for _, c, _ in CRITERIA])
def test_criterion(number, check, assertion, capsys):
    ok, line, rec = evaluate(number, check, assertion)
    with capsys.disabled():
        print("\n" + line)
    assert ok, rec["got"]


if __name__ == "__main__":
    results = [evaluate(*c) for c in CRITERIA]
    for _, line, _ in results:
        print(line)
    sys.exit(0 if all(ok for ok, _, _ in results) else 1)
