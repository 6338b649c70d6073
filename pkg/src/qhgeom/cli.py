"""Command-line front end: ``qhgeom {dist,geodesic,ball,constants,moduli,verify}``.

Exit codes: 0 on success, 1 when ``verify`` finds a failing check and 2 on
invalid input.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from typing import List, Optional

import numpy as np

from . import balls
from .closed_form import (
    MetricKind,
    has_qh_closed_form,
    hyperbolic_ball_distance,
    hyperbolic_halfspace_distance,
    j_metric,
    qh_closed_form,
    qh_punctured_geodesic,
)
from .constants import radius_table, resolve_radius, solve_kappa, solve_lambda
from .domains import HalfSpace, PuncturedSpace, UnitBall, domain_from_json
from .errors import QHGeomError, InvalidInputError
from .geodesic import SolverOptions, qh_distance_numeric
from .moduli import modulus_of_convexity, modulus_of_smoothness, power_type_fit
from .norms import NormSpec
from .svg import render_svg
from .verify import SUITES, run_suite


def parse_point(text: str) -> np.ndarray:
    try:
        p = np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise InvalidInputError(f"bad point {text!r}; expected comma-separated reals") from None
    if p.size == 0 or not np.all(np.isfinite(p)):
        raise InvalidInputError(f"bad point {text!r}")
    return p


def load_domain(text: str):
    """A domain from a JSON file path or an inline JSON object."""
    if os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"domain is neither a file nor valid JSON: {exc}") from None
    return domain_from_json(obj)


def load_norm(text: str) -> NormSpec:
    if os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            return NormSpec.from_json(json.load(fh))
    t = text.strip()
    if t.startswith("{"):
        return NormSpec.from_json(json.loads(t))
    return NormSpec.parse(t)


def _metric(text: str, domain) -> MetricKind:
    if text.strip().lower() in ("hyperbolic", "rho"):
        if isinstance(domain, UnitBall):
            return MetricKind.HYPERBOLIC_BALL
        if isinstance(domain, HalfSpace):
            return MetricKind.HYPERBOLIC_HALFSPACE
        raise InvalidInputError("the hyperbolic metric needs a unit_ball or half_space domain")
    m = MetricKind.parse(text)
    m.check_domain(domain)
    return m


def _solver_options(args) -> SolverOptions:
    return SolverOptions(grid_resolution=args.resolution, refine_iterations=args.refine)


def _write(path: Optional[str], text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _path_csv(V: np.ndarray) -> str:
    head = ",".join(f"x{i}" for i in range(V.shape[1]))
    return head + "\n" + "".join(",".join(repr(float(v)) for v in row) + "\n" for row in V)


def _punctures(domain):
    if isinstance(domain, PuncturedSpace) and domain.dim == 2:
        return [np.asarray(p, dtype=float) for p in domain.punctures]
    return []


def _write_path(path, fmt, V, domain):
    fmt = fmt or ("svg" if path and path.endswith(".svg") else "csv")
    if fmt == "svg":
        if V.shape[1] != 2:
            raise InvalidInputError("SVG output needs planar data")
        _write(path, render_svg([V], _punctures(domain)))
    else:
        _write(path, _path_csv(V))


# ---------------------------------------------------------------------------


def cmd_dist(args) -> int:
    domain = load_domain(args.domain)
    norm = load_norm(args.norm)
    m = _metric(args.metric, domain)
    x, y = domain.require_inside(parse_point(args.from_), parse_point(args.to))
    geodesic = None
    if m is MetricKind.DISTANCE_RATIO:
        value = j_metric(domain, x, y, norm)
    elif m is MetricKind.HYPERBOLIC_BALL:
        value = hyperbolic_ball_distance(domain, x, y)
    elif m is MetricKind.HYPERBOLIC_HALFSPACE:
        value = hyperbolic_halfspace_distance(domain, x, y)
    elif has_qh_closed_form(domain, norm) and not args.numeric:
        value = qh_closed_form(domain, x, y)
    else:
        opts = _solver_options(args)
        value, geodesic = qh_distance_numeric(domain, norm, x, y, opts)
        print(
            f"numeric upper bound; target relative error {opts.target_rel_error:g}, "
            f"resolution {opts.grid_resolution:g}",
            file=sys.stderr,
        )
    print(repr(float(value)))
    if args.geodesic_out:
        if geodesic is None:
            raise InvalidInputError("--geodesic-out needs a numeric k computation (use --numeric)")
        _write_path(args.geodesic_out, None, geodesic.vertices, domain)
    return 0


def cmd_geodesic(args) -> int:
    domain = load_domain(args.domain)
    norm = load_norm(args.norm)
    x, y = domain.require_inside(parse_point(args.from_), parse_point(args.to))
    if isinstance(domain, PuncturedSpace) and len(domain.punctures) == 1 and norm.is_euclidean and not args.numeric:
        c = np.asarray(domain.punctures[0], dtype=float)
        path, nonunique = qh_punctured_geodesic(x - c, y - c, args.samples)
        V = path.vertices + c
        if nonunique:
            print("geodesic is not unique; one of them is returned", file=sys.stderr)
    else:
        value, path = qh_distance_numeric(domain, norm, x, y, _solver_options(args))
        V = path.vertices
        print(f"numeric length {value!r}", file=sys.stderr)
    _write_path(args.out, args.format, V, domain)
    return 0


def _budget(args):
    return balls.Budget().fast() if args.fast else balls.Budget()


def cmd_ball(args) -> int:
    domain = load_domain(args.domain)
    norm = load_norm(args.norm)
    if domain.dim != 2:
        raise InvalidInputError("ball analysis is two-dimensional")
    m = _metric(args.metric, domain)
    center = parse_point(args.center)
    domain.require_inside(center)
    radii = [resolve_radius(t) for t in args.radius.split(",")]
    budget = _budget(args)
    tests = ["convex", "starlike", "close_to_convex", "components"] if args.test == "all" else (
        [] if args.test == "none" else [args.test])
    reports, curves, labels = [], [], []
    for r in radii:
        entry = {"radius": r}
        for t in tests:
            if t == "components":
                fld = balls.ball_field(domain, m, center, r, budget, norm)
                entry["components"] = balls.count_components(fld, r)
            else:
                fn = {"convex": balls.test_convex, "starlike": balls.test_starlike,
                      "close_to_convex": balls.test_close_to_convex}[t]
                entry[t] = fn(domain, m, center, r, budget, norm).to_json()
        if args.svg or args.csv:
            fld = balls.ball_field(domain, m, center, r, budget, norm)
            for c in balls.trace_ball_boundary(fld, r):
                curves.append(c)
                labels.append(f"r={r!r}")
            if args.csv:
                base, ext = os.path.splitext(args.csv)
                target = args.csv if len(radii) == 1 else f"{base}_{len(reports)}{ext or '.csv'}"
                _write(target, fld.to_csv())
        reports.append(entry)
    if args.svg:
        _write(args.svg, render_svg(curves, _punctures(domain), labels))
    text = json.dumps({"metric": m.value, "center": center.tolist(), "balls": reports}, indent=2) + "\n"
    _write(args.report, text)
    return 0


def cmd_constants(args) -> int:
    k, lam = solve_kappa(), solve_lambda()
    tables = {m: [row.to_json() for row in radius_table(m)] for m in ("quasihyperbolic", "distance_ratio")}
    if args.format == "json":
        print(json.dumps({"kappa": k.to_json(), "lambda": lam.to_json(), "tables": tables}, indent=2))
        return 0
    print(f"kappa  = {k.value:.15f}   residual {k.residual():.1e}")
    print(f"lambda = {lam.value:.15f}   residual {lam.residual():.1e}")
    for m in ("quasihyperbolic", "distance_ratio"):
        rows = radius_table(m)
        print(f"\n{m} balls")
        w = max(len(r.domain) for r in rows)
        print(f"{'domain':<{w}}  {'convex':>14}  {'starlike':>14}  {'close-to-convex':>16}")
        for r in rows:
            print(f"{r.domain:<{w}}  {r.convex.label():>14}  {r.starlike.label():>14}  {r.close_to_convex.label():>16}")
    return 0


def cmd_moduli(args) -> int:
    norm = load_norm(args.norm)
    params = [float(t) for t in args.params.split(",")]
    fn = modulus_of_convexity if args.kind == "convexity" else modulus_of_smoothness
    samples = [(t, fn(norm, t).value) for t in params]
    name = "epsilon" if args.kind == "convexity" else "tau"
    _write(args.csv, f"{name},value\n" + "".join(f"{t!r},{v!r}\n" for t, v in samples))
    if args.fit_json:
        try:
            K, p = power_type_fit(samples, args.kind)
            fit = {"kind": args.kind, "K": K, "p": p, "power_type": True}
        except QHGeomError as exc:
            fit = {"kind": args.kind, "power_type": False, "reason": str(exc)}
        _write(args.fit_json, json.dumps(fit, indent=2) + "\n")
    return 0


def cmd_verify(args) -> int:
    records = run_suite(args.suite, seed=args.seed, fast=args.fast)
    text = "".join(json.dumps(r, default=_json_default, sort_keys=True) + "\n" for r in records)
    _write(args.out, text)
    return 0 if all(r["verdict"] == "pass" for r in records) else 1


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qhgeom", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, metric=False):
        p.add_argument("--domain", required=True, help="domain JSON file or inline JSON")
        p.add_argument("--norm", default="euclidean", help="euclidean, l1, linf, p=1.5 or a JSON spec")
        if metric:
            p.add_argument("--metric", default="k", help="k, j or hyperbolic")

    def solver(p):
        p.add_argument("--resolution", type=float, default=0.25, help="solver cell size relative to d(x)")
        p.add_argument("--refine", type=int, default=12, help="refinement rounds")
        p.add_argument("--numeric", action="store_true", help="force the numerical solver")

    p = sub.add_parser("dist", help="distance between two points")
    common(p, metric=True)
    p.add_argument("--from", dest="from_", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--geodesic-out")
    solver(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("geodesic", help="quasihyperbolic geodesic as CSV or SVG")
    common(p)
    p.add_argument("--from", dest="from_", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=["csv", "svg"])
    solver(p)
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("ball", help="metric balls: shape tests, SVG boundaries, CSV fields")
    common(p, metric=True)
    p.add_argument("--center", required=True)
    p.add_argument("--radius", required=True, help="comma-separated; symbols like kappa, log2, log1+sqrt3")
    p.add_argument("--test", default="all", choices=["all", "none", "convex", "starlike", "close_to_convex", "components"])
    p.add_argument("--svg")
    p.add_argument("--csv", help="field dump; with several radii, NAME_0.csv, NAME_1.csv, ...")
    p.add_argument("--report", default="-")
    p.add_argument("--fast", action="store_true")
    p.set_defaults(func=cmd_ball)

    p = sub.add_parser("constants", help="critical radii and the known-radii tables")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("moduli", help="moduli of convexity or smoothness of a planar norm")
    p.add_argument("--norm", default="euclidean")
    p.add_argument("--kind", choices=["convexity", "smoothness"], default="convexity")
    p.add_argument("--params", default="0.1,0.2,0.4,0.8,1.0")
    p.add_argument("--csv", default="-")
    p.add_argument("--fit-json")
    p.set_defaults(func=cmd_moduli)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--suite", choices=sorted(SUITES), default="all")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--fast", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_verify)
    return ap


_NEGATIVE_VALUE = re.compile(r"^-(\d|\.\d|inf|nan)", re.IGNORECASE)


def _join_negative_values(argv: List[str]) -> List[str]:
    """Attach values like ``-1,0`` to their flag so argparse does not read them as options."""
    out: List[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok.startswith("--") and "=" not in tok and nxt is not None and _NEGATIVE_VALUE.match(nxt):
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        return args.func(args)
    except (QHGeomError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
