"""Metric balls: distance fields, boundary tracing and shape certificates.

Shape tests sample the ball through a :class:`BallEvaluator`, which gives
the metric distance from the ball centre at arbitrary points.  Exact
formulas are used where they exist (j everywhere, k in half-spaces and
once-punctured spaces, hyperbolic metrics); otherwise a grid Dijkstra field
is interpolated bilinearly and all verdicts carry its error budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import ndimage
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from skimage import measure

from .closed_form import (
    MetricKind,
    has_qh_closed_form,
    j_from,
    qh_closed_form_from,
    rho_ball_from,
)
from .domains import ConvexPolygon, Domain, HalfSpace, UnitBall, as_point
from .errors import InvalidInputError, ResolutionTooCoarseError, UnsupportedCombinationError
from .norms import EUCLIDEAN, NormSpec
from .paths import segment_qh_lengths

__all__ = [
    "GridSpec",
    "ScalarField",
    "ShapeReport",
    "Budget",
    "BallEvaluator",
    "distance_field",
    "trace_ball_boundary",
    "count_components",
    "test_convex",
    "test_starlike",
    "test_close_to_convex",
    "test_starlike_domain_inheritance",
    "ball_window",
    "ball_field",
    "make_evaluator",
    "grid_for_window",
]

# stencil offsets (one per undirected edge direction) for grid Dijkstra
_STENCIL = ((1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (2, -1), (1, 2), (1, -2))
# worst-case length overestimate of the stencil metric
STENCIL_ANISOTROPY = 1.0 / math.cos(math.atan(0.5) / 2) - 1.0


@dataclass(frozen=True)
class GridSpec:
    """Rectangular 2D node grid: node (i, j) sits at ``origin + cell * (i, j)``."""

    origin: tuple
    cell: float
    nx: int
    ny: int

    def __post_init__(self):
        o = as_point(self.origin, 2)
        object.__setattr__(self, "origin", (float(o[0]), float(o[1])))
        if not (self.cell > 0 and math.isfinite(self.cell)):
            raise InvalidInputError("grid cell must be positive")
        if self.nx < 2 or self.ny < 2:
            raise InvalidInputError("grid needs at least 2 x 2 nodes")

    @property
    def xs(self) -> np.ndarray:
        return self.origin[0] + self.cell * np.arange(self.nx)

    @property
    def ys(self) -> np.ndarray:
        return self.origin[1] + self.cell * np.arange(self.ny)

    def nodes(self) -> np.ndarray:
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        return np.stack([X.ravel(), Y.ravel()], axis=1)

    @property
    def lo(self):
        return np.asarray(self.origin)

    @property
    def hi(self):
        return self.lo + self.cell * np.array([self.nx - 1, self.ny - 1])

    def finer(self) -> "GridSpec":
        return GridSpec(self.origin, self.cell / 2, 2 * self.nx - 1, 2 * self.ny - 1)


def grid_for_window(center, half_width, cell) -> GridSpec:
    """Grid with ``center`` on a node covering ``center +- half_width``."""
    c = as_point(center, 2)
    hw = np.broadcast_to(np.asarray(half_width, dtype=float), (2,))
    k = np.ceil(hw / cell).astype(int) + 2
    return GridSpec(tuple(c - k * cell), float(cell), int(2 * k[0] + 1), int(2 * k[1] + 1))


@dataclass
class ScalarField:
    """Metric distance from ``center`` sampled on ``grid`` (+inf off-domain)."""

    grid: GridSpec
    values: np.ndarray
    center: np.ndarray
    metric: MetricKind
    exact: bool = True

    def interpolator(self):
        vals = np.where(np.isfinite(self.values), self.values, 1e300)
        return RegularGridInterpolator(
            (self.grid.xs, self.grid.ys), vals, method="linear", bounds_error=False, fill_value=np.inf
        )

    def to_csv(self) -> str:
        P = self.grid.nodes()
        v = self.values.ravel()
        lines = ["x,y,value"]
        lines += [f"{x!r},{y!r},{val!r}" for (x, y), val in zip(P.tolist(), v.tolist())]
        return "\n".join(lines) + "\n"


@dataclass
class ShapeReport:
    """Outcome of a shape test; ``verdict`` is pass, fail or inconclusive."""

    property: str
    verdict: str
    tolerance: float
    witness: Optional[dict] = None
    samples_used: dict = field(default_factory=dict)
    method: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        return {
            "property": self.property,
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "method": self.method,
            "witness": _jsonable(self.witness),
            "samples_used": self.samples_used,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


@dataclass(frozen=True)
class Budget:
    """Sampling budget of the shape tests.

    ``directions`` rays from the centre; ``pair_points`` boundary points
    checked pairwise for convexity with ``segment_samples`` points per chord;
    rays advance by ``ray_step`` times the local boundary distance.  Traced
    fields use ``field_cells`` nodes across the window (``numeric_cells``
    for Dijkstra fields) and at least
    ``cells_per_dmin`` cells per unit of the smallest boundary distance on the ball.
    """

    directions: int = 720
    pair_points: int = 160
    segment_samples: int = 48
    ray_step: float = 0.02
    field_cells: int = 800
    numeric_cells: int = 250
    cells_per_dmin: float = 2.0
    max_field_nodes: int = 6_000_000
    kaplan_tol: float = 0.05

    def doubled(self) -> "Budget":
        """Twice the samples and half the grid cell."""
        return replace(
            self,
            directions=2 * self.directions,
            pair_points=2 * self.pair_points,
            segment_samples=2 * self.segment_samples,
            ray_step=self.ray_step / 2,
            field_cells=2 * self.field_cells,
            numeric_cells=2 * self.numeric_cells,
            cells_per_dmin=2 * self.cells_per_dmin,
        )

    def fast(self) -> "Budget":
        return replace(
            self,
            directions=self.directions // 2,
            pair_points=self.pair_points // 2,
            segment_samples=max(self.segment_samples // 2, 8),
            ray_step=2 * self.ray_step,
            field_cells=self.field_cells // 2,
            numeric_cells=self.numeric_cells // 2,
            cells_per_dmin=self.cells_per_dmin / 2,
        )


# ---------------------------------------------------------------------------
# distance fields


def _exact_values(domain, metric, center, X, norm):
    if metric is MetricKind.DISTANCE_RATIO:
        return j_from(domain, center, X, norm)
    if metric is MetricKind.QUASIHYPERBOLIC and has_qh_closed_form(domain, norm):
        return qh_closed_form_from(domain, center, X)
    if metric is MetricKind.HYPERBOLIC_HALFSPACE:
        return qh_closed_form_from(domain, center, X)
    if metric is MetricKind.HYPERBOLIC_BALL:
        return rho_ball_from(domain, center, X)
    return None


def _has_exact(domain, metric, norm):
    return metric is not MetricKind.QUASIHYPERBOLIC or has_qh_closed_form(domain, norm)


def distance_field(
    domain: Domain,
    metric,
    center,
    grid: GridSpec,
    norm: NormSpec = EUCLIDEAN,
) -> ScalarField:
    """Metric distance from ``center`` at every node of ``grid``.

    Closed-form metrics are evaluated exactly per node.  Otherwise (k in
    other domains) a single-source Dijkstra runs over the grid graph with a
    16-direction stencil whose edges carry quasihyperbolic segment lengths;
    those values are upper bounds.
    """
    metric = MetricKind.parse(metric)
    metric.check_domain(domain)
    if domain.dim != 2:
        raise InvalidInputError("distance fields are two-dimensional")
    domain._check_norm(norm)
    (c,) = domain.require_inside(center)
    X = grid.nodes()
    exact = _exact_values(domain, metric, c, X, norm)
    if exact is not None:
        vals = exact.reshape(grid.nx, grid.ny)
        return ScalarField(grid, vals, c, metric, True)
    vals = _dijkstra_field(domain, norm, c, grid)
    return ScalarField(grid, vals, c, metric, False)


def _dijkstra_field(domain, norm, c, grid):
    X = grid.nodes()
    n = len(X)
    inside = domain.inside(X)
    idx = np.arange(n).reshape(grid.nx, grid.ny)
    I, J = [], []
    for dx, dy in _STENCIL:
        xs = slice(max(0, -dx), grid.nx - max(0, dx))
        xt = slice(max(0, dx), grid.nx + min(0, dx) if dx < 0 else grid.nx)
        ys = slice(max(0, -dy), grid.ny - max(0, dy))
        yt = slice(max(0, dy), grid.ny + min(0, dy) if dy < 0 else grid.ny)
        a = idx[xs, ys].ravel()
        b = idx[xt, yt].ravel()
        ok = inside[a] & inside[b]
        I.append(a[ok])
        J.append(b[ok])
    I = np.concatenate(I)
    J = np.concatenate(J)
    # the centre joins as an extra node linked to nearby grid nodes
    near = np.flatnonzero(inside & (np.linalg.norm(X - c, axis=1) <= 2.3 * grid.cell))
    if len(near) == 0:
        raise ResolutionTooCoarseError("no grid node near the centre")
    I = np.concatenate([I, np.full(len(near), n)])
    J = np.concatenate([J, near])
    P = np.vstack([X, c[None, :]])
    W = segment_qh_lengths(domain, norm, P[I], P[J])
    good = np.isfinite(W)
    G = coo_matrix((W[good], (I[good], J[good])), shape=(n + 1, n + 1)).tocsr()
    dist = dijkstra(G, directed=False, indices=n)
    vals = dist[:n].reshape(grid.nx, grid.ny)
    vals[~inside.reshape(grid.nx, grid.ny)] = np.inf
    return vals


def _sublevel_checked(fld: ScalarField, r: float) -> np.ndarray:
    if not r > 0:
        raise InvalidInputError("radius must be positive")
    mask = fld.values < r
    if not mask.any():
        raise InvalidInputError("no grid node lies in the ball")
    finite = fld.values[np.isfinite(fld.values)]
    if finite.size and r > finite.max():
        raise ResolutionTooCoarseError("radius exceeds every finite field value")
    if mask[0, :].any() or mask[-1, :].any() or mask[:, 0].any() or mask[:, -1].any():
        raise ResolutionTooCoarseError("the ball touches the grid edge; enlarge the grid")
    return mask


def trace_ball_boundary(fld: ScalarField, r: float) -> list:
    """Closed polylines (``(m, 2)`` arrays) along ``{value = r}``.

    Marching squares with linear interpolation; each polyline repeats its
    first vertex at the end.
    """
    _sublevel_checked(fld, r)
    finite = fld.values[np.isfinite(fld.values)]
    big = max(2.0 * r, float(finite.max()) if finite.size else r) + 1.0
    vals = np.where(np.isfinite(fld.values), fld.values, big)
    out = []
    for cont in measure.find_contours(vals, r):
        xy = fld.grid.lo + fld.grid.cell * cont
        if not np.array_equal(xy[0], xy[-1]):
            xy = np.vstack([xy, xy[:1]])
        out.append(xy)
    return out


def count_components(fld: ScalarField, r: float) -> int:
    """Number of 4-connected components of ``{value < r}`` on the grid."""
    mask = _sublevel_checked(fld, r)
    _, n = ndimage.label(mask)
    return int(n)


# ---------------------------------------------------------------------------
# evaluators


def ball_window(domain: Domain, center: np.ndarray, r: float, norm=EUCLIDEAN):
    """Radius around ``center`` outside which no point of a k- or j-ball lies.

    Uses ``m(x, y) >= log(1 + |x - y| / d(x))`` for m in {k, j, rho}.
    """
    d = float(domain.distances(center[None, :], norm)[0])
    return 1.02 * d * math.expm1(r)


class BallEvaluator:
    """Metric distance from a fixed centre at arbitrary points.

    ``tol(r)`` is the evaluation error budget used by the shape tests.
    """

    def __init__(self, domain, metric, center, norm=EUCLIDEAN, fld: Optional[ScalarField] = None):
        self.domain = domain
        self.metric = MetricKind.parse(metric)
        self.metric.check_domain(domain)
        self.norm = norm
        (self.center,) = domain.require_inside(center)
        self.field = fld
        self.exact = fld is None
        if fld is None and not _has_exact(domain, self.metric, norm):
            raise UnsupportedCombinationError("no exact formula; pass a numeric field")
        self._interp = fld.interpolator() if fld is not None else None

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.exact:
            return _exact_values(self.domain, self.metric, self.center, X, self.norm)
        v = self._interp(X)
        v = np.where(np.isnan(v) | (v > 1e299), np.inf, v)
        return np.where(self.domain.inside(X), v, np.inf)

    def scale(self, X) -> np.ndarray:
        """Local length scale (boundary distance, 0 off-domain)."""
        return self.domain.distances(X, self.norm) * self.domain.inside(X)

    def tol(self, r: float) -> float:
        if self.exact:
            return 1e-9 * (1.0 + r)
        # stencil anisotropy plus bilinear interpolation over one cell
        return 1.2 * STENCIL_ANISOTROPY * r + 1e-6

    def extent(self, r: float, dirs=None):
        """Search radius; per direction when ``dirs`` is given and a grid clips it."""
        w = ball_window(self.domain, self.center, r, self.norm)
        if dirs is None:
            return w
        w = np.full(len(dirs), w)
        if self.field is not None:
            g = self.field.grid
            with np.errstate(divide="ignore", invalid="ignore"):
                hi = (g.hi - self.center) / dirs
                lo = (g.lo - self.center) / dirs
            exit_t = np.nanmin(np.where(dirs != 0, np.maximum(hi, lo), np.inf), axis=1)
            w = np.minimum(w, exit_t)
        return w


def _numeric_field(domain, center, r, budget, norm):
    """Dijkstra k-field on a grid sized from the enclosing j-ball."""
    jev = BallEvaluator(domain, MetricKind.DISTANCE_RATIO, center, norm)
    prof = _ray_profile(jev, r, budget)
    pts = prof["boundary"]
    dmin = float(domain.distances(pts, norm).min())
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    half = np.maximum(np.abs(hi - jev.center), np.abs(lo - jev.center))
    cell = min(float(half.max()) * 2 / budget.numeric_cells, dmin / budget.cells_per_dmin)
    grid = grid_for_window(jev.center, half, cell)
    if grid.nx * grid.ny > budget.max_field_nodes:
        raise ResolutionTooCoarseError(
            f"field would need {grid.nx * grid.ny} nodes (> {budget.max_field_nodes})"
        )
    return distance_field(domain, MetricKind.QUASIHYPERBOLIC, jev.center, grid, norm)


def make_evaluator(domain, metric, center, r, budget, norm=EUCLIDEAN) -> BallEvaluator:
    metric = MetricKind.parse(metric)
    if domain.dim != 2:
        raise InvalidInputError("ball shape analysis is two-dimensional")
    if _has_exact(domain, metric, norm):
        return BallEvaluator(domain, metric, center, norm)
    fld = _numeric_field(domain, as_point(center, 2), r, budget, norm)
    return BallEvaluator(domain, metric, center, norm, fld)


# ---------------------------------------------------------------------------
# ray sampling


def _directions(n):
    a = 2.0 * np.pi * np.arange(n) / n
    return np.stack([np.cos(a), np.sin(a)], axis=1)


def _ray_profile(ev: BallEvaluator, r: float, budget: Budget, angles=None):
    """Sample rays from the centre up to the ball window.

    ``angles`` defaults to ``budget.directions`` equally spaced directions.
    Returns a dict with ``t`` and ``u`` arrays of shape ``(rays, samples)``
    (NaN-padded), the ray directions, and the boundary crossings located by
    bisection.
    """
    c = ev.center
    if angles is None:
        dirs = _directions(budget.directions)
    else:
        angles = np.asarray(angles, dtype=float)
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    n = len(dirs)
    t_max = ev.extent(r, dirs)
    step_max = float(t_max.max()) / 100.0
    if ev.field is not None:
        step_max = min(step_max, ev.field.grid.cell / 2)
    step_min = 1e-7 * float(t_max.max())
    t = np.zeros(n)
    T = [t.copy()]
    U = [ev(np.broadcast_to(c, (n, 2)))]
    active = np.ones(n, dtype=bool)
    while active.any():
        P = c + t[:, None] * dirs
        sc = ev.scale(P)
        step = np.where(sc > 0, np.clip(budget.ray_step * sc, step_min, step_max), step_max)
        t = np.where(active, np.minimum(t + step, t_max), t)
        u = ev(c + t[:, None] * dirs)
        T.append(np.where(active, t, np.nan))
        U.append(np.where(active, u, np.nan))
        active = t < t_max
    T = np.stack(T, axis=1)
    U = np.stack(U, axis=1)
    inside = U < r
    valid = ~np.isnan(U)
    change = (inside[:, 1:] != inside[:, :-1]) & valid[:, 1:] & valid[:, :-1]
    ri, si = np.nonzero(change)
    lo_t, hi_t = T[ri, si], T[ri, si + 1]
    lo_in = inside[ri, si]
    for _ in range(60):
        mid = 0.5 * (lo_t + hi_t)
        m_in = ev(c + mid[:, None] * dirs[ri]) < r
        same = m_in == lo_in
        lo_t = np.where(same, mid, lo_t)
        hi_t = np.where(same, hi_t, mid)
    tb = 0.5 * (lo_t + hi_t)
    return {
        "t": T,
        "u": U,
        "dirs": dirs,
        "t_max": t_max,
        "cross_ray": ri,
        "cross_t": tb,
        "cross_exit": lo_in,
        "boundary": c + tb[:, None] * dirs[ri],
    }


# ---------------------------------------------------------------------------
# shape tests


def _prepare(domain, metric, center, r, budget, norm, evaluator=None):
    if not (r > 0 and math.isfinite(r)):
        raise InvalidInputError("radius must be positive and finite")
    if evaluator is None:
        evaluator = make_evaluator(domain, metric, center, r, budget, norm)
    return evaluator


def _golden(f, lo, hi, maximize, iters=48):
    """Vectorised golden-section search of ``f`` on ``[lo, hi]`` per entry."""
    g = (math.sqrt(5) - 1) / 2
    sign = -1.0 if maximize else 1.0
    a, b = lo.copy(), hi.copy()
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = sign * f(c), sign * f(d)
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c_new = b - g * (b - a)
        d_new = a + g * (b - a)
        c, d = c_new, d_new
        fc, fd = sign * f(c), sign * f(d)
    t = 0.5 * (a + b)
    return t, f(t)


def _bump_scores(ev, r, prof):
    """Largest ``min(u_peak - r, r - u_dip)`` over a peak followed by a dip, per ray.

    Positive exactly when the ray leaves the ball and comes back.  The peak
    and the dip are refined along the ray by golden-section search.  Rays
    that never dip score ``-inf``.
    """
    T, U = prof["t"], prof["u"]
    valid = ~np.isnan(U)
    Uf = np.where(valid, U, -np.inf)
    M = np.maximum.accumulate(Uf, axis=1)
    with np.errstate(invalid="ignore"):
        score = np.where(valid & (M > Uf), np.minimum(M - r, r - Uf), -np.inf)
    k = np.argmax(score, axis=1)
    rows = np.arange(len(U))
    best = score[rows, k]
    out = {"score": best.copy(), "t_peak": np.full(len(U), np.nan), "u_peak": np.full(len(U), np.nan),
           "t_dip": np.full(len(U), np.nan), "u_dip": np.full(len(U), np.nan)}
    idx = np.flatnonzero(np.isfinite(best) | (best == np.inf))
    if len(idx) == 0:
        return out
    last = valid.sum(axis=1) - 1
    p = np.array([int(np.argmax(Uf[i, : k[i] + 1])) for i in idx])
    kk = k[idx]
    dirs = prof["dirs"][idx]
    c = ev.center

    def along(t):
        return ev(c + t[:, None] * dirs)

    def bracket(j):
        lo = T[idx, np.maximum(j - 1, 0)]
        hi = T[idx, np.minimum(j + 1, last[idx])]
        return lo, hi

    lo, hi = bracket(p)
    tp, up = _golden(along, lo, hi, maximize=True)
    # keep the sampled peak when it is higher (e.g. off-domain samples)
    use_s = Uf[idx, p] >= up
    tp = np.where(use_s, T[idx, p], tp)
    up = np.where(use_s, Uf[idx, p], up)
    lo, hi = bracket(kk)
    td, ud = _golden(along, lo, hi, maximize=False)
    use_s = Uf[idx, kk] <= ud
    td = np.where(use_s, T[idx, kk], td)
    ud = np.where(use_s, Uf[idx, kk], ud)
    with np.errstate(invalid="ignore"):
        out["score"][idx] = np.minimum(up - r, r - ud)
    out["t_peak"][idx], out["u_peak"][idx] = tp, up
    out["t_dip"][idx], out["u_dip"][idx] = td, ud
    return out


def test_starlike(domain, metric, center, r, budget: Budget = Budget(), norm=EUCLIDEAN, evaluator=None):
    """Is the ball starlike with respect to its centre?

    A ray from the centre that leaves the ball (``u > r + tol``) and later
    re-enters (``u < r - tol``) is a certified violation.  Each ray gets a
    bump score (see :func:`_bump_scores`); the best-scoring directions are
    refined in angle, since violating directions can form a very thin fan.
    Scores inside the tolerance band give inconclusive.
    """
    ev = _prepare(domain, metric, center, r, budget, norm, evaluator)
    tol = ev.tol(r)
    n = budget.directions
    angles = 2.0 * np.pi * np.arange(n) / n
    prof = _ray_profile(ev, r, budget, angles)
    sc = _bump_scores(ev, r, prof)
    used = {"rays": n, "ray_samples": int(np.isfinite(prof["t"]).sum()), "refined_rays": 0}
    all_angles, all_scores, all_info = [angles], [sc["score"]], [(prof, sc)]
    cand = np.flatnonzero(np.isfinite(sc["score"]) | (sc["score"] == np.inf))
    if len(cand):
        cand = cand[np.argsort(sc["score"][cand])[::-1][:8]]
        h = 2.0 * np.pi / n
        centres = angles[cand]
        for zoom in (1.0, 1.0 / 16):
            fine = (centres[:, None] + zoom * h * np.linspace(-1, 1, 33)[None, :]).ravel()
            p2 = _ray_profile(ev, r, budget, fine)
            s2 = _bump_scores(ev, r, p2)
            used["refined_rays"] += len(fine)
            all_angles.append(fine)
            all_scores.append(s2["score"])
            all_info.append((p2, s2))
            S = s2["score"].reshape(len(centres), -1)
            centres = fine.reshape(len(centres), -1)[np.arange(len(centres)), np.argmax(S, axis=1)]
    best, where = -np.inf, None
    for (p_, s_) in all_info:
        if len(s_["score"]):
            i = int(np.argmax(s_["score"]))
            if s_["score"][i] > best:
                best, where = float(s_["score"][i]), (p_, s_, i)
    if where is None or best < -tol:
        return ShapeReport("starlike", "pass", tol, None, used, "rays")
    p_, s_, i = where
    d = p_["dirs"][i]
    witness = {
        "direction": d,
        "outside_point": ev.center + s_["t_peak"][i] * d,
        "outside_value": float(s_["u_peak"][i]),
        "reentry_point": ev.center + s_["t_dip"][i] * d,
        "reentry_value": float(s_["u_dip"][i]),
        "score": best,
    }
    if best > tol:
        # re-check both points by direct evaluation
        u = ev(np.vstack([witness["outside_point"], witness["reentry_point"]]))
        confirmed = bool(u[0] > r + tol / 10 and u[1] < r - tol / 10)
        return ShapeReport("starlike", "fail" if confirmed else "inconclusive", tol, witness, used, "rays")
    return ShapeReport("starlike", "inconclusive", tol, witness, used, "rays")


def _subsample(P, m):
    if len(P) <= m:
        return P
    idx = np.round(np.linspace(0, len(P), m, endpoint=False)).astype(int)
    return P[idx]


def test_convex(domain, metric, center, r, budget: Budget = Budget(), norm=EUCLIDEAN, evaluator=None):
    """Is the ball convex?

    Boundary points come from the ray crossings; every chord between a pair
    of them is sampled at interior points, which must lie in the domain with
    metric value below ``r + tol``.
    """
    ev = _prepare(domain, metric, center, r, budget, norm, evaluator)
    tol = ev.tol(r)
    prof = _ray_profile(ev, r, budget)
    # order crossings by angle seen from the centre
    B = prof["boundary"]
    ang = np.arctan2(B[:, 1] - ev.center[1], B[:, 0] - ev.center[0])
    B = B[np.lexsort((prof["cross_t"], ang))]
    P = _subsample(B, budget.pair_points)
    m = len(P)
    ia, ib = np.triu_indices(m, k=1)
    s = (np.arange(budget.segment_samples) + 0.5) / budget.segment_samples
    worst, arg = -np.inf, None
    chunk = max(1, 400_000 // budget.segment_samples)
    for a in range(0, len(ia), chunk):
        A = P[ia[a : a + chunk]]
        Bp = P[ib[a : a + chunk]]
        pts = A[:, None, :] + s[None, :, None] * (Bp - A)[:, None, :]
        u = ev(pts.reshape(-1, 2)).reshape(len(A), -1)
        exc = u - r
        k = np.unravel_index(np.argmax(exc), exc.shape)
        if exc[k] > worst:
            worst = float(exc[k])
            arg = (A[k[0]], Bp[k[0]], pts[k], float(s[k[1]]))
    used = {"boundary_points": m, "pairs": len(ia), "segment_samples": budget.segment_samples}
    if worst <= tol:
        return ShapeReport("convex", "pass", tol, None, used, "pairwise chords")
    a, b, p, sp = arg
    # re-check around the worst point with 10x denser chord sampling
    h = 1.0 / budget.segment_samples
    ss = np.clip(sp + np.linspace(-h, h, 21), 0, 1)
    uu = ev(a[None, :] + ss[:, None] * (b - a)[None, :])
    confirmed = bool(np.max(uu) - r > tol / 10) if np.isfinite(np.max(uu)) else True
    witness = {
        "pair": [a, b],
        "segment_point": p,
        "value": worst + r if math.isfinite(worst) else math.inf,
        "in_domain": bool(domain.inside(p[None, :])[0]),
    }
    return ShapeReport("convex", "fail" if confirmed else "inconclusive", tol, witness, used, "pairwise chords")


def _field_for_shape(ev: BallEvaluator, r, budget):
    prof = _ray_profile(ev, r, budget)
    pts = prof["boundary"]
    if len(pts) == 0:
        raise ResolutionTooCoarseError("no boundary crossing found")
    if ev.field is not None:
        return ev.field, prof
    dmin = float(ev.scale(pts).min())
    half = np.abs(pts - ev.center).max(axis=0) * 1.05
    cell = min(2 * float(half.max()) / budget.field_cells, dmin / budget.cells_per_dmin)
    nodes = np.prod(np.ceil(half / cell) * 2 + 5)
    if nodes > budget.max_field_nodes:
        cell *= math.sqrt(nodes / budget.max_field_nodes)
    grid = grid_for_window(ev.center, half, cell)
    return distance_field(ev.domain, ev.metric, ev.center, grid, ev.norm), prof


def ball_field(domain, metric, center, r, budget: Budget = Budget(), norm=EUCLIDEAN) -> ScalarField:
    """Distance field on a grid sized to enclose the ball of radius ``r``.

    The window comes from the boundary crossings of rays from the centre;
    the cell resolves the smallest boundary distance on the ball.
    """
    ev = make_evaluator(domain, metric, center, r, budget, norm)
    fld, _ = _field_for_shape(ev, float(r), budget)
    return fld


def _turning(poly):
    """Unwrapped tangent angle at each segment of a closed polyline."""
    D = np.diff(poly, axis=0)
    keep = np.hypot(D[:, 0], D[:, 1]) > 0
    D = D[keep]
    a = np.arctan2(D[:, 1], D[:, 0])
    turns = np.angle(np.exp(1j * (np.roll(a, -1) - a)))
    T = np.concatenate([[a[0]], a[0] + np.cumsum(turns[:-1])])
    return T, float(turns.sum()), np.flatnonzero(keep)


def _max_backturn(T, total):
    """Largest ``T[i] - T[j]`` over forward arcs ``i <= j`` of the closed curve."""
    T2 = np.concatenate([T, T + total])
    run = np.maximum.accumulate(T2)
    arg = np.zeros(len(T2), dtype=int)
    best_i = 0
    for k in range(len(T2)):
        if T2[k] >= T2[best_i]:
            best_i = k
        arg[k] = best_i
    drops = run - T2
    j = int(np.argmax(drops))
    return float(drops[j]), int(arg[j]) % len(T), j % len(T)


def test_close_to_convex(domain, metric, center, r, budget: Budget = Budget(), norm=EUCLIDEAN, evaluator=None):
    """Can the complement of the ball be covered by non-crossing half-lines?

    1. Radial cover: if no ray from the centre re-enters the ball, the
       outward rays from complement points are such a cover (pass).
    2. Otherwise the ball is traced on a grid.  A bounded complement
       component enclosed by the ball in every sampled direction is a
       certified obstruction (fail).  A single Jordan boundary is judged by
       the tangent-turning criterion: close-to-convex iff the tangent never
       turns back by more than pi along a boundary arc.
    """
    ev = _prepare(domain, metric, center, r, budget, norm, evaluator)
    star = test_starlike(domain, metric, center, r, budget, norm, ev)
    if star.verdict == "pass":
        return ShapeReport("close_to_convex", "pass", star.tolerance, None, star.samples_used, "radial cover")
    fld, _ = _field_for_shape(ev, r, budget)
    used = dict(star.samples_used, field_nodes=int(fld.grid.nx * fld.grid.ny), cell=fld.grid.cell)
    contours = trace_ball_boundary(fld, r)
    comp_mask = ~(fld.values < r)
    lab, ncomp = ndimage.label(comp_mask)
    edge = set(np.unique(np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]])).tolist())
    for k in range(1, ncomp + 1):
        if k in edge:
            continue
        ii = np.argwhere(lab == k)
        vals = fld.values[lab == k]
        w = fld.grid.lo + fld.grid.cell * ii[int(np.argmax(np.where(np.isfinite(vals), vals, 1e300)))]
        if _enclosed(ev, w, r, budget):
            witness = {"enclosed_point": w, "component_nodes": int(len(ii))}
            return ShapeReport("close_to_convex", "fail", budget.kaplan_tol, witness, used, "enclosed complement")
        return ShapeReport("close_to_convex", "inconclusive", budget.kaplan_tol,
                           {"bounded_complement_point": w}, used, "enclosed complement")
    if len(contours) != 1:
        return ShapeReport("close_to_convex", "inconclusive", budget.kaplan_tol,
                           {"components": len(contours)}, used, "tangent turning")
    poly = contours[0]
    area = 0.5 * np.sum(poly[:-1, 0] * poly[1:, 1] - poly[1:, 0] * poly[:-1, 1])
    if area < 0:
        poly = poly[::-1]
    T, total, seg_idx = _turning(poly)
    drop, i, j = _max_backturn(T, total)
    used["boundary_vertices"] = len(poly)
    tol = budget.kaplan_tol
    witness = {
        "arc_start": poly[seg_idx[i]],
        "arc_end": poly[seg_idx[j]],
        "back_turn": drop,
    }
    if drop < math.pi - tol:
        witness = None
        verdict = "pass"
    elif drop > math.pi + tol:
        fine = _recheck_backturn(ev, poly, seg_idx, T, i, j, fld.grid.cell)
        witness["back_turn_recheck"] = fine
        verdict = "fail" if fine > math.pi + tol / 10 else "inconclusive"
    else:
        verdict = "inconclusive"
    return ShapeReport("close_to_convex", verdict, tol, witness, used, "tangent turning")


def _tangent_angle(ev, p, h):
    e = np.array([[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]])
    v = ev(p[None, :] + e)
    g = np.array([v[0] - v[1], v[2] - v[3]])
    # ball on the left: tangent is the outward gradient turned a quarter counter-clockwise
    return math.atan2(g[0], -g[1])


def _recheck_backturn(ev, poly, seg_idx, T, i, j, cell):
    """Back-turn with end tangents re-evaluated from the metric gradient."""
    out = T[i] - T[j]
    for k, sign in ((i, 1.0), (j, -1.0)):
        v = seg_idx[k]
        p = 0.5 * (poly[v] + poly[v + 1])
        a = _tangent_angle(ev, p, cell / 10)
        corr = math.remainder(a - T[k], 2 * math.pi)
        out += sign * corr
    return out


def _enclosed(ev, w, r, budget):
    """True if every sampled ray from ``w`` meets the ball."""
    n = budget.directions
    dirs = _directions(n)
    t_max = 2.5 * ev.extent(r) + float(np.linalg.norm(w - ev.center))
    m = 4000
    ts = np.linspace(0, t_max, m)[1:]
    hit = np.zeros(n, dtype=bool)
    for a in range(0, n, 64):
        P = w[None, None, :] + ts[None, :, None] * dirs[a : a + 64, None, :]
        u = ev(P.reshape(-1, 2)).reshape(len(P), -1)
        hit[a : a + 64] = np.any(u < r - ev.tol(r), axis=1)
    return bool(hit.all())


def _starlike_about(domain, center) -> bool:
    return isinstance(domain, (ConvexPolygon, UnitBall, HalfSpace)) and domain.contains(center)


def test_starlike_domain_inheritance(
    domain, metric, center, radii=(0.5, 1.0, 2.0, 4.0, 8.0), budget: Budget = Budget(), norm=EUCLIDEAN
):
    """Starlikeness of balls about ``center`` in a domain starlike about it.

    Runs :func:`test_starlike` for each radius; the combined verdict is the
    worst one.
    """
    if not _starlike_about(domain, as_point(center)):
        raise UnsupportedCombinationError("domain must be a convex polygon, ball or half-space")
    reports = [test_starlike(domain, metric, center, float(r), budget, norm) for r in radii]
    order = {"pass": 0, "inconclusive": 1, "fail": 2}
    worst = max(range(len(reports)), key=lambda k: order[reports[k].verdict])
    rep = reports[worst]
    witness = None if rep.verdict == "pass" else dict(rep.witness or {}, radius=float(radii[worst]))
    used = {"radii": [float(r) for r in radii], "rays": budget.directions}
    return ShapeReport("starlike", rep.verdict, max(x.tolerance for x in reports), witness, used, "radius ladder")
