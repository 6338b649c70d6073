"""Numerical quasihyperbolic distance and geodesics in any supported domain.

Pipeline of :func:`qh_distance_numeric`:

1. nodes: leaves of a quadtree (2^dim-tree) over a padded box around the
   endpoints, refined until each cell is at most ``grid_resolution`` times
   the boundary distance at its centre; cells too close to the boundary or
   provably too far (by the j-metric lower bound) are discarded;
2. edges between nodes closer than ~2.3 local cell sizes, weighted by the
   quasihyperbolic length of the straight segment;
3. Dijkstra from ``x`` to ``y``;
4. polyline refinement (:func:`refine_path`) until the relative
   improvement drops below ``target_rel_error / 10``.

Steps 1-4 run for every cell size of the ladder ``grid_resolution * 2^i``
up to ``LADDER_TOP`` and the shortest result wins.

The returned value is the length of an explicit path, hence an upper bound
on the true distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from .closed_form import j_metric
from .domains import Domain
from .errors import (
    EmptyEffectiveSetError,
    InvalidInputError,
    ResolutionTooCoarseError,
)
from .norms import EUCLIDEAN, NormSpec
from .paths import PathPolyline, qh_length, segment_qh_lengths

__all__ = [
    "SolverOptions",
    "qh_distance_numeric",
    "refine_path",
    "uniformity_ratio",
    "graded_nodes",
    "neighbour_edges",
]

NEIGHBOUR_RADIUS = 2.3
LADDER_TOP = 0.5


@dataclass(frozen=True)
class SolverOptions:
    """Tuning knobs of the numerical solver.

    grid_resolution
        Target cell size as a fraction of the local boundary distance.
    quadrature_points_per_segment
        Gauss-Legendre nodes per quadrature cell.
    refine_iterations
        Upper bound on insertion/relaxation rounds.
    target_rel_error
        Refinement stops once a round improves by less than a tenth of this.
    """

    grid_resolution: float = 0.25
    quadrature_points_per_segment: int = 8
    refine_iterations: int = 12
    target_rel_error: float = 1e-2
    box_padding: float = 3.0
    max_box_growth: int = 6
    max_nodes: int = 400_000

    def __post_init__(self):
        if not (self.grid_resolution > 0 and self.quadrature_points_per_segment > 0):
            raise InvalidInputError("solver options must be positive")
        if self.refine_iterations < 0 or self.box_padding <= 0 or self.max_nodes <= 0:
            raise InvalidInputError("solver options must be positive")
        if not self.target_rel_error >= 1e-6:
            raise InvalidInputError("target_rel_error must be >= 1e-6")

    def finer(self) -> "SolverOptions":
        """Half the cell size and twice the refinement effort."""
        return SolverOptions(
            self.grid_resolution / 2,
            self.quadrature_points_per_segment,
            self.refine_iterations * 2,
            self.target_rel_error,
            self.box_padding,
            self.max_box_growth,
            self.max_nodes * 4,
        )


def _dist(domain, norm, X):
    return np.where(domain.inside(X), domain.distances(X, norm), 0.0)


def graded_nodes(domain, norm, lo, hi, resolution, d_keep, prune=None):
    """Centres and sizes of quadtree leaves covering the box ``[lo, hi]``.

    A cell is a leaf once ``size <= resolution * d(centre)``.  Cells whose
    centre is closer than ``d_keep`` to the boundary are dropped at the
    finest level.  ``prune(centres, half_diag)`` may return a mask of cells
    that can be discarded outright.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    dim = lo.size
    h_min = resolution * d_keep
    extent = float((hi - lo).max())
    levels = max(0, math.ceil(math.log2(max(extent / 4.0 / h_min, 1.0))))
    h = h_min * 2.0**levels
    counts = np.maximum(np.ceil((hi - lo) / h).astype(int), 1)
    axes = [lo[i] + (np.arange(counts[i]) + 0.5) * h for i in range(dim)]
    cells = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    offsets = np.stack(
        np.meshgrid(*([np.array([-0.25, 0.25])] * dim), indexing="ij"), axis=-1
    ).reshape(-1, dim)
    centres, sizes = [], []
    while len(cells):
        d = _dist(domain, norm, cells)
        half_diag = float(norm.rows(np.full((1, dim), h / 2.0))[0])
        finest = h <= h_min * (1 + 1e-9)
        drop = (d > 0) & (d + half_diag < d_keep)
        if prune is not None:
            drop |= prune(cells, half_diag, d)
        leaf = (d > 0) & ~drop & (d >= d_keep) & ((resolution * d >= h) | finest)
        centres.append(cells[leaf])
        sizes.append(np.full(int(leaf.sum()), h))
        if finest:
            break
        split = cells[~leaf & ~drop]
        cells = (split[:, None, :] + h * offsets[None, :, :]).reshape(-1, dim)
        h /= 2.0
    if not centres:
        return np.empty((0, dim)), np.empty(0)
    return np.concatenate(centres), np.concatenate(sizes)


def neighbour_edges(nodes, sizes, radius=NEIGHBOUR_RADIUS):
    """Index pairs ``i < j`` with ``|p_i - p_j| <= radius * max(h_i, h_j)``."""
    tree = cKDTree(nodes)
    lists = tree.query_ball_point(nodes, r=radius * sizes * (1 + 1e-9))
    lens = np.fromiter((len(l) for l in lists), dtype=int, count=len(lists))
    I = np.repeat(np.arange(len(nodes)), lens)
    J = np.fromiter((j for l in lists for j in l), dtype=int, count=int(lens.sum()))
    a, b = np.minimum(I, J), np.maximum(I, J)
    keep = a != b
    key = np.unique(a[keep].astype(np.int64) * len(nodes) + b[keep])
    return key // len(nodes), key % len(nodes)


def _shortest(n, I, J, W, src, dst):
    good = np.isfinite(W)
    G = coo_matrix((W[good], (I[good], J[good])), shape=(n, n)).tocsr()
    dist, pred = dijkstra(G, directed=False, indices=src, return_predecessors=True)
    if not np.isfinite(dist[dst]):
        return None
    order = [dst]
    while order[-1] != src:
        order.append(int(pred[order[-1]]))
    return order[::-1]


def _initial_path(domain, norm, x, y, opts):
    dx, dy = _dist(domain, norm, np.vstack([x, y]))
    d_keep = 0.5 * min(dx, dy)
    try:
        U = qh_length(domain, norm, PathPolyline(np.vstack([x, y])), opts.quadrature_points_per_segment)
    except Exception:
        U = math.inf
    bbox = domain.bounding_box()

    def prune(cells, rho, d):
        if not math.isfinite(U):
            return np.zeros(len(cells), dtype=bool)
        with np.errstate(divide="ignore", invalid="ignore"):
            gx = np.maximum(norm.rows(cells - x) - rho, 0.0) / np.minimum(dx, d + rho)
            gy = np.maximum(norm.rows(cells - y) - rho, 0.0) / np.minimum(dy, d + rho)
        return np.log1p(gx) + np.log1p(gy) > U * (1 + 1e-6) + 1e-12

    pad = opts.box_padding * max(dx, dy)
    for _ in range(opts.max_box_growth + 1):
        lo = np.minimum(x, y) - pad
        hi = np.maximum(x, y) + pad
        if bbox is not None:
            lo, hi = np.maximum(lo, bbox[0]), np.minimum(hi, bbox[1])
        nodes, sizes = graded_nodes(domain, norm, lo, hi, opts.grid_resolution, d_keep, prune)
        if len(nodes) + 2 > opts.max_nodes:
            raise ResolutionTooCoarseError(
                f"graph would need {len(nodes)} nodes (> max_nodes={opts.max_nodes})"
            )
        hx = max(opts.grid_resolution * dx, sizes.min() if len(sizes) else 0.0)
        hy = max(opts.grid_resolution * dy, sizes.min() if len(sizes) else 0.0)
        nodes = np.vstack([x, y, nodes])
        sizes = np.concatenate([[hx, hy], sizes])
        I, J = neighbour_edges(nodes, sizes)
        W = segment_qh_lengths(domain, norm, nodes[I], nodes[J], opts.quadrature_points_per_segment)
        order = _shortest(len(nodes), I, J, W, 0, 1)
        if order is not None:
            V = nodes[order]
            if not _touches_box(V, lo, hi, sizes.max(), bbox):
                return V
        pad *= 2.0
    if order is None:
        raise ResolutionTooCoarseError("no path found in the sampling graph; shrink the cell size")
    return V


def _touches_box(V, lo, hi, h, bbox):
    near_lo = V <= lo + h
    near_hi = V >= hi - h
    if bbox is not None:
        near_lo &= ~np.isclose(lo, bbox[0])[None, :]
        near_hi &= ~np.isclose(hi, bbox[1])[None, :]
    return bool(np.any(near_lo | near_hi))


def _directions(dim):
    if dim == 2:
        a = np.arange(8) * (np.pi / 4)
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    eye = np.eye(dim)
    return np.vstack([eye, -eye])


def _dedupe(V):
    keep = np.ones(len(V), dtype=bool)
    keep[1:] = np.any(V[1:] != V[:-1], axis=1)
    return V[keep]


def _relax(domain, norm, V, seg, nodes, sweeps, tol):
    """Red-black pattern search on interior vertices.  Mutates V and seg."""
    n = len(V)
    if n < 3:
        return
    dirs = _directions(V.shape[1])
    K = len(dirs)
    el = norm.rows(np.diff(V, axis=0))
    step = np.zeros(n)
    step[1:-1] = 0.25 * np.minimum(el[:-1], el[1:])
    floor = 1e-7 * step.copy()
    for _ in range(sweeps):
        gained = 0.0
        for parity in (1, 2):
            idx = np.arange(parity, n - 1, 2)
            idx = idx[step[idx] > floor[idx]]
            if len(idx) == 0:
                continue
            cand = V[idx, None, :] + step[idx, None, None] * dirs[None, :, :]
            C = cand.reshape(-1, V.shape[1])
            prev = np.repeat(V[idx - 1], K, axis=0)
            nxt = np.repeat(V[idx + 1], K, axis=0)
            l1 = segment_qh_lengths(domain, norm, prev, C, nodes).reshape(-1, K)
            l2 = segment_qh_lengths(domain, norm, C, nxt, nodes).reshape(-1, K)
            tot = l1 + l2
            best = np.argmin(tot, axis=1)
            r = np.arange(len(idx))
            cur = seg[idx - 1] + seg[idx]
            ok = tot[r, best] < cur * (1 - 1e-14)
            gained += float((cur - tot[r, best])[ok].sum())
            moved = idx[ok]
            V[moved] = cand[r[ok], best[ok]]
            seg[moved - 1] = l1[r[ok], best[ok]]
            seg[moved] = l2[r[ok], best[ok]]
            step[idx[~ok]] *= 0.5
        if gained <= tol * seg.sum():
            if np.all(step[1:-1] <= floor[1:-1] * 1e3):
                break
            if gained == 0.0:
                continue


def refine_path(
    domain: Domain,
    norm: NormSpec,
    path: PathPolyline,
    iterations: int,
    nodes: int = 8,
    min_segment: float = 0.02,
    sweeps: int = 40,
) -> PathPolyline:
    """Shorten a path in quasihyperbolic length, keeping its endpoints.

    Each iteration splits every segment whose quasihyperbolic length exceeds
    half the longest one (and ``min_segment``), then runs pattern-search
    sweeps on the interior vertices.  A move is kept only if it strictly
    reduces the length of the two affected segments and both stay inside the
    domain, so the length never increases.
    """
    if iterations <= 0 or len(path) < 2:
        return path
    V = np.array(path.vertices, dtype=float)
    seg = segment_qh_lengths(domain, norm, V[:-1], V[1:], nodes)
    if not np.all(np.isfinite(seg)):
        # invalid input path: nothing safe to do
        return path
    start_total = float(seg.sum())
    for _ in range(iterations):
        longest = seg.max()
        split = (seg > 0.5 * longest) & (seg > min_segment)
        if split.any():
            mids = 0.5 * (V[:-1][split] + V[1:][split])
            pos = np.flatnonzero(split) + 1
            V = np.insert(V, pos, mids, axis=0)
            seg = segment_qh_lengths(domain, norm, V[:-1], V[1:], nodes)
        _relax(domain, norm, V, seg, nodes, sweeps, 1e-10)
    V = _dedupe(V)
    final = PathPolyline(V)
    total = float(segment_qh_lengths(domain, norm, V[:-1], V[1:], nodes).sum())
    if not total <= start_total:
        return path
    return final


def qh_distance_numeric(
    domain: Domain,
    norm: NormSpec,
    x,
    y,
    opts: SolverOptions = SolverOptions(),
):
    """Numerical quasihyperbolic distance and an approximate geodesic.

    Returns
    -------
    value : float
        Quasihyperbolic length of ``geodesic`` (an upper bound on ``k``).
    geodesic : PathPolyline
    """
    domain._check_norm(norm)
    p, q = domain.require_inside(x, y)
    if np.array_equal(p, q):
        return 0.0, PathPolyline(p[None, :])
    best = None
    failure = None
    for resolution in _ladder(opts.grid_resolution):
        try:
            value, path = _solve_level(domain, norm, p, q, replace(opts, grid_resolution=resolution))
        except ResolutionTooCoarseError as exc:
            failure = exc
            continue
        if best is None or value < best[0]:
            best = (value, path)
    if best is None:
        raise failure
    return best


def _ladder(resolution):
    """``resolution, 2 resolution, 4 resolution, ...`` up to ``LADDER_TOP``.

    Halving the resolution only adds a level, so finer options can never
    return a longer path.
    """
    out = [resolution]
    while out[-1] * 2 <= LADDER_TOP * (1 + 1e-12):
        out.append(out[-1] * 2)
    return out


def _solve_level(domain, norm, p, q, opts):
    nq = opts.quadrature_points_per_segment
    V = _dedupe(_initial_path(domain, norm, p, q, opts))
    path = PathPolyline(V)
    value = qh_length(domain, norm, path, nq)
    # more iterations replay the same prefix, so the value is monotone in them
    for _ in range(opts.refine_iterations):
        new = refine_path(domain, norm, path, 1, nq)
        new_value = qh_length(domain, norm, new, nq)
        gain = value - new_value
        path, value = new, min(value, new_value)
        seg = segment_qh_lengths(domain, norm, path.vertices[:-1], path.vertices[1:], nq)
        if gain < opts.target_rel_error / 10 * value and seg.max() <= 2 * 0.02 + 1e-12:
            break
        if gain < opts.target_rel_error / 100 * value:
            break
    return value, path


def uniformity_ratio(domain: Domain, pairs, opts: SolverOptions = SolverOptions(), norm=EUCLIDEAN):
    """Largest ``k_num / j`` over ``pairs`` (a lower bound on the uniformity constant).

    Pairs with ``j == 0`` are skipped.
    """
    pairs = list(pairs)
    if not pairs:
        raise InvalidInputError("no pairs given")
    best, arg = -math.inf, None
    for x, y in pairs:
        jv = j_metric(domain, x, y, norm)
        if jv == 0:
            continue
        k, _ = qh_distance_numeric(domain, norm, x, y, opts)
        if k / jv > best:
            best, arg = k / jv, (np.asarray(x, float), np.asarray(y, float))
    if arg is None:
        raise EmptyEffectiveSetError("every pair had j = 0")
    return best, arg
