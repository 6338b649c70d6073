"""Polylines and their quasihyperbolic length.

The density ``1/d(z)`` is integrated segment by segment with Gauss-Legendre
quadrature.  A segment is split until its norm length is at most half the
smaller endpoint boundary distance; since ``d`` is 1-Lipschitz this keeps the
density within a factor 2 on every quadrature cell.  A segment that crosses
the boundary can never meet that criterion and is reported as leaving the
domain once the split depth is exhausted.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .domains import Domain
from .errors import InvalidInputError, PathExitsDomainError
from .norms import NormSpec

__all__ = ["PathPolyline", "segment_qh_lengths", "qh_length", "norm_length"]

MAX_SPLIT_DEPTH = 40
_CHUNK = 50_000


class PathPolyline:
    """Ordered vertex list of a polygonal path.

    A single vertex denotes the constant path used for ``x == y``.
    Consecutive vertices must be distinct.
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices):
        V = np.array(vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] < 1 or V.shape[1] < 1:
            raise InvalidInputError("a path needs a (count, dim) vertex array")
        if not np.all(np.isfinite(V)):
            raise InvalidInputError("non-finite path vertex")
        if V.shape[0] > 1 and np.any(np.all(V[1:] == V[:-1], axis=1)):
            raise InvalidInputError("consecutive path vertices must be distinct")
        V.setflags(write=False)
        self.vertices = V

    def __len__(self):
        return self.vertices.shape[0]

    def __repr__(self):
        return f"PathPolyline({len(self)} vertices, dim={self.dim})"

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def start(self) -> np.ndarray:
        return self.vertices[0]

    @property
    def end(self) -> np.ndarray:
        return self.vertices[-1]

    def reversed(self) -> "PathPolyline":
        return PathPolyline(self.vertices[::-1])

    def concat(self, other: "PathPolyline") -> "PathPolyline":
        if not np.array_equal(self.end, other.start):
            raise InvalidInputError("paths do not join")
        return PathPolyline(np.vstack([self.vertices, other.vertices[1:]]))


@lru_cache(maxsize=None)
def _gauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


def segment_qh_lengths(
    domain: Domain,
    norm: NormSpec,
    A: np.ndarray,
    B: np.ndarray,
    nodes: int = 8,
) -> np.ndarray:
    """Quasihyperbolic length of each straight segment ``A[i] -> B[i]``.

    Segments that leave the domain get ``inf``.  No validation of inputs.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    out = np.empty(len(A))
    for s in range(0, len(A), _CHUNK):
        out[s : s + _CHUNK] = _lengths_chunk(domain, norm, A[s : s + _CHUNK], B[s : s + _CHUNK], nodes)
    return out


def _lengths_chunk(domain, norm, A, B, nodes):
    m, dim = A.shape
    t, w = _gauss(nodes)
    total = np.zeros(m)
    bad = np.zeros(m, dtype=bool)
    owner = np.arange(m)
    a, b = A, B
    da = _dist_or_zero(domain, norm, a)
    db = _dist_or_zero(domain, norm, b)
    blocked = domain.segments_blocked(a, b)
    if blocked.any():
        bad[blocked] = True
        keep = ~blocked
        owner, a, b, da, db = owner[keep], a[keep], b[keep], da[keep], db[keep]
    for _ in range(MAX_SPLIT_DEPTH):
        if len(owner) == 0:
            break
        outside = (da <= 0) | (db <= 0)
        if outside.any():
            bad[owner[outside]] = True
            keep = ~outside
            owner, a, b, da, db = owner[keep], a[keep], b[keep], da[keep], db[keep]
        L = norm.rows(b - a)
        dmin = np.minimum(da, db)
        acc = L <= 0.5 * dmin
        if acc.any():
            ia = np.flatnonzero(acc)
            seg = b[ia] - a[ia]
            pts = a[ia, None, :] + t[None, :, None] * seg[:, None, :]
            dd = _dist_or_zero(domain, norm, pts.reshape(-1, dim)).reshape(len(ia), nodes)
            hit = np.any(dd <= 0, axis=1)
            with np.errstate(divide="ignore"):
                val = L[ia] * (w[None, :] / dd).sum(axis=1)
            np.add.at(total, owner[ia], np.where(hit, 0.0, val))
            bad[owner[ia[hit]]] = True
        rest = ~acc
        if not rest.any():
            owner = owner[:0]
            break
        owner, a, b, L, dmin = owner[rest], a[rest], b[rest], L[rest], dmin[rest]
        pieces = np.clip(np.ceil(L / (0.5 * dmin)), 2, 16).astype(int)
        rep = np.repeat(np.arange(len(owner)), pieces)
        starts = np.cumsum(pieces) - pieces
        k = np.arange(len(rep)) - starts[rep]
        f0 = (k / pieces[rep])[:, None]
        f1 = ((k + 1) / pieces[rep])[:, None]
        seg = (b - a)[rep]
        na = a[rep] + f0 * seg
        nb = np.where(f1 == 1.0, b[rep], a[rep] + f1 * seg)
        # breakpoints shared between neighbours: evaluate each once
        dnb = _dist_or_zero(domain, norm, nb)
        dna = np.empty_like(dnb)
        first = k == 0
        dna[first] = da[rest][rep[first]]
        dna[~first] = dnb[np.flatnonzero(~first) - 1]
        owner, a, b, da, db = owner[rep], na, nb, dna, dnb
    if len(owner):
        bad[owner] = True
    total[bad] = np.inf
    return total


def _dist_or_zero(domain, norm, X):
    # distances() is already zero off the domain
    return domain.distances(X, norm)


def qh_length(domain: Domain, norm: NormSpec, path: PathPolyline, nodes: int = 8) -> float:
    """Quasihyperbolic length of a polyline in ``domain``.

    Raises
    ------
    PathExitsDomainError
        If a vertex or a quadrature node falls outside the domain.
    """
    domain._check_norm(norm)
    V = path.vertices
    if V.shape[1] != domain.dim:
        raise InvalidInputError("path dimension does not match the domain")
    if not np.all(domain.inside(V)):
        raise PathExitsDomainError("a path vertex lies outside the domain")
    if len(V) == 1:
        return 0.0
    seg = segment_qh_lengths(domain, norm, V[:-1], V[1:], nodes)
    if not np.all(np.isfinite(seg)):
        i = int(np.flatnonzero(~np.isfinite(seg))[0])
        raise PathExitsDomainError(f"segment {i} leaves the domain")
    return float(seg.sum())


def norm_length(norm: NormSpec, path: PathPolyline) -> float:
    V = path.vertices
    if len(V) < 2:
        return 0.0
    return float(norm.rows(np.diff(V, axis=0)).sum())
