"""Parametric proper subdomains of R^n with exact boundary-distance oracles.

Five families are supported: half-spaces, finitely punctured spaces, open
Euclidean balls, slit planes (plane minus a closed ray) and convex polygons.
Every domain offers a scalar, validated API (:func:`contains`,
:func:`boundary_distance`) and unvalidated vectorised methods used by the
numerical code (:meth:`Domain.inside`, :meth:`Domain.distances`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import (
    InvalidInputError,
    OutsideDomainError,
    UnsupportedCombinationError,
)
from .norms import EUCLIDEAN, NormSpec

__all__ = [
    "Domain",
    "HalfSpace",
    "PuncturedSpace",
    "UnitBall",
    "SlitPlane",
    "ConvexPolygon",
    "as_point",
    "contains",
    "boundary_distance",
    "domain_from_json",
    "domain_to_json",
]

_UNIT_TOL = 1e-9


def as_point(x, dim: Optional[int] = None) -> np.ndarray:
    """Validate ``x`` as a finite point (optionally of dimension ``dim``)."""
    a = np.asarray(x, dtype=float)
    if a.ndim != 1 or a.size < 1:
        raise InvalidInputError(f"a point must be a flat coordinate list, got {x!r}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"non-finite coordinates: {x!r}")
    if dim is not None and a.size != dim:
        raise InvalidInputError(f"dimension mismatch: expected {dim}, got {a.size}")
    return a


def _tuple(v) -> Tuple[float, ...]:
    return tuple(float(c) for c in as_point(v))


def _unit(v, what) -> Tuple[float, ...]:
    t = _tuple(v)
    n = float(np.linalg.norm(t))
    if abs(n - 1.0) > _UNIT_TOL:
        raise InvalidInputError(f"{what} must be a unit vector, has length {n!r}")
    return t


class Domain:
    """Common behaviour of the domain families.

    Subclasses implement ``_signed(X)``: a Euclidean signed distance to the
    boundary for an ``(m, dim)`` array, positive exactly on the domain.
    """

    kind: str = ""

    @property
    def dim(self) -> int:  # pragma: no cover - overridden
        raise NotImplementedError

    def _signed(self, X: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    # -- capabilities -------------------------------------------------
    def supports_norm(self, norm: NormSpec) -> bool:
        return norm.is_euclidean

    def _check_norm(self, norm: NormSpec):
        if not self.supports_norm(norm):
            raise UnsupportedCombinationError(
                f"{self.kind} domains only support the Euclidean norm (got {norm})"
            )

    @property
    def is_convex(self) -> bool:
        return False

    def bounding_box(self):
        """``(lo, hi)`` corners of a box containing the domain, or None."""
        return None

    # -- vectorised, unvalidated --------------------------------------
    def inside(self, X: np.ndarray) -> np.ndarray:
        return self._signed(np.atleast_2d(X)) > 0

    def distances(self, X: np.ndarray, norm: NormSpec = EUCLIDEAN) -> np.ndarray:
        """Boundary distance of each row; 0 for rows outside the domain."""
        return np.maximum(self._signed(np.atleast_2d(X)), 0.0)

    def segments_blocked(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Mask of segments ``A[i] -> B[i]`` known to meet the complement.

        Lets path-length quadrature give up on a crossing segment at once
        instead of subdividing toward the boundary.  The default (no
        segment is known to be blocked) is exact for convex domains.
        """
        return np.zeros(len(A), dtype=bool)

    # -- validated scalar API ----------------------------------------
    def contains(self, x) -> bool:
        p = as_point(x, self.dim)
        return bool(self.inside(p[None, :])[0])

    def boundary_distance(self, x, norm: NormSpec = EUCLIDEAN) -> float:
        self._check_norm(norm)
        p = as_point(x, self.dim)
        if not self.inside(p[None, :])[0]:
            raise OutsideDomainError(f"point {p.tolist()} is not in the {self.kind} domain")
        return float(self.distances(p[None, :], norm)[0])

    def require_inside(self, *points) -> list:
        out = []
        for x in points:
            p = as_point(x, self.dim)
            if not self.inside(p[None, :])[0]:
                raise OutsideDomainError(
                    f"point {p.tolist()} is not in the {self.kind} domain"
                )
            out.append(p)
        return out

    def to_json(self) -> dict:  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True)
class HalfSpace(Domain):
    """``{x : <x, normal> > offset}``."""

    normal: Tuple[float, ...]
    offset: float = 0.0
    kind = "half_space"

    def __post_init__(self):
        object.__setattr__(self, "normal", _unit(self.normal, "half-space normal"))
        object.__setattr__(self, "offset", float(self.offset))
        if len(self.normal) < 2:
            raise InvalidInputError("domains live in dimension >= 2")

    @property
    def dim(self):
        return len(self.normal)

    @property
    def is_convex(self):
        return True

    def _signed(self, X):
        return X @ np.asarray(self.normal) - self.offset

    def to_json(self):
        return {"kind": self.kind, "normal": list(self.normal), "offset": self.offset}


@dataclass(frozen=True)
class PuncturedSpace(Domain):
    """R^n minus finitely many points."""

    punctures: Tuple[Tuple[float, ...], ...]
    kind = "punctured"

    def __post_init__(self):
        pts = tuple(_tuple(p) for p in self.punctures)
        if not pts:
            raise InvalidInputError("at least one puncture is required")
        if len({len(p) for p in pts}) != 1 or len(pts[0]) < 2:
            raise InvalidInputError("punctures must share one dimension >= 2")
        object.__setattr__(self, "punctures", pts)

    @property
    def dim(self):
        return len(self.punctures[0])

    def supports_norm(self, norm):
        return True

    def segments_blocked(self, A, B):
        E = B - A
        ee = np.einsum("ij,ij->i", E, E)
        out = np.zeros(len(A), dtype=bool)
        for p in np.asarray(self.punctures):
            W = p - A
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.clip(np.einsum("ij,ij->i", W, E) / ee, 0.0, 1.0)
            R = W - np.nan_to_num(t)[:, None] * E
            out |= np.einsum("ij,ij->i", R, R) == 0.0
        return out

    def distances(self, X, norm=EUCLIDEAN):
        X = np.atleast_2d(X)
        P = np.asarray(self.punctures)
        if norm.is_euclidean:
            return self._signed(X)
        d = norm.rows(X - P[0])
        for p in P[1:]:
            d = np.minimum(d, norm.rows(X - p))
        return d

    def _signed(self, X):
        P = np.asarray(self.punctures)
        diff = X[:, None, :] - P[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).min(axis=1)

    def to_json(self):
        return {"kind": self.kind, "punctures": [list(p) for p in self.punctures]}


@dataclass(frozen=True)
class UnitBall(Domain):
    """Open Euclidean ball ``|x - center| < radius``."""

    center: Tuple[float, ...]
    radius: float = 1.0
    kind = "unit_ball"

    def __post_init__(self):
        object.__setattr__(self, "center", _tuple(self.center))
        r = float(self.radius)
        if not np.isfinite(r) or r <= 0:
            raise InvalidInputError(f"ball radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "radius", r)
        if len(self.center) < 2:
            raise InvalidInputError("domains live in dimension >= 2")

    @property
    def dim(self):
        return len(self.center)

    @property
    def is_convex(self):
        return True

    def bounding_box(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def _signed(self, X):
        D = X - np.asarray(self.center)
        return self.radius - np.sqrt(np.einsum("ij,ij->i", D, D))

    def to_json(self):
        return {"kind": self.kind, "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class SlitPlane(Domain):
    """R^2 minus the closed ray ``{apex + t*direction : t >= 0}``."""

    apex: Tuple[float, ...]
    direction: Tuple[float, ...] = (1.0, 0.0)
    kind = "slit_plane"

    def __post_init__(self):
        object.__setattr__(self, "apex", _tuple(self.apex))
        object.__setattr__(self, "direction", _unit(self.direction, "slit direction"))
        if len(self.apex) != 2 or len(self.direction) != 2:
            raise InvalidInputError("slit planes are two-dimensional")

    @property
    def dim(self):
        return 2

    def _signed(self, X):
        D = X - np.asarray(self.apex)
        u = np.asarray(self.direction)
        t = np.maximum(D @ u, 0.0)
        R = D - t[:, None] * u
        return np.sqrt(np.einsum("ij,ij->i", R, R))

    def segments_blocked(self, A, B):
        a = np.asarray(self.apex)
        u = np.asarray(self.direction)
        PA, PB = A - a, B - a
        sa, sb = PA @ u, PB @ u
        na = u[0] * PA[:, 1] - u[1] * PA[:, 0]
        nb = u[0] * PB[:, 1] - u[1] * PB[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            # along-slit coordinate where the segment meets the slit's line
            s_hit = sa + (sb - sa) * na / (na - nb)
        crossing = (na * nb <= 0) & (na != nb) & (s_hit >= 0)
        collinear = (na == 0) & (nb == 0) & (np.maximum(sa, sb) >= 0)
        return crossing | collinear

    def to_json(self):
        return {"kind": self.kind, "apex": list(self.apex), "direction": list(self.direction)}


@dataclass(frozen=True)
class ConvexPolygon(Domain):
    """Interior of a strictly convex polygon with counter-clockwise vertices."""

    vertices: Tuple[Tuple[float, ...], ...]
    kind = "convex_polygon"

    def __post_init__(self):
        V = tuple(_tuple(v) for v in self.vertices)
        if len(V) < 3 or any(len(v) != 2 for v in V):
            raise InvalidInputError("a convex polygon needs >= 3 planar vertices")
        A = np.asarray(V)
        E = np.roll(A, -1, axis=0) - A
        En = np.roll(E, -1, axis=0)
        cross = E[:, 0] * En[:, 1] - E[:, 1] * En[:, 0]
        if np.any(cross <= 0):
            raise InvalidInputError(
                "polygon vertices must be in strictly convex counter-clockwise position"
            )
        object.__setattr__(self, "vertices", V)

    @property
    def dim(self):
        return 2

    @property
    def is_convex(self):
        return True

    def bounding_box(self):
        A = np.asarray(self.vertices)
        return A.min(axis=0), A.max(axis=0)

    def _signed(self, X):
        A = np.asarray(self.vertices)
        B = np.roll(A, -1, axis=0)
        E = B - A
        inside = np.ones(len(X), dtype=bool)
        dist = np.full(len(X), np.inf)
        x, y = X[:, 0], X[:, 1]
        for a, e in zip(A, E):
            wx = x - a[0]
            wy = y - a[1]
            inside &= e[0] * wy - e[1] * wx > 0
            t = np.clip((wx * e[0] + wy * e[1]) / (e @ e), 0.0, 1.0)
            dist = np.minimum(dist, np.hypot(wx - t * e[0], wy - t * e[1]))
        return np.where(inside, dist, -dist)

    def to_json(self):
        return {"kind": self.kind, "vertices": [list(v) for v in self.vertices]}


_KINDS = {
    "half_space": (HalfSpace, ("normal", "offset")),
    "punctured": (PuncturedSpace, ("punctures",)),
    "unit_ball": (UnitBall, ("center", "radius")),
    "slit_plane": (SlitPlane, ("apex", "direction")),
    "convex_polygon": (ConvexPolygon, ("vertices",)),
}


def domain_from_json(obj) -> Domain:
    """Build a domain from its JSON object (or JSON text)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InvalidInputError(f"domain spec needs a 'kind' field: {obj!r}")
    try:
        cls, fields = _KINDS[obj["kind"]]
    except KeyError:
        raise InvalidInputError(f"unknown domain kind {obj['kind']!r}") from None
    extra = set(obj) - set(fields) - {"kind"}
    if extra:
        raise InvalidInputError(f"unexpected fields for {obj['kind']}: {sorted(extra)}")
    try:
        return cls(**{k: obj[k] for k in fields if k in obj})
    except TypeError as exc:
        raise InvalidInputError(str(exc)) from None


def domain_to_json(domain: Domain) -> dict:
    return domain.to_json()


def contains(domain: Domain, x) -> bool:
    """True iff ``x`` lies in the (open) domain."""
    return domain.contains(x)


def boundary_distance(domain: Domain, norm: NormSpec, x) -> float:
    """Distance from ``x`` to the domain boundary in ``norm``."""
    return domain.boundary_distance(x, norm)
