"""Closed-form distances: j-metric, hyperbolic ball/half-space, punctured space.

Also the exact quasihyperbolic geodesics of a once-punctured space and the
inversion in the unit sphere.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .domains import Domain, HalfSpace, PuncturedSpace, UnitBall, as_point
from .errors import InvalidInputError, OutsideDomainError, UnsupportedCombinationError
from .norms import EUCLIDEAN, NormSpec
from .paths import PathPolyline

__all__ = [
    "MetricKind",
    "j_metric",
    "hyperbolic_ball_distance",
    "hyperbolic_halfspace_distance",
    "qh_punctured_distance",
    "qh_punctured_geodesic",
    "qh_closed_form",
    "has_qh_closed_form",
    "mobius_inversion",
    "pair_angle",
]


class MetricKind(str, Enum):
    QUASIHYPERBOLIC = "quasihyperbolic"
    DISTANCE_RATIO = "distance_ratio"
    HYPERBOLIC_BALL = "hyperbolic_ball"
    HYPERBOLIC_HALFSPACE = "hyperbolic_halfspace"

    @classmethod
    def parse(cls, text) -> "MetricKind":
        if isinstance(text, cls):
            return text
        aliases = {
            "k": cls.QUASIHYPERBOLIC,
            "qh": cls.QUASIHYPERBOLIC,
            "j": cls.DISTANCE_RATIO,
            "rho_ball": cls.HYPERBOLIC_BALL,
            "rho_halfspace": cls.HYPERBOLIC_HALFSPACE,
        }
        t = str(text).strip().lower()
        if t in aliases:
            return aliases[t]
        try:
            return cls(t)
        except ValueError:
            raise InvalidInputError(f"unknown metric {text!r}") from None

    def check_domain(self, domain: Domain):
        if self is MetricKind.HYPERBOLIC_BALL and not isinstance(domain, UnitBall):
            raise UnsupportedCombinationError("hyperbolic_ball needs a unit_ball domain")
        if self is MetricKind.HYPERBOLIC_HALFSPACE and not isinstance(domain, HalfSpace):
            raise UnsupportedCombinationError("hyperbolic_halfspace needs a half_space domain")


def _acosh1p(z):
    # arcosh(1 + z) without cancellation for small z
    return np.log1p(z + np.sqrt(z * (z + 2.0)))


def j_metric(domain: Domain, x, y, norm: NormSpec = EUCLIDEAN) -> float:
    """Distance ratio metric ``log(1 + |x-y| / min(d(x), d(y)))``."""
    p, q = domain.require_inside(x, y)
    domain._check_norm(norm)
    d = domain.distances(np.vstack([p, q]), norm)
    return float(np.log1p(norm.rows((p - q)[None, :])[0] / d.min()))


def j_from(domain: Domain, center: np.ndarray, X: np.ndarray, norm: NormSpec = EUCLIDEAN):
    """Vectorised j-distance from ``center``; +inf for rows outside."""
    dc = domain.distances(center[None, :], norm)[0]
    dX = domain.distances(X, norm)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log1p(norm.rows(X - center) / np.minimum(dc, dX))
    out[~domain.inside(X)] = np.inf
    return out


def _normalised_ball(ball: UnitBall, *points):
    c = np.asarray(ball.center)
    out = []
    for x in ball.require_inside(*points):
        out.append((x - c) / ball.radius)
    return out


def hyperbolic_ball_distance(ball: UnitBall, x, y) -> float:
    """Hyperbolic distance (density ``2/(1-|x|^2)``) in a Euclidean ball.

    Points are first mapped to the unit ball centred at the origin.
    """
    if not isinstance(ball, UnitBall):
        raise UnsupportedCombinationError("hyperbolic_ball_distance needs a UnitBall")
    p, q = _normalised_ball(ball, x, y)
    return float(_rho_ball(p[None, :], q[None, :])[0])


def _rho_ball(P, Q):
    num = np.sqrt(np.einsum("ij,ij->i", P - Q, P - Q))
    den = np.sqrt((1.0 - np.einsum("ij,ij->i", P, P)) * (1.0 - np.einsum("ij,ij->i", Q, Q)))
    return 2.0 * np.arcsinh(num / den)


def hyperbolic_halfspace_distance(hs: HalfSpace, x, y) -> float:
    """Hyperbolic distance (density ``1/x_n``) in a half-space."""
    if not isinstance(hs, HalfSpace):
        raise UnsupportedCombinationError("hyperbolic_halfspace_distance needs a HalfSpace")
    p, q = hs.require_inside(x, y)
    return float(_rho_half(hs, p[None, :], q[None, :])[0])


def _rho_half(hs, P, Q):
    hp = hs._signed(P)
    hq = hs._signed(Q)
    sq = np.einsum("ij,ij->i", P - Q, P - Q)
    return _acosh1p(sq / (2.0 * hp * hq))


def pair_angle(x: np.ndarray, y: np.ndarray) -> float:
    """Angle in ``[0, pi]`` between nonzero vectors, via atan2."""
    nx = np.linalg.norm(x)
    along = float(y @ x) / nx
    perp = float(np.linalg.norm(y - (along / nx) * x))
    return math.atan2(perp, along)


def qh_punctured_distance(x, y) -> float:
    """Quasihyperbolic distance in R^n minus the origin.

    ``sqrt(alpha^2 + log^2(|x|/|y|))`` with ``alpha`` the angle at the origin.
    """
    p, q = as_point(x), as_point(y)
    if p.size != q.size:
        raise InvalidInputError("dimension mismatch")
    if not (np.any(p != 0) and np.any(q != 0)):
        raise OutsideDomainError("the puncture itself is not in the domain")
    a = pair_angle(p, q)
    lr = math.log(np.linalg.norm(p) / np.linalg.norm(q))
    return math.hypot(a, lr)


def _qh_punctured_rows(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    nP = np.sqrt(np.einsum("ij,ij->i", P, P))
    nQ = np.sqrt(np.einsum("ij,ij->i", Q, Q))
    with np.errstate(divide="ignore", invalid="ignore"):
        along = np.einsum("ij,ij->i", P, Q) / nP
        perp = Q - (along / nP)[:, None] * P
        a = np.arctan2(np.sqrt(np.einsum("ij,ij->i", perp, perp)), along)
        out = np.hypot(a, np.log(nP / nQ))
    out[(nP == 0) | (nQ == 0)] = np.inf
    return out


def has_qh_closed_form(domain: Domain, norm: NormSpec = EUCLIDEAN) -> bool:
    """True when the quasihyperbolic metric of ``domain`` is known exactly."""
    if not norm.is_euclidean:
        return False
    if isinstance(domain, HalfSpace):
        return True
    return isinstance(domain, PuncturedSpace) and len(domain.punctures) == 1


def qh_closed_form(domain: Domain, x, y) -> float:
    """Exact quasihyperbolic distance for half-spaces and once-punctured spaces."""
    if isinstance(domain, HalfSpace):
        return hyperbolic_halfspace_distance(domain, x, y)
    if isinstance(domain, PuncturedSpace) and len(domain.punctures) == 1:
        p, q = domain.require_inside(x, y)
        c = np.asarray(domain.punctures[0])
        return qh_punctured_distance(p - c, q - c)
    raise UnsupportedCombinationError(f"no closed form for k in a {domain.kind} domain")


def qh_closed_form_from(domain: Domain, center: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Vectorised exact k-distance from ``center``; +inf for rows outside."""
    if isinstance(domain, HalfSpace):
        C = np.broadcast_to(center, X.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = _rho_half(domain, C, X)
    elif isinstance(domain, PuncturedSpace) and len(domain.punctures) == 1:
        c = np.asarray(domain.punctures[0])
        out = _qh_punctured_rows(np.broadcast_to(center - c, X.shape), X - c)
    else:
        raise UnsupportedCombinationError(f"no closed form for k in a {domain.kind} domain")
    out = np.where(domain.inside(X), out, np.inf)
    return out


def rho_ball_from(ball: UnitBall, center: np.ndarray, X: np.ndarray) -> np.ndarray:
    c = np.asarray(ball.center)
    P = np.broadcast_to((center - c) / ball.radius, X.shape)
    Q = (X - c) / ball.radius
    with np.errstate(divide="ignore", invalid="ignore"):
        out = _rho_ball(P, Q)
    return np.where(ball.inside(X), out, np.inf)


def _perpendicular_axis(u: np.ndarray) -> np.ndarray:
    # lowest-index coordinate axis not parallel to u, orthogonalised
    for i in range(u.size):
        e = np.zeros(u.size)
        e[i] = 1.0
        w = e - (e @ u) * u
        n = np.linalg.norm(w)
        if n > 1e-8:
            return w / n
    raise InvalidInputError("cannot build a perpendicular direction")  # pragma: no cover


def qh_punctured_geodesic(x, y, samples: int = 64):
    """Exact quasihyperbolic geodesic from ``x`` to ``y`` in R^n minus the origin.

    In the plane through 0, x and y the geodesic is ``r(t) = |x| exp(c t)``
    for polar angle ``t`` in ``[0, alpha]`` with ``c = log(|y|/|x|)/alpha``:
    a logarithmic spiral, a circular arc when ``|x| = |y|``, a radial segment
    when ``alpha = 0``.  Vertices are equally spaced in quasihyperbolic length.

    Returns
    -------
    path : PathPolyline
    nonunique : bool
        True when ``x`` and ``y`` are antipodal as seen from the origin; a
        second, mirrored geodesic exists and one of the two is returned.
    """
    p, q = as_point(x), as_point(y)
    if p.size != q.size:
        raise InvalidInputError("dimension mismatch")
    if int(samples) < 2:
        raise InvalidInputError("samples must be >= 2")
    samples = int(samples)
    rp, rq = float(np.linalg.norm(p)), float(np.linalg.norm(q))
    if rp == 0 or rq == 0:
        raise OutsideDomainError("the puncture itself is not in the domain")
    if np.array_equal(p, q):
        return PathPolyline(p[None, :]), False
    alpha = pair_angle(p, q)
    s = np.linspace(0.0, 1.0, samples)
    lr = math.log(rq / rp)
    e1 = p / rp
    nonunique = False
    if alpha < 1e-12:
        pts = rp * np.exp(lr * s)[:, None] * e1
    else:
        perp = q - (q @ e1) * e1
        if alpha > math.pi - 1e-12 or np.linalg.norm(perp) < 1e-12 * rq:
            e2 = _perpendicular_axis(e1)
            nonunique = True
        else:
            e2 = perp / np.linalg.norm(perp)
        theta = alpha * s
        radius = rp * np.exp(lr * s)
        pts = radius[:, None] * (np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2)
    pts[0], pts[-1] = p, q
    return PathPolyline(pts), nonunique


def mobius_inversion(x) -> np.ndarray:
    """Inversion in the unit sphere, ``x / |x|^2``."""
    p = as_point(x)
    n2 = float(p @ p)
    if n2 == 0:
        raise InvalidInputError("cannot invert the origin")
    return p / n2
