"""Moduli of convexity and smoothness of planar normed spaces.

Also evaluates both sides of an averaging inequality for quasihyperbolic
path lengths in the punctured space ``X \\ {0}``, where moduli of
convexity control how much shorter the midpoint path of two nearby paths is.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .domains import PuncturedSpace
from .errors import InvalidInputError, NotPowerTypeError, PreconditionError
from .norms import EUCLIDEAN, NormSpec
from .paths import PathPolyline, norm_length, qh_length

__all__ = [
    "ModulusEstimate",
    "modulus_of_convexity",
    "modulus_of_smoothness",
    "power_type_fit",
    "AnnulusPathPair",
    "qhlemma_margin",
    "convexity_table",
    "MarginResult",
    "random_annulus_pair",
]

SCAN_ANGLES = 721
FIT_TOLERANCE = 0.1


class OutsideRecommendedRange(UserWarning):
    """The norm is outside the range where the averaging estimate is expected."""


@dataclass(frozen=True)
class ModulusEstimate:
    """Value of a modulus at ``parameter`` with the optimizing pair ``(x, y)``."""

    kind: str
    parameter: float
    value: float
    witness: tuple
    search_resolution: float

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "parameter": self.parameter,
            "value": self.value,
            "witness": [list(map(float, w)) for w in self.witness],
            "search_resolution": self.search_resolution,
        }


def _check_planar(norm: NormSpec):
    if not isinstance(norm, NormSpec):
        raise InvalidInputError("norm must be a NormSpec")


def _sphere(norm: NormSpec, theta) -> np.ndarray:
    """Points of the unit sphere of ``norm`` at polar angles ``theta``."""
    theta = np.asarray(theta, dtype=float)
    U = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    flat = U.reshape(-1, 2)
    return (flat / norm.rows(flat)[:, None]).reshape(U.shape)


def _partner_angle(norm, theta, eps, iters=80):
    """Angle offset ``phi`` in [0, pi] with ``||x(theta) - x(theta + phi)|| = eps``.

    The chord length grows monotonically from 0 to 2 as ``phi`` runs over
    [0, pi], so bisection brackets the solution.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    lo = np.zeros_like(theta)
    hi = np.full_like(theta, math.pi)
    X = _sphere(norm, theta)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        c = norm.rows(X - _sphere(norm, theta + mid))
        small = c < eps
        lo = np.where(small, mid, lo)
        hi = np.where(small, hi, mid)
    return 0.5 * (lo + hi)


def _convexity_gap(norm, theta, eps):
    theta = np.atleast_1d(theta)
    phi = _partner_angle(norm, theta, eps)
    X = _sphere(norm, theta)
    Y = _sphere(norm, theta + phi)
    return 1.0 - norm.rows(X + Y) / 2.0, X, Y


def modulus_of_convexity(norm: NormSpec, epsilon: float, scan: int = SCAN_ANGLES) -> ModulusEstimate:
    """``inf {1 - ||x + y|| / 2 : ||x|| = ||y|| = 1, ||x - y|| = epsilon}`` in the plane.

    Scans ``scan`` angles for ``x``; the partner ``y`` is found by bisection
    in angle, and the best scan point is refined by golden-section search.
    """
    _check_planar(norm)
    eps = float(epsilon)
    if not (0 < eps <= 2) or not math.isfinite(eps):
        raise InvalidInputError(f"epsilon must lie in (0, 2], got {epsilon!r}")
    thetas = np.linspace(0.0, 2 * math.pi, scan)
    vals, _, _ = _convexity_gap(norm, thetas, eps)
    k = int(np.argmin(vals))
    h = thetas[1] - thetas[0]
    f = lambda t: float(_convexity_gap(norm, t, eps)[0][0])
    best_t, best_v = thetas[k], vals[k]
    a, c = best_t - h, best_t + h
    if f(a) > best_v and f(c) > best_v:
        res = optimize.minimize_scalar(f, bracket=(a, best_t, c), method="golden", tol=1e-10)
        if res.fun < best_v:
            best_t = res.x
    v, X, Y = _convexity_gap(norm, best_t, eps)
    # rounding can leave a negative of order 1e-17 on flat sides
    return ModulusEstimate("convexity", eps, float(np.clip(v[0], 0.0, 1.0)), (X[0], Y[0]), float(h))


def _smooth_value(norm, X, Y):
    return (norm.rows(X + Y) + norm.rows(X - Y)) / 2.0 - 1.0


def modulus_of_smoothness(norm: NormSpec, tau: float, scan: int = SCAN_ANGLES) -> ModulusEstimate:
    """``sup {(||x + y|| + ||x - y||) / 2 - 1 : ||x|| = 1, ||y|| = tau}`` in the plane.

    A ``scan x scan`` grid over the two polar angles, then a Nelder-Mead
    refinement started at the best grid pair.  The witness is ``(x, y)``
    with ``||y|| = tau``.
    """
    _check_planar(norm)
    tau = float(tau)
    if not (tau > 0 and math.isfinite(tau)):
        raise InvalidInputError(f"tau must be positive, got {tau!r}")
    a = np.linspace(0.0, 2 * math.pi, scan)
    S = _sphere(norm, a)
    best, arg = -np.inf, (0, 0)
    for i0 in range(0, scan, 64):
        X = S[i0 : i0 + 64, None, :]
        Y = tau * S[None, :, :]
        V = _smooth_value(norm, np.broadcast_to(X, (len(X), scan, 2)).reshape(-1, 2),
                          np.broadcast_to(Y, (len(X), scan, 2)).reshape(-1, 2)).reshape(len(X), scan)
        k = np.unravel_index(np.argmax(V), V.shape)
        if V[k] > best:
            best, arg = float(V[k]), (a[i0 + k[0]], a[k[1]])

    def neg(z):
        return -float(_smooth_value(norm, _sphere(norm, z[0])[None, :], tau * _sphere(norm, z[1])[None, :])[0])

    res = optimize.minimize(neg, np.array(arg), method="Nelder-Mead",
                            options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 2000})
    z = res.x if -res.fun > best else np.array(arg)
    x = _sphere(norm, z[0])
    y = tau * _sphere(norm, z[1])
    v = float(_smooth_value(norm, x[None, :], y[None, :])[0])
    return ModulusEstimate("smoothness", tau, v, (x, y), float(a[1] - a[0]))


def power_type_fit(samples: Sequence, kind: str = "convexity"):
    """Least-squares fit ``value ~ K * parameter ** p`` in log-log coordinates.

    Returns ``(K, p)``.  Convexity moduli must have ``p >= 2`` and smoothness
    moduli ``p <= 2`` (up to ``FIT_TOLERANCE``), otherwise
    :class:`NotPowerTypeError` is raised; so is any non-positive value.
    """
    if kind not in ("convexity", "smoothness"):
        raise InvalidInputError("kind must be 'convexity' or 'smoothness'")
    S = np.asarray([(float(t), float(v)) for t, v in samples])
    if len(S) < 4:
        raise InvalidInputError("power-type fit needs at least 4 samples")
    t, v = S[:, 0], S[:, 1]
    if np.any(t <= 0) or not np.all(np.isfinite(S)):
        raise InvalidInputError("parameters must be positive and finite")
    if t.max() / t.min() < 10.0 * (1 - 1e-12):
        raise InvalidInputError("sample parameters must span at least a decade")
    if np.any(v <= 0):
        raise NotPowerTypeError(f"{kind} modulus vanishes at some sample; not of power type")
    p, logk = np.polyfit(np.log(t), np.log(v), 1)
    if kind == "convexity" and p < 2 - FIT_TOLERANCE:
        raise NotPowerTypeError(f"fitted convexity exponent {p:.3f} is below 2")
    if kind == "smoothness" and p > 2 + FIT_TOLERANCE:
        raise NotPowerTypeError(f"fitted smoothness exponent {p:.3f} is above 2")
    return float(math.exp(logk)), float(p)


# ---------------------------------------------------------------------------
# averaging estimate for quasihyperbolic path lengths

DELTA_KNOTS = 200
ANNULUS = (1.0, 2.0)
_PARAM_TOL = 1e-9


@lru_cache(maxsize=16)
def convexity_table(norm: NormSpec, knots: int = DELTA_KNOTS):
    """``(eps, delta)`` knots of the modulus of convexity on [0, 2]."""
    eps = np.linspace(0.0, 2.0, knots)
    delta = np.zeros(knots)
    # plain angle scan for all knots at once; its error is far below the
    # interpolation error between knots
    thetas = np.linspace(0.0, 2 * math.pi, SCAN_ANGLES)
    T = np.repeat(thetas[None, :], knots - 1, axis=0)
    E = np.repeat(eps[1:, None], SCAN_ANGLES, axis=1)
    vals, _, _ = _convexity_gap(norm, T.ravel(), E.ravel())
    delta[1:] = vals.reshape(knots - 1, SCAN_ANGLES).min(axis=1)
    # a modulus is nondecreasing; remove scan noise
    delta = np.maximum.accumulate(np.clip(delta, 0.0, 1.0))
    eps.setflags(write=False)
    delta.setflags(write=False)
    return eps, delta


@dataclass(frozen=True)
class AnnulusPathPair:
    """Two polylines ``gamma1``, ``gamma2`` from a common start.

    ``params1`` / ``params2`` give the parameter at each vertex; by default
    the norm arc length.  ``gamma1`` is held at its end point from its
    length ``t1`` up to ``t2``, the length of ``gamma2``.  ``R`` bounds the
    quasihyperbolic lengths of both paths.
    """

    gamma1: PathPolyline
    gamma2: PathPolyline
    R: float = 0.1
    params1: Optional[tuple] = None
    params2: Optional[tuple] = None

    def parameters(self, norm: NormSpec):
        out = []
        for g, given in ((self.gamma1, self.params1), (self.gamma2, self.params2)):
            arc = np.concatenate([[0.0], np.cumsum(norm.rows(np.diff(g.vertices, axis=0)))])
            out.append(arc if given is None else np.asarray(given, dtype=float))
        return out


@dataclass(frozen=True)
class MarginResult:
    lhs: float
    rhs: float
    margin: float
    uncertainty: float = 1e-4

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.margin))


def _punctured():
    return PuncturedSpace(((0.0, 0.0),))


def _segment_norm_range(norm, P, samples=257):
    """Min and max of the norm over each segment of the polyline ``P``."""
    if len(P) == 1:
        v = float(norm.rows(P)[0])
        return v, v
    s = np.linspace(0.0, 1.0, samples)
    A, B = P[:-1], P[1:]
    Q = A[:, None, :] + s[None, :, None] * (B - A)[:, None, :]
    v = norm.rows(Q.reshape(-1, 2))
    return float(v.min()), float(v.max())


def _common_grid(params, P, grid):
    """Positions of a polyline with vertex parameters ``params`` at ``grid``."""
    return np.stack([np.interp(grid, params, P[:, i]) for i in range(P.shape[1])], axis=1)


def check_pair(norm: NormSpec, pair: AnnulusPathPair):
    """Verify the five hypotheses; raises :class:`PreconditionError`.

    Returns the quasihyperbolic lengths, the parameter grid and both paths
    resampled on it.
    """
    g1, g2 = pair.gamma1.vertices, pair.gamma2.vertices
    if g1.shape[1] != 2 or g2.shape[1] != 2:
        raise InvalidInputError("paths must be planar")
    s1, s2 = pair.parameters(norm)
    for s, g, name in ((s1, g1, "gamma1"), (s2, g2, "gamma2")):
        if len(s) != len(g):
            raise InvalidInputError(f"{name}: one parameter per vertex is required")
    # (v): parameters are norm arc length
    for s, g in ((s1, g1), (s2, g2)):
        arc = np.concatenate([[0.0], np.cumsum(norm.rows(np.diff(g, axis=0)))])
        if abs(s[0]) > _PARAM_TOL or np.max(np.abs(s - arc)) > _PARAM_TOL * max(1.0, arc[-1]):
            raise PreconditionError("v", "paths must be parameterized by norm arc length from 0")
    t1, t2 = float(s1[-1]), float(s2[-1])
    grid = np.unique(np.concatenate([s1, s2[s2 <= t1], [t1], s2]))
    G1 = _common_grid(s1, g1, grid)
    G2 = _common_grid(s2, g2, grid)
    M = 0.5 * (G1 + G2)
    # (i): annulus 1 <= ||.|| <= 2
    lo, hi = ANNULUS
    for name, P in (("gamma1", G1), ("gamma2", G2), ("midpoint path", M)):
        mn, mx = _segment_norm_range(norm, P)
        if mn < lo - 1e-12 or mx > hi + 1e-12:
            raise PreconditionError("i", f"{name} leaves the annulus {lo} <= ||z|| <= {hi}")
    # (ii): common start
    if norm.rows((g1[0] - g2[0])[None, :])[0] > 1e-12:
        raise PreconditionError("ii", "the paths must start at the same point")
    # (iii): both quasihyperbolic lengths at most R
    dom = _punctured()
    l1 = qh_length(dom, norm, pair.gamma1)
    l2 = qh_length(dom, norm, pair.gamma2)
    if max(l1, l2) > pair.R:
        raise PreconditionError("iii", f"quasihyperbolic length {max(l1, l2):.6g} exceeds R = {pair.R}")
    # (iv): the first path is not longer than the second
    if t1 > t2 + _PARAM_TOL:
        raise PreconditionError("iv", f"gamma1 length {t1:.6g} exceeds gamma2 length {t2:.6g}")
    return l1, l2, grid, G1, G2, M, t1


def _dedupe(P):
    keep = np.concatenate([[True], np.any(np.diff(P, axis=0) != 0, axis=1)])
    return PathPolyline(P[keep])


def qhlemma_margin(norm: NormSpec, pair: AnnulusPathPair, nodes: int = 8) -> MarginResult:
    """Both sides of the averaging estimate and their difference ``lhs - rhs``.

    ``lhs = (l_k(g1) + l_k(g2)) / 2 + int_{t1}^{t2} ||dg2|| / (2 ||g2||)`` and
    ``rhs = l_k((g1 + g2) / 2) + int_0^{t1} delta(||D(g1 - g2)||) / (||g1|| + ||g2||) ds``
    with ``k`` the quasihyperbolic metric of ``X \\ {0}``.  ``delta`` is
    interpolated from :func:`convexity_table`; derivatives are difference
    quotients over the common parameter grid.
    """
    _check_planar(norm)
    p = norm.exponent
    if not (1.5 <= p <= 3):
        warnings.warn(
            f"p = {p} is outside [1.5, 3]; the estimate assumes power type 2 moduli",
            OutsideRecommendedRange,
            stacklevel=2,
        )
    l1, l2, grid, G1, G2, M, t1 = check_pair(norm, pair)
    dom = _punctured()
    lm = qh_length(dom, norm, _dedupe(M))
    # tail of gamma2 beyond t1
    tail = grid >= t1 - 1e-15
    tail_len = qh_length(dom, norm, _dedupe(G2[tail])) if tail.sum() > 1 else 0.0
    lhs = 0.5 * (l1 + l2) + 0.5 * tail_len
    # convexity term on [0, t1]
    head = np.flatnonzero(grid <= t1 + 1e-15)
    integral = 0.0
    if len(head) > 1:
        eps_k, delta_k = convexity_table(norm)
        i = head[:-1]
        ds = grid[i + 1] - grid[i]
        D = ((G1[i + 1] - G1[i]) - (G2[i + 1] - G2[i])) / ds[:, None]
        dval = np.interp(np.clip(norm.rows(D), 0.0, 2.0), eps_k, delta_k)
        x, w = np.polynomial.legendre.leggauss(nodes)
        x, w = 0.5 * (x + 1), 0.5 * w
        Q1 = G1[i, None, :] + x[None, :, None] * (G1[i + 1] - G1[i])[:, None, :]
        Q2 = G2[i, None, :] + x[None, :, None] * (G2[i + 1] - G2[i])[:, None, :]
        den = norm.rows(Q1.reshape(-1, 2)) + norm.rows(Q2.reshape(-1, 2))
        inv = (1.0 / den).reshape(len(i), nodes) @ w
        integral = float(np.sum(dval * ds * inv))
    rhs = lm + integral
    return MarginResult(float(lhs), float(rhs), float(lhs - rhs))


def random_annulus_pair(rng: np.random.Generator, norm: NormSpec = EUCLIDEAN, R: float = 0.1,
                        steps=(3, 4), max_tries: int = 1000) -> AnnulusPathPair:
    """Random pair of short polylines satisfying the five hypotheses."""
    for _ in range(max_tries):
        ang = rng.uniform(0, 2 * math.pi)
        start = rng.uniform(1.2, 1.8) * _sphere(norm, ang)
        paths = []
        for n in steps:
            d = rng.normal(size=(n, 2))
            d *= (rng.uniform(0.2, 1.0, size=n) * R * 1.1 / n / norm.rows(d))[:, None]
            paths.append(np.vstack([start, start + np.cumsum(d, axis=0)]))
        a, b = (PathPolyline(P) for P in paths)
        if norm_length(norm, a) > norm_length(norm, b):
            a, b = b, a
        pair = AnnulusPathPair(a, b, R)
        try:
            check_pair(norm, pair)
        except PreconditionError:
            continue
        return pair
    raise InvalidInputError("could not draw a valid path pair")
