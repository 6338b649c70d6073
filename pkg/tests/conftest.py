import numpy as np
import pytest

from qhgeom.domains import ConvexPolygon, HalfSpace, PuncturedSpace, SlitPlane, UnitBall

PLANE = PuncturedSpace(((0.0, 0.0),))
TWO_POINTS = PuncturedSpace(((1.0, 0.0), (-1.0, 0.0)))
UPPER = HalfSpace((0.0, 1.0), 0.0)
DISK = UnitBall((0.0, 0.0), 1.0)
SLIT = SlitPlane((0.0, 0.0), (1.0, 0.0))
SQUARE = ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
HEXAGON = ConvexPolygon(tuple((2 * np.cos(a), np.sin(a)) for a in np.linspace(0, 2 * np.pi, 7)[:-1]))

DOMAINS = {
    "punctured": PLANE,
    "two_points": TWO_POINTS,
    "half_plane": UPPER,
    "disk": DISK,
    "slit": SLIT,
    "square": SQUARE,
    "hexagon": HEXAGON,
}


def sample_inside(domain, rng, n, box=2.0, dmin=1e-3):
    """Rejection sample ``n`` points of ``domain`` with boundary distance above ``dmin``."""
    bb = domain.bounding_box()
    lo, hi = np.full(2, -box), np.full(2, box)
    if bb is not None:
        lo, hi = np.maximum(bb[0], lo), np.minimum(bb[1], hi)
    out = []
    while sum(len(o) for o in out) < n:
        X = rng.uniform(lo, hi, size=(4 * n, 2))
        keep = domain.inside(X)
        X = X[keep]
        out.append(X[domain.distances(X) > dmin])
    return np.concatenate(out)[:n]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
