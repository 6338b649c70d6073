"""Critical radii for metric balls: the transcendental constants and the tables.

Both transcendental radii are roots of

    g(p) = cos(sqrt(p^2 - 1)) + sqrt(p^2 - 1) * sin(sqrt(p^2 - 1)),

``g(kappa) = exp(-1)`` on ``[1, pi]`` and ``g(lambda) = 0`` on ``(2, pi)``.
With ``s = sqrt(p^2 - 1)`` one has ``g'(p) = p cos(s)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Tuple

from .closed_form import MetricKind
from .errors import InvalidInputError

__all__ = [
    "CriticalRadius",
    "TableRow",
    "g",
    "g_prime",
    "bisect_newton",
    "solve_kappa",
    "solve_lambda",
    "radius_table",
    "resolve_radius",
]


def g(p: float) -> float:
    s = math.sqrt(max(p * p - 1.0, 0.0))
    return math.cos(s) + s * math.sin(s)


def g_prime(p: float) -> float:
    s = math.sqrt(max(p * p - 1.0, 0.0))
    return p * math.cos(s)


def bisect_newton(
    f: Callable[[float], float],
    fprime: Callable[[float], float],
    lo: float,
    hi: float,
    bisect_tol: float = 1e-8,
    tol: float = 1e-15,
    max_newton: int = 50,
) -> float:
    """Root of ``f`` in ``[lo, hi]``: bisection down to ``bisect_tol`` then Newton.

    Newton steps that leave the current bracket fall back to bisection, so
    the iteration never escapes the sign-change interval.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise InvalidInputError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(max_newton):
        fx = f(x)
        if fx == 0:
            return x
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
        else:
            hi = x
        d = fprime(x)
        step = fx / d if d != 0 else math.inf
        nx = x - step
        if not (lo <= nx <= hi):
            nx = 0.5 * (lo + hi)
        if abs(nx - x) <= tol * max(1.0, abs(x)):
            return nx
        x = nx
    return x


@dataclass(frozen=True)
class CriticalRadius:
    """A named critical radius.

    ``value`` is ``math.inf`` for "every radius" and ``None`` for an
    unknown entry; ``sharp`` is False for radii known not to be sharp.
    """

    name: str
    value: Optional[float]
    defining_equation: str = ""
    bracket: Optional[Tuple[float, float]] = None
    source: str = ""
    sharp: bool = True
    expression: str = ""

    @property
    def known(self) -> bool:
        return self.value is not None

    def residual(self) -> Optional[float]:
        if self.name == "kappa":
            return abs(g(self.value) - math.exp(-1.0))
        if self.name == "lambda":
            return abs(g(self.value))
        return None

    def to_json(self) -> dict:
        v = self.value
        return {
            "name": self.name,
            "value": None if v is None else ("inf" if math.isinf(v) else v),
            "expression": self.expression,
            "defining_equation": self.defining_equation,
            "bracket": list(self.bracket) if self.bracket else None,
            "source": self.source,
            "sharp": self.sharp,
        }

    def label(self) -> str:
        if self.value is None:
            return "?"
        text = self.expression or ("inf" if math.isinf(self.value) else f"{self.value:.6g}")
        return text + ("" if self.sharp else "*")


_G_TEXT = "cos(sqrt(p^2-1)) + sqrt(p^2-1)*sin(sqrt(p^2-1))"


@lru_cache(maxsize=None)
def solve_kappa(bisect_tol: float = 1e-8) -> CriticalRadius:
    """Critical starlikeness radius of k-balls in the punctured space (~2.83297)."""
    root = bisect_newton(lambda p: g(p) - math.exp(-1.0), g_prime, 1.0, math.pi, bisect_tol)
    return CriticalRadius(
        "kappa", root, f"{_G_TEXT} = exp(-1)", (1.0, math.pi), "k-table: R^n minus 0, starlike",
        True, "kappa",
    )


@lru_cache(maxsize=None)
def solve_lambda(bisect_tol: float = 1e-8) -> CriticalRadius:
    """Critical close-to-convexity radius of k-balls in the punctured plane (~2.97169)."""
    lo, hi = 2.0 + 1e-9, math.pi - 1e-9
    root = bisect_newton(g, g_prime, lo, hi, bisect_tol)
    return CriticalRadius(
        "lambda", root, f"{_G_TEXT} = 0", (2.0, math.pi), "k-table: R^2 minus 0, close-to-convex",
        True, "lambda",
    )


@dataclass(frozen=True)
class TableRow:
    domain: str
    convex: CriticalRadius
    starlike: CriticalRadius
    close_to_convex: CriticalRadius
    refs: Tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "domain": self.domain,
            "convex": self.convex.to_json(),
            "starlike": self.starlike.to_json(),
            "close_to_convex": self.close_to_convex.to_json(),
        }


def _c(name, value, expression, source, sharp=True):
    return CriticalRadius(name, value, bracket=None, source=source, sharp=sharp, expression=expression)


def _inf(source):
    return _c("infinity", math.inf, "inf", source)


def _unknown(source):
    return _c("unknown", None, "?", source)


def radius_table(metric) -> list:
    """Rows of the known-radii table for ``quasihyperbolic`` or ``distance_ratio``."""
    m = MetricKind.parse(metric)
    kap, lam = solve_kappa(), solve_lambda()
    if m is MetricKind.QUASIHYPERBOLIC:
        src = "k-table"
        one = _c("one", 1.0, "1", src)
        half_pi_ns = _c("pi/2", math.pi / 2, "pi/2", src, sharp=False)
        lam_ns = CriticalRadius("lambda", lam.value, lam.defining_equation, lam.bracket, src, False, "lambda")
        return [
            TableRow("R^2 \\ {0}", one, kap, lam),
            TableRow("R^n \\ {0}", one, kap, lam_ns),
            TableRow("convex, R^n", _inf(src), _inf(src), _inf(src)),
            TableRow("convex, Banach space", _inf(src), _inf(src), _inf(src)),
            TableRow("starlike w.r.t. x, R^n", _unknown(src), _inf(src), _inf(src)),
            TableRow("general (n = 2)", one, half_pi_ns, half_pi_ns),
            TableRow("general (n >= 2)", _unknown(src), half_pi_ns, half_pi_ns),
        ]
    if m is MetricKind.DISTANCE_RATIO:
        src = "j-table"
        log2 = _c("log2", math.log(2.0), "log 2", src)
        log12 = _c("log(1+sqrt2)", math.log(1.0 + math.sqrt(2.0)), "log(1+sqrt2)", src)
        log13 = _c("log(1+sqrt3)", math.log(1.0 + math.sqrt(3.0)), "log(1+sqrt3)", src)
        log13_ns = _c("log(1+sqrt3)", log13.value, "log(1+sqrt3)", src, sharp=False)
        return [
            TableRow("convex, R^n", _inf(src), _inf(src), _inf(src)),
            TableRow("convex, Banach space", _inf(src), _inf(src), _inf(src)),
            TableRow("starlike w.r.t. x, R^n", log2, _inf(src), _inf(src)),
            TableRow("general (n = 2)", log2, log12, log13),
            TableRow("general (n >= 2)", log2, log12, log13_ns),
        ]
    raise InvalidInputError(f"no radius table for metric {m.value}")


_SYMBOLS = {
    "log2": lambda: math.log(2.0),
    "log1+sqrt2": lambda: math.log(1.0 + math.sqrt(2.0)),
    "log1+sqrt3": lambda: math.log(1.0 + math.sqrt(3.0)),
    "kappa": lambda: solve_kappa().value,
    "lambda": lambda: solve_lambda().value,
    "pi/2": lambda: math.pi / 2,
    "pi": lambda: math.pi,
}


def resolve_radius(text) -> float:
    """Parse a radius: a number, a symbol (``kappa``, ``log1+sqrt3``...) or ``symbol+-offset``."""
    if isinstance(text, (int, float)):
        return float(text)
    t = str(text).strip().lower().replace(" ", "").replace("(", "").replace(")", "")
    for sym in sorted(_SYMBOLS, key=len, reverse=True):
        if t.startswith(sym):
            rest = t[len(sym):]
            base = _SYMBOLS[sym]()
            if not rest:
                return base
            try:
                return base + float(rest)
            except ValueError:
                break
    try:
        v = float(t)
    except ValueError:
        raise InvalidInputError(f"cannot parse radius {text!r}") from None
    if not math.isfinite(v) or v <= 0:
        raise InvalidInputError(f"radius must be positive and finite, got {text!r}")
    return v
