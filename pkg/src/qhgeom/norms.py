"""Finite-dimensional norms: Euclidean and p-norms with 1 <= p <= inf."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError

__all__ = ["NormSpec", "EUCLIDEAN", "norm_value"]


@dataclass(frozen=True)
class NormSpec:
    """A norm on R^n.

    ``kind`` is ``"euclidean"`` or ``"p_norm"``; ``p`` is only present for
    p-norms and may be ``math.inf`` for the sup-norm.
    """

    kind: str = "euclidean"
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind == "euclidean":
            if self.p is not None:
                raise InvalidInputError("euclidean norm takes no exponent")
        elif self.kind == "p_norm":
            if self.p is None:
                raise InvalidInputError("p_norm requires an exponent p")
            p = float(self.p)
            if math.isnan(p) or p < 1:
                raise InvalidInputError(f"norm exponent must satisfy p >= 1, got {self.p}")
            object.__setattr__(self, "p", p)
        else:
            raise InvalidInputError(f"unknown norm kind {self.kind!r}")

    @classmethod
    def lp(cls, p) -> "NormSpec":
        return cls("p_norm", float(p))

    @property
    def exponent(self) -> float:
        """Exponent as a float (2 for the Euclidean norm)."""
        return 2.0 if self.kind == "euclidean" else float(self.p)

    @property
    def is_euclidean(self) -> bool:
        return self.exponent == 2.0

    def __call__(self, v):
        return norm_value(self, v)

    def rows(self, v: np.ndarray) -> np.ndarray:
        """Norm of each row of a 2D array; no validation (hot path)."""
        q = self.exponent
        a = np.abs(v)
        if q == 2.0:
            sq = np.einsum("ij,ij->i", v, v)
            out = np.sqrt(sq)
            # squares go subnormal or overflow for extreme entries: rescale those rows
            bad = ((sq < 1e-300) | (sq > 1e300)) & np.isfinite(a).all(axis=1) & (a.max(axis=1) > 0)
            if bad.any():
                m = a[bad].max(axis=1)
                w = v[bad] / m[:, None]
                out[bad] = m * np.sqrt(np.einsum("ij,ij->i", w, w))
            return out
        if q == 1.0:
            return a.sum(axis=1)
        if math.isinf(q):
            return a.max(axis=1)
        # scale by the max entry so large p does not overflow
        m = a.max(axis=1)
        safe = np.where(m > 0, m, 1.0)
        return m * ((a / safe[:, None]) ** q).sum(axis=1) ** (1.0 / q)

    def to_json(self) -> dict:
        if self.kind == "euclidean":
            return {"kind": "euclidean"}
        return {"kind": "p_norm", "p": "inf" if math.isinf(self.p) else self.p}

    @classmethod
    def from_json(cls, obj) -> "NormSpec":
        if isinstance(obj, str):
            return cls.parse(obj)
        try:
            kind = obj["kind"]
        except (KeyError, TypeError):
            raise InvalidInputError(f"norm spec needs a 'kind' field: {obj!r}") from None
        if kind == "euclidean":
            return cls()
        if kind == "p_norm":
            p = obj.get("p")
            if isinstance(p, str):
                p = math.inf if p.lower() in ("inf", "infinity") else float(p)
            return cls("p_norm", p)
        raise InvalidInputError(f"unknown norm kind {kind!r}")

    @classmethod
    def parse(cls, text: str) -> "NormSpec":
        """Parse ``euclidean``, ``p=1.5``, ``l1``, ``linf`` and the like."""
        t = text.strip().lower()
        if t in ("euclidean", "l2", "2"):
            return cls()
        if t.startswith("p="):
            t = t[2:]
        elif t.startswith("l"):
            t = t[1:]
        if t in ("inf", "infinity", "sup"):
            return cls.lp(math.inf)
        try:
            return cls.lp(float(t))
        except ValueError:
            raise InvalidInputError(f"cannot parse norm {text!r}") from None


EUCLIDEAN = NormSpec()


def norm_value(norm: NormSpec, v) -> float:
    """Return ``||v||`` under ``norm``.

    >>> norm_value(EUCLIDEAN, [3, 4])
    5.0
    """
    a = np.asarray(v, dtype=float).ravel()
    if a.size == 0:
        raise InvalidInputError("norm of an empty vector")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"non-finite coordinates: {v!r}")
    return float(norm.rows(a[None, :])[0])
