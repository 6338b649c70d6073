"""Minimal deterministic SVG output for planar polylines."""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidInputError

VIEW = 800.0
MARGIN = 0.05
_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def render_svg(
    polylines: Sequence,
    punctures: Iterable = (),
    labels: Optional[Sequence[str]] = None,
    closed: bool = False,
) -> str:
    """Standalone SVG with one ``<path>`` per polyline and a cross per puncture.

    Data coordinates are mapped into an 800 x 800 view box (5% margin,
    y axis pointing up).  Output depends only on the input values.
    """
    polys = [np.asarray(p, dtype=float) if len(p) else np.zeros((0, 2)) for p in polylines]
    for p in polys:
        if p.ndim != 2 or p.shape[1] != 2:
            raise InvalidInputError("SVG output needs planar polylines")
    marks = [np.asarray(q, dtype=float) for q in punctures]
    for q in marks:
        if q.shape != (2,):
            raise InvalidInputError("SVG output needs planar punctures")
    pts = [p for p in polys if len(p)] + [q[None, :] for q in marks]
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {int(VIEW)} {int(VIEW)}" '
        f'width="{int(VIEW)}" height="{int(VIEW)}">\n'
        f'<rect x="0" y="0" width="{int(VIEW)}" height="{int(VIEW)}" fill="white"/>\n'
    )
    if not pts:
        return head + "</svg>\n"
    allp = np.vstack(pts)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
    scale = VIEW * (1 - 2 * MARGIN) / span
    mid = 0.5 * (lo + hi)

    def tx(P):
        X = VIEW / 2 + (P[:, 0] - mid[0]) * scale
        Y = VIEW / 2 - (P[:, 1] - mid[1]) * scale
        return X, Y

    body = []
    for k, p in enumerate(polys):
        if not len(p):
            continue
        X, Y = tx(p)
        d = "M" + " L".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(X, Y))
        if closed:
            d += " Z"
        title = f"<title>{labels[k]}</title>" if labels is not None and k < len(labels) else ""
        body.append(
            f'<path d="{d}" fill="none" stroke="{_COLOURS[k % len(_COLOURS)]}" stroke-width="1.5">{title}</path>\n'
        )
    for q in marks:
        X, Y = tx(q[None, :])
        x, y, s = float(X[0]), float(Y[0]), 6.0
        # crosses use <line> so that <path> elements map one-to-one to polylines
        for sy in (s, -s):
            body.append(
                f'<line x1="{_fmt(x - s)}" y1="{_fmt(y - sy)}" x2="{_fmt(x + s)}" y2="{_fmt(y + sy)}" '
                'stroke="black" stroke-width="1.5"/>\n'
            )
    return head + "".join(body) + "</svg>\n"
