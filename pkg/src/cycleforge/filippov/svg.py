"""Hand-written SVG phase portraits (no plotting dependency)."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .integrate import Trajectory
from .sigma import CROSSING, ESCAPING, SLIDING, TANGENCY, sigma_partition
from .system import NumericSystem

__all__ = ["portrait_svg", "SIZE", "SIGMA_COLORS"]

SIZE = 800
MARGIN = 40
SIGMA_COLORS = {CROSSING: "#888888", SLIDING: "#1a9e3a", ESCAPING: "#1a9e3a", TANGENCY: "#d62728"}
ZONE_COLORS = {"upper": "#1f4e9e", "lower": "#9e4e1f", "sliding": "#1a9e3a"}


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


class _Frame:
    """Affine data -> screen map with equal scales; screen y points down."""

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        span = max(x1 - x0, y1 - y0, 1e-12)
        cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        self.scale = (SIZE - 2 * MARGIN) / span
        self.cx, self.cy = cx, cy
        half = 0.5 * span
        self.bounds = (cx - half, cx + half, cy - half, cy + half)

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        return SIZE / 2 + (x - self.cx) * self.scale, SIZE / 2 - (y - self.cy) * self.scale


def portrait_svg(
    s: NumericSystem,
    trajectories: Iterable[Trajectory],
    original: bool = True,
    title: str = "",
) -> str:
    """Trajectories plus the switching line coloured by kind.

    Coordinates are the system's original ones when a normal-form record
    is attached and ``original`` is set.
    """
    trajs = list(trajectories)

    def conv(x: float, y: float) -> tuple[float, float]:
        return s.to_original(x, y) if original else (x, y)

    pts = [conv(x, y) for t in trajs for x, y in zip(t.x, t.y) if math.isfinite(x) and math.isfinite(y)]
    if not pts:
        pts = [conv(-1.0, -1.0), conv(1.0, 1.0)]
    frame = _Frame([p[0] for p in pts], [p[1] for p in pts])
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SIZE} {SIZE}" width="{SIZE}" height="{SIZE}">',
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{MARGIN}" y="{MARGIN // 2 + 6}" font-family="monospace" font-size="14">{_escape(title)}</text>')
    # Sigma: its normal-form abscissa range covering the visible window
    bx0, bx1, by0, by1 = frame.bounds
    corners = [(bx0, by0), (bx1, by1), (bx0, by1), (bx1, by0)]
    if original and s.record is not None:
        us = [s.from_original(x, y)[0] for x, y in corners]
    else:
        us = [c[0] for c in corners]
    lo, hi = min(us), max(us)
    for a, b, kind in sigma_partition(s, lo, hi):
        (xa, ya), (xb, yb) = frame(*conv(a, 0.0)), frame(*conv(b, 0.0))
        width = 4 if kind in (SLIDING, ESCAPING) else 2
        out.append(
            f'<line x1="{_fmt(xa)}" y1="{_fmt(ya)}" x2="{_fmt(xb)}" y2="{_fmt(yb)}" '
            f'stroke="{SIGMA_COLORS[kind]}" stroke-width="{width}"/>'
        )
    for t in trajs:
        for zone, seg in _segments(t):
            coords = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in (frame(*conv(x, y)) for x, y in seg))
            out.append(
                f'<polyline points="{coords}" fill="none" stroke="{ZONE_COLORS.get(zone, "#000000")}" stroke-width="1.2"/>'
            )
    ox, oy = frame(*conv(0.0, 0.0))
    out.append(f'<circle cx="{_fmt(ox)}" cy="{_fmt(oy)}" r="3" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _segments(t: Trajectory):
    """Runs of samples with the same zone tag; consecutive runs share an end point."""
    if not len(t):
        return
    cur = t.zone[0]
    seg = [(t.x[0], t.y[0])]
    for x, y, z in zip(t.x[1:], t.y[1:], t.zone[1:]):
        seg.append((x, y))
        if z != cur:
            yield cur, seg
            cur = z
            seg = [(x, y)]
    if len(seg) > 1:
        yield cur, seg


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
