"""Behaviour of the two fields on the switching line y = 0."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .system import NumericSystem

__all__ = [
    "CROSSING",
    "SLIDING",
    "ESCAPING",
    "TANGENCY",
    "SigmaClassification",
    "NotSlidingRegion",
    "classify_point",
    "sliding_field",
    "sliding_lambda",
    "sigma_partition",
    "sliding_segments",
    "TAU_TAN",
]

CROSSING = "crossing"
SLIDING = "sliding"
ESCAPING = "escaping"
TANGENCY = "tangency"
TAU_TAN = 1e-12


class NotSlidingRegion(ValueError):
    pass


@dataclass(frozen=True)
class SigmaClassification:
    x: float
    kind: str
    upper_normal_speed: float
    lower_normal_speed: float


def classify_point(s: NumericSystem, x: float, tau: float = TAU_TAN) -> SigmaClassification:
    """Crossing, sliding, escaping or tangency at (x, 0).

    The normal speeds are the y-components of the upper and lower fields.
    A speed counts as zero when below ``tau`` times the larger field norm.
    """
    ux, uy = s.upper(x, 0.0)
    lx, ly = s.lower(x, 0.0)
    scale = max(math.hypot(ux, uy), math.hypot(lx, ly))
    thr = tau * scale
    if abs(uy) <= thr or abs(ly) <= thr:
        kind = TANGENCY
    elif uy * ly > 0:
        kind = CROSSING
    elif uy < 0 < ly:
        kind = SLIDING
    else:
        kind = ESCAPING
    return SigmaClassification(x, kind, uy, ly)


def sliding_lambda(s: NumericSystem, x: float) -> float:
    uy = s.upper.fy(x, 0.0)
    ly = s.lower.fy(x, 0.0)
    return ly / (ly - uy)


def sliding_field(s: NumericSystem, x: float, tau: float = TAU_TAN) -> float:
    """x' of the Filippov convex combination tangent to Sigma."""
    c = classify_point(s, x, tau)
    if c.kind not in (SLIDING, ESCAPING):
        raise NotSlidingRegion(f"x = {x} is a {c.kind} point")
    lam = c.lower_normal_speed / (c.lower_normal_speed - c.upper_normal_speed)
    return lam * s.upper.fx(x, 0.0) + (1.0 - lam) * s.lower.fx(x, 0.0)


def _real_roots(coeffs_low_to_high: list[float], lo: float, hi: float) -> list[float]:
    c = np.trim_zeros(np.asarray(coeffs_low_to_high, dtype=float), "b")
    if len(c) <= 1:
        return []
    roots = np.roots(c[::-1])
    out = []
    for r in roots:
        if abs(r.imag) <= 1e-9 * max(1.0, abs(r.real)) and lo < r.real < hi:
            out.append(float(r.real))
    return sorted(out)


def sigma_partition(s: NumericSystem, lo: float, hi: float, tau: float = TAU_TAN) -> list[tuple[float, float, str]]:
    """Split [lo, hi] of Sigma into maximal intervals of constant kind.

    Interval ends are the real roots of y'(x, 0) of either field.  A field
    whose y-component vanishes identically on Sigma makes every point a
    tangency.
    """
    up = s.upper.sigma_polynomial()
    dn = s.lower.sigma_polynomial()
    if not any(up) or not any(dn):
        return [(lo, hi, TANGENCY)]
    cuts = sorted(set([lo, hi] + _real_roots(up, lo, hi) + _real_roots(dn, lo, hi)))
    pieces: list[tuple[float, float, str]] = []
    for a, b in zip(cuts, cuts[1:]):
        kind = classify_point(s, 0.5 * (a + b), tau).kind
        if pieces and pieces[-1][2] == kind:
            pieces[-1] = (pieces[-1][0], b, kind)
        else:
            pieces.append((a, b, kind))
    return pieces


def sliding_segments(s: NumericSystem, lo: float = -10.0, hi: float = 10.0) -> list[tuple[float, float, str]]:
    return [p for p in sigma_partition(s, lo, hi) if p[2] in (SLIDING, ESCAPING)]
