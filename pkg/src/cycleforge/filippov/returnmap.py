"""Half-return maps, the difference map and crossing cycles."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from ..lyapunov.planar import LOWER, UPPER, PiecewiseSystem
from .integrate import IntegrationOptions, NotMonodromic, Trajectory, half_flight, integrate
from .sigma import sliding_segments
from .system import NumericSystem
from .taylor import taylor_displacement

__all__ = [
    "NoSignChange",
    "CycleResult",
    "ScanRow",
    "numeric_displacement",
    "return_map",
    "find_crossing_cycle",
    "pseudo_hopf_scan",
    "CYCLE_TOL",
]

CYCLE_TOL = 1e-10
CYCLE_OPTS = IntegrationOptions(rtol=1e-13, atol=1e-15)


class NoSignChange(ArithmeticError):
    """The displacement does not change sign inside the bracket."""


def numeric_displacement(s: NumericSystem | PiecewiseSystem, rho, opts: IntegrationOptions = CYCLE_OPTS, dps: int = 50):
    """Delta(rho) = (Pi^-)^{-1}(rho) - Pi^+(rho).

    For a NumericSystem the upper half is integrated forward and the lower
    half backward in time with scipy (double precision).  For an exact
    PiecewiseSystem the same construction runs in mpmath at ``dps`` digits
    with a Taylor-series integrator, returning an mpf.
    """
    if isinstance(s, PiecewiseSystem):
        if s.has_parameters:
            raise ValueError("substitute parameter values first (PiecewiseSystem.at_parameters)")
        return taylor_displacement(
            (s.upper.dx.terms, s.upper.dy.terms), (s.lower.dx.terms, s.lower.dy.terms), rho, dps=dps
        )
    rho = float(rho)
    _, xu = half_flight(s.upper, rho, UPPER, backward=False, opts=opts)
    _, xl = half_flight(s.lower, rho, LOWER, backward=True, opts=opts)
    if xu >= 0 or xl >= 0:
        raise NotMonodromic(f"half orbit from rho = {rho} returns on the positive axis")
    return (-xl) - (-xu)


def return_map(s: NumericSystem, rho: float, opts: IntegrationOptions = CYCLE_OPTS) -> float:
    """Full crossing return map on the positive x-axis (upper then lower)."""
    _, xu = half_flight(s.upper, float(rho), UPPER, opts=opts)
    if xu >= 0:
        raise NotMonodromic("upper half orbit returns on the positive axis")
    _, xl = half_flight(s.lower, xu, LOWER, opts=opts)
    if xl <= 0:
        raise NotMonodromic("lower half orbit returns on the negative axis")
    return xl


def _safe_delta(s: NumericSystem, rho: float, opts: IntegrationOptions) -> float:
    try:
        return numeric_displacement(s, rho, opts)
    except NotMonodromic:
        return math.nan


@dataclass
class CycleResult:
    rho: float
    delta: float
    stability: str
    period: float
    trajectory: Trajectory
    left_x: float

    @property
    def crossing_points(self) -> tuple[float, float]:
        """Sigma abscissae (normal-form coordinates) of the two crossings."""
        return self.left_x, self.rho


def find_crossing_cycle(
    s: NumericSystem,
    bracket: tuple[float, float],
    samples: int = 24,
    opts: IntegrationOptions = CYCLE_OPTS,
    noise: float = 1e3,
) -> CycleResult:
    """Zero of Delta inside ``bracket``.

    Delta is sampled on a geometric grid first (points where a half orbit is
    not defined, e.g. inside a sliding segment, are skipped), the first sign
    change is refined with Brent's method.  Samples with
    ``|Delta| <= noise * rtol * rho`` count as zero, so a numerical center
    raises NoSignChange instead of reporting a root of round-off.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0 < lo < hi:
        raise ValueError("bracket must satisfy 0 < lo < hi")
    # geometric grid: small cycles near a sliding segment need fine sampling at lo
    grid = np.geomspace(lo, hi, max(2, samples))
    vals = [_safe_delta(s, r, opts) for r in grid]
    # values below the integration noise carry no sign
    floor = noise * opts.rtol
    sig = [(r, v) for r, v in zip(grid, vals) if not math.isnan(v) and abs(v) > floor * r]
    finite = [v for v in vals if not math.isnan(v)]
    pair = None
    for (a, fa), (b, fb) in zip(sig, sig[1:]):
        between = [v for r, v in zip(grid, vals) if a < r < b]
        if any(math.isnan(v) for v in between):
            continue
        if fa * fb < 0:
            pair = (a, b)
            break
    if pair is None:
        if finite and not sig:
            raise NoSignChange(f"Delta vanishes to integration accuracy on [{lo}, {hi}] (max |Delta| {max(map(abs, finite)):.3e})")
        span = f"[{min(finite):.3e}, {max(finite):.3e}]" if finite else "undefined"
        raise NoSignChange(f"Delta keeps its sign on [{lo}, {hi}] (sampled range {span})")
    rho = brentq(lambda r: numeric_displacement(s, r, opts), pair[0], pair[1], xtol=1e-15, rtol=1e-15, maxiter=200)
    delta = numeric_displacement(s, rho, opts)
    h = max(1e-7, 1e-5 * rho)
    slope = (_safe_delta(s, rho + h, opts) - _safe_delta(s, rho - h, opts)) / (2 * h)
    # Delta > 0 outside means the return map pulls orbits inward
    stability = "stable" if slope > 0 else "unstable" if slope < 0 else "degenerate"
    tu, xu = half_flight(s.upper, rho, UPPER, opts=opts)
    tl, _ = half_flight(s.lower, xu, LOWER, opts=opts)
    traj = integrate(s, (rho, 0.0), tu + tl, opts)
    return CycleResult(float(rho), float(delta), stability, tu + tl, traj, xu)


@dataclass(frozen=True)
class ScanRow:
    eps: float
    sliding: tuple[float, float] | None
    sliding_kind: str | None
    rho: float | None
    stability: str | None


FamilyFactory = Callable[[float], NumericSystem]


def _scan_one(args) -> ScanRow:
    factory, eps, bracket, samples = args
    s = factory(eps)
    segs = sliding_segments(s, -1.0, 1.0)
    seg = None
    kind = None
    if segs:
        # the segment nearest to the origin
        a, b, kind = min(segs, key=lambda p: min(abs(p[0]), abs(p[1])))
        seg = (s.original_sigma_x(a), s.original_sigma_x(b))
        seg = (min(seg), max(seg))
    try:
        c = find_crossing_cycle(s, bracket, samples)
        return ScanRow(eps, seg, kind, c.rho, c.stability)
    except NoSignChange:
        return ScanRow(eps, seg, kind, None, None)


def pseudo_hopf_scan(
    factory: FamilyFactory,
    eps_range: tuple[float, float],
    steps: int,
    bracket: tuple[float, float] = (0.01, 0.5),
    samples: int = 24,
    workers: int | None = None,
) -> list[ScanRow]:
    """Sliding segment and crossing cycle for ``steps`` values of eps.

    ``factory(eps)`` builds the system; it must be a picklable top-level
    callable when more than one worker is used.  Rows are returned in eps
    order whatever the worker count.
    """
    # snap linspace round-off so the table shows 0.1, not 0.09999999999999998
    scale = max(abs(eps_range[0]), abs(eps_range[1]))
    eps_values = [0.0 if abs(e) <= 1e-12 * scale else float(f"{e:.12g}") for e in np.linspace(eps_range[0], eps_range[1], steps)]
    jobs = [(factory, e, bracket, samples) for e in eps_values]
    if workers is None:
        try:
            workers = max(1, int(os.environ.get("CYCLEFORGE_THREADS", "1")))
        except ValueError:
            workers = 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_scan_one, jobs))
    return [_scan_one(j) for j in jobs]
