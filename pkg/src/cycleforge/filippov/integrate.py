"""Trajectories of the Filippov system with event detection on y = 0."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

from scipy.integrate import solve_ivp

from ..lyapunov.planar import LOWER, UPPER
from .sigma import CROSSING, ESCAPING, SLIDING, TANGENCY, classify_point, sliding_field
from .system import NumericSystem, PolyField

__all__ = [
    "IntegrationOptions",
    "StepFailure",
    "EventAmbiguity",
    "NotMonodromic",
    "SigmaEvent",
    "Trajectory",
    "integrate",
    "half_flight",
]

SLIDE = "sliding"


class StepFailure(RuntimeError):
    """The ODE solver could not reach the requested tolerance."""


class EventAmbiguity(RuntimeError):
    """A Sigma event happened at a tangency; no convention is assumed."""


class NotMonodromic(RuntimeError):
    """A half orbit from (rho, 0) does not reach the negative x-axis."""


@dataclass(frozen=True)
class IntegrationOptions:
    rtol: float = 1e-12
    atol: float = 1e-14
    tau_tan: float = 1e-12
    max_events: int = 10_000
    bound: float = 1e6
    strict: bool = False
    method: str = "DOP853"
    flight_time: float = 200.0

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class SigmaEvent:
    t: float
    x: float
    kind: str
    from_zone: str
    to_zone: str


@dataclass
class Trajectory:
    t: list[float] = field(default_factory=list)
    x: list[float] = field(default_factory=list)
    y: list[float] = field(default_factory=list)
    zone: list[str] = field(default_factory=list)
    events: list[SigmaEvent] = field(default_factory=list)
    truncated: str | None = None

    def append(self, t: float, x: float, y: float, zone: str) -> None:
        self.t.append(float(t))
        self.x.append(float(x))
        self.y.append(float(y))
        self.zone.append(zone)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def end(self) -> tuple[float, float, float]:
        return self.t[-1], self.x[-1], self.y[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,x,y,zone\n")
        for row in zip(self.t, self.x, self.y, self.zone):
            buf.write(f"{row[0]!r},{row[1]!r},{row[2]!r},{row[3]}\n")
        return buf.getvalue()


def _rhs(f: PolyField, sign: float = 1.0):
    def fun(t, z):
        a, b = f(z[0], z[1])
        return [sign * a, sign * b]

    return fun


def _sigma_event(direction: float):
    def ev(t, z):
        return z[1]

    ev.terminal = True
    ev.direction = direction
    return ev


def _bound_event(bound: float):
    def ev(t, z):
        return bound - max(abs(z[0]), abs(z[1]))

    ev.terminal = True
    ev.direction = -1
    return ev


def half_flight(
    f: PolyField,
    x0: float,
    zone: str,
    backward: bool = False,
    opts: IntegrationOptions = IntegrationOptions(),
) -> tuple[float, float]:
    """Fly the single field ``f`` from (x0, 0) into ``zone`` until y = 0 again.

    Returns (elapsed time, x at the return).  Raises NotMonodromic when the
    field does not enter the zone or never comes back within the flight
    time.
    """
    sign = -1.0 if backward else 1.0
    vy = sign * f.fy(x0, 0.0)
    into = 1.0 if zone == UPPER else -1.0
    if vy * into <= 0:
        raise NotMonodromic(f"field does not enter the {zone} half-plane at x = {x0}")
    sol = solve_ivp(
        _rhs(f, sign),
        (0.0, opts.flight_time),
        [x0, 0.0],
        method=opts.method,
        rtol=opts.rtol,
        atol=opts.atol,
        events=[_sigma_event(-into), _bound_event(opts.bound)],
    )
    if sol.status == -1:
        raise StepFailure(sol.message)
    if not len(sol.t_events[0]):
        raise NotMonodromic(f"no return to y = 0 from x = {x0} within t = {opts.flight_time}")
    return float(sol.t_events[0][0]), float(sol.y_events[0][0][0])


def _entry_zone(s: NumericSystem, x: float, from_zone: str | None, tau: float) -> tuple[str, str]:
    """(kind, zone to continue in) for a point on Sigma."""
    c = classify_point(s, x, tau)
    if c.kind == CROSSING:
        return c.kind, UPPER if c.upper_normal_speed > 0 else LOWER
    if c.kind == SLIDING:
        return c.kind, SLIDE
    return c.kind, from_zone or ""


def integrate(
    s: NumericSystem,
    start: tuple[float, float],
    t_max: float,
    opts: IntegrationOptions = IntegrationOptions(),
    start_zone: str | None = None,
) -> Trajectory:
    """Forward Filippov trajectory from ``start`` up to time ``t_max``.

    Crossing events switch fields; arrival at a sliding point continues on
    the sliding vector field along Sigma.  Tangencies (and arrival at the
    end of a sliding segment) truncate the trajectory and set
    ``truncated = "tangency"``, or raise EventAmbiguity with ``strict``.
    """
    traj = Trajectory()
    t = 0.0
    x, y = float(start[0]), float(start[1])
    if y > 0:
        zone = UPPER
    elif y < 0:
        zone = LOWER
    else:
        kind, zone = _entry_zone(s, x, start_zone, opts.tau_tan)
        if kind == ESCAPING:
            if start_zone not in (UPPER, LOWER):
                raise ValueError("start on an escaping point needs start_zone upper or lower")
            zone = start_zone
        elif kind == TANGENCY:
            traj.append(t, x, y, TANGENCY)
            return _truncate(traj, "tangency", opts)
    traj.append(t, x, y, zone)
    n_events = 0
    while t < t_max:
        if zone == SLIDE:
            t, x, done = _slide(s, t, x, t_max, traj, opts)
            if done:
                return _truncate(traj, done, opts)
            break
        f = s.field(zone)
        sol = solve_ivp(
            _rhs(f),
            (t, t_max),
            [x, y],
            method=opts.method,
            rtol=opts.rtol,
            atol=opts.atol,
            events=[_sigma_event(-1.0 if zone == UPPER else 1.0), _bound_event(opts.bound)],
        )
        if sol.status == -1:
            raise StepFailure(sol.message)
        for ti, xi, yi in zip(sol.t[1:], sol.y[0][1:], sol.y[1][1:]):
            traj.append(ti, xi, yi, zone)
        if len(sol.t_events[1]):
            return _truncate(traj, "bound", opts)
        if not len(sol.t_events[0]):
            break
        t = float(sol.t_events[0][0])
        x = float(sol.y_events[0][0][0])
        y = 0.0
        # replace the solver's last point by the exact Sigma point
        traj.t[-1], traj.x[-1], traj.y[-1] = t, x, y
        kind, new_zone = _entry_zone(s, x, zone, opts.tau_tan)
        n_events += 1
        if kind in (TANGENCY, ESCAPING):
            traj.events.append(SigmaEvent(t, x, TANGENCY, zone, ""))
            return _truncate(traj, "tangency", opts)
        traj.events.append(SigmaEvent(t, x, kind, zone, new_zone))
        zone = new_zone
        traj.zone[-1] = zone
        if n_events >= opts.max_events:
            return _truncate(traj, "max_events", opts)
    return traj


def _slide(s: NumericSystem, t: float, x: float, t_max: float, traj: Trajectory, opts: IntegrationOptions):
    """Sliding motion along Sigma; ends at t_max, a pseudo-equilibrium or an endpoint."""
    v0 = sliding_field(s, x, opts.tau_tan)
    scale = max(1.0, abs(s.upper.fx(x, 0.0)), abs(s.lower.fx(x, 0.0)))
    if abs(v0) <= 1e-13 * scale:
        traj.append(t_max, x, 0.0, SLIDE)
        return t_max, x, "pseudo-equilibrium"

    def fun(tt, z):
        c = classify_point(s, z[0], opts.tau_tan)
        if c.kind not in (SLIDING, ESCAPING):
            return [0.0]
        return [sliding_field(s, z[0], opts.tau_tan)]

    def leave_up(tt, z):
        return s.upper.fy(z[0], 0.0)

    def leave_down(tt, z):
        return s.lower.fy(z[0], 0.0)

    for ev in (leave_up, leave_down):
        ev.terminal = True
    sol = solve_ivp(fun, (t, t_max), [x], method=opts.method, rtol=opts.rtol, atol=opts.atol, events=[leave_up, leave_down])
    if sol.status == -1:
        raise StepFailure(sol.message)
    for ti, xi in zip(sol.t[1:], sol.y[0][1:]):
        traj.append(ti, xi, 0.0, SLIDE)
    if any(len(e) for e in sol.t_events):
        te = min(float(e[0]) for e in sol.t_events if len(e))
        traj.events.append(SigmaEvent(te, traj.x[-1], TANGENCY, SLIDE, ""))
        return te, traj.x[-1], "tangency"
    return float(sol.t[-1]), float(sol.y[0][-1]), None


def _truncate(traj: Trajectory, reason: str, opts: IntegrationOptions) -> Trajectory:
    if opts.strict and reason == "tangency":
        raise EventAmbiguity("trajectory reached a tangency on Sigma")
    traj.truncated = reason
    return traj
