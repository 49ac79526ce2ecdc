"""Command-line front end: ``cycleforge <command> SYSTEM [options]``."""

from __future__ import annotations

import argparse
import functools
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Sequence

from . import __version__
from .cyclicity import (
    DEFAULT_K,
    analyze,
    format_linear_form,
    jacobian_csv,
    pivots_from_names,
    reduce_constants,
    report_render,
)
from .exactalg import PiOverflow
from .filippov.integrate import EventAmbiguity, IntegrationOptions, NotMonodromic, StepFailure, integrate
from .filippov.returnmap import NoSignChange, find_crossing_cycle, pseudo_hopf_scan
from .filippov.sigma import classify_point, sigma_partition
from .filippov.svg import portrait_svg
from .lyapunov.planar import LOWER, UPPER, NormalFormError
from .lyapunov.series import DEFAULT_ORDER, displacement_series
from .sysfile import ParseError, dump, numeric_family_member, parse_file, to_numeric, to_piecewise

__all__ = ["main", "run", "RunConfig", "resolve_system_path", "format_pi_polynomial"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MATH = 2

MATH_ERRORS = (PiOverflow, NoSignChange, NormalFormError, NotMonodromic, StepFailure, EventAmbiguity, ArithmeticError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    path: str = ""
    order: int | None = None
    pseudo_hopf: bool = True
    reduce: list[str] = field(default_factory=list)
    emit_jacobian: str | None = None
    eps: Fraction | None = None
    rtol: float = 1e-12
    atol: float = 1e-14
    coords: str = "original"
    start: tuple[float, float] | None = None
    zone: str | None = None
    t_max: float = 20.0
    bracket: tuple[float, float] = (0.01, 0.5)
    samples: int = 24
    scan_range: tuple[float, float] | None = None
    steps: int = 11
    sigma_range: tuple[float, float] = (-1.0, 1.0)
    at: float | None = None
    starts: list[tuple[float, float]] = field(default_factory=list)
    out: str | None = None


def resolve_system_path(name: str) -> str:
    """``name``, ``name.sys``, or a packaged fixture (``fixtures/`` prefix optional)."""
    for cand in (name, name + ".sys"):
        if os.path.isfile(cand):
            return cand
    base = os.path.basename(name)
    if not base.endswith(".sys"):
        base += ".sys"
    ref = resources.files("cycleforge").joinpath("fixtures", base)
    if ref.is_file():
        return str(ref)
    raise UsageError(f"no system file {name!r} (also tried {name}.sys and the packaged fixtures)")


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected a,b got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two numbers, got {text!r}") from None


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _starts(text: str) -> list[tuple[float, float]]:
    return [_pair(p) for p in text.split(";") if p.strip()]


def _num(v: float) -> str:
    return repr(float(v))


def format_pi_polynomial(poly: dict[int, Fraction]) -> str:
    """``c0 + c1*pi + c3*pi^3`` with the same sign conventions as linear forms."""
    items = [(k, c) for k, c in sorted(poly.items()) if c]
    if not items:
        return "0"
    out = []
    for i, (k, c) in enumerate(items):
        mag = abs(c)
        num = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
        if k == 0:
            term = num
        else:
            pw = "pi" if k == 1 else f"pi^{k}"
            term = pw if mag == 1 else f"{num}*{pw}"
        if i == 0:
            out.append(("-" if c < 0 else "") + term)
        else:
            out.append((" - " if c < 0 else " + ") + term)
    return "".join(out)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cycleforge", description="Lyapunov constants, cyclicity and Filippov simulation of piecewise planar systems.")
    p.add_argument("--version", action="version", version=f"cycleforge {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("system", help="system file, or the name of a packaged fixture")
        return sp

    def numeric(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--eps", type=_rational, help="family parameter value (overrides the file)")
        sp.add_argument("--rtol", type=float, default=1e-12)
        sp.add_argument("--atol", type=float, default=1e-14)

    def coords(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--coords", choices=("original", "normal"), default="original", help="coordinates of points in and out")

    sp = add("lyap", "print the Lyapunov constants L(1)..L(N-1)")
    sp.add_argument("--order", type=int, default=DEFAULT_ORDER, help="series truncation order N (default %(default)s)")
    sp.add_argument("--reduce", default="", help="comma-separated pivot names; eliminate them from later constants")
    sp.add_argument("--eps", type=_rational)

    sp = add("rank", "rank of the linear parts of L(1)..L(K)")
    sp.add_argument("--order", type=int, default=DEFAULT_K, help="number of constants K (default %(default)s)")
    sp.add_argument("--no-pseudo-hopf", action="store_true", help="do not add the pseudo-Hopf cycle to the bound")
    sp.add_argument("--emit-jacobian", choices=("csv",), help="print the Jacobian instead of the report")
    sp.add_argument("--eps", type=_rational)

    sp = add("classify", "classify the switching line")
    sp.add_argument("--range", dest="sigma_range", type=_pair, default=(-1.0, 1.0), help="normal-form abscissa range a,b")
    sp.add_argument("--at", type=float, help="classify the single point with this abscissa")
    numeric(sp)
    coords(sp)
    sp.add_argument("--raw", action="store_true", help="use the written coordinates, no normal form")

    sp = add("simulate", "integrate one Filippov trajectory, CSV t,x,y,zone")
    sp.add_argument("--start", type=_pair, required=True)
    sp.add_argument("--t-max", type=float, default=20.0)
    sp.add_argument("--zone", choices=(UPPER, LOWER), help="zone for a start on an escaping point")
    sp.add_argument("--out", help="CSV path (default stdout)")
    numeric(sp)
    coords(sp)

    sp = add("find-cycle", "locate a crossing limit cycle by a sign change of the displacement")
    sp.add_argument("--bracket", type=_pair, default=(0.01, 0.5), help="normal-form radii lo,hi")
    sp.add_argument("--samples", type=int, default=24)
    sp.add_argument("--out", help="write the closed orbit as CSV here")
    numeric(sp)
    coords(sp)

    sp = add("scan-pseudo-hopf", "sliding segment and crossing cycle over a range of eps")
    sp.add_argument("--range", dest="scan_range", type=_pair, required=True)
    sp.add_argument("--steps", type=int, default=11)
    sp.add_argument("--bracket", type=_pair, default=(0.002, 0.5))
    sp.add_argument("--samples", type=int, default=24)

    sp = add("portrait", "SVG phase portrait with the switching line coloured by kind")
    sp.add_argument("--out", required=True)
    sp.add_argument("--starts", type=_starts, help="start points 'x,y;x,y;...' (default: a fan on the positive axis)")
    sp.add_argument("--t-max", type=float, default=20.0)
    numeric(sp)
    coords(sp)

    add("dump", "print the canonical form of a system file")
    return p


def _config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command, path=ns.system)
    for key, value in vars(ns).items():
        if key in ("command", "system") or value is None:
            continue
        if key == "no_pseudo_hopf":
            cfg.pseudo_hopf = not value
        elif key == "reduce":
            cfg.reduce = [t.strip() for t in value.split(",") if t.strip()]
        elif key == "raw":
            if value:
                cfg.coords = "raw"
        elif hasattr(cfg, key):
            setattr(cfg, key, value)
        else:
            raise UsageError(f"unknown option {key}")
    return cfg


def _opts(cfg: RunConfig) -> IntegrationOptions:
    try:
        return IntegrationOptions(rtol=cfg.rtol, atol=cfg.atol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cmd_lyap(cfg: RunConfig, spec, out) -> None:
    N = cfg.order
    if N < 2:
        raise UsageError("--order must be at least 2")
    s = to_piecewise(spec, cfg.eps)
    ds = displacement_series(s, N)
    ps = s.param_set
    if not len(ps):
        for k in range(1, N):
            out.write(f"L({k}) = {format_pi_polynomial(ds.pi_polynomial(k + 1))}\n")
        return
    rows = [ds.gradient(k) for k in range(1, N)]
    if cfg.reduce:
        try:
            pivots = pivots_from_names(cfg.reduce, ps)
        except (KeyError, ValueError) as exc:
            raise UsageError(f"bad --reduce list: {exc}") from None
        rows = reduce_constants(rows, pivots)
    for k, row in enumerate(rows, 1):
        const = ds.pi_polynomial(k + 1)
        line = f"L({k}) = {format_linear_form(row, ps)}"
        if any(const.values()):
            line += f"   [constant part {format_pi_polynomial(const)}]"
        out.write(line + "\n")


def _cmd_rank(cfg: RunConfig, spec, out) -> None:
    K = cfg.order
    if K < 1:
        raise UsageError("--order must be at least 1")
    s = to_piecewise(spec, cfg.eps)
    r = analyze(s, K, cfg.pseudo_hopf)
    out.write(jacobian_csv(r) if cfg.emit_jacobian == "csv" else report_render(r))


def _numeric(cfg: RunConfig, spec):
    return to_numeric(spec, cfg.eps, normalize=cfg.coords != "raw")


def _to_user(s, x: float, y: float, cfg: RunConfig) -> tuple[float, float]:
    return s.to_original(x, y) if cfg.coords == "original" else (x, y)


def _cmd_classify(cfg: RunConfig, spec, out) -> None:
    s = _numeric(cfg, spec)
    if cfg.at is not None:
        x = s.sigma_x_from_original(cfg.at) if cfg.coords == "original" else cfg.at
        c = classify_point(s, x)
        out.write(f"x {_num(cfg.at)} {c.kind} upper_speed {_num(c.upper_normal_speed)} lower_speed {_num(c.lower_normal_speed)}\n")
        return
    lo, hi = cfg.sigma_range
    if cfg.coords == "original":
        ends = sorted((s.sigma_x_from_original(lo), s.sigma_x_from_original(hi)))
    else:
        ends = [lo, hi]
    out.write("from,to,kind\n")
    rows = []
    for a, b, kind in sigma_partition(s, ends[0], ends[1]):
        if cfg.coords == "original":
            a, b = sorted((s.original_sigma_x(a), s.original_sigma_x(b)))
        rows.append((a, b, kind))
    for a, b, kind in sorted(rows):
        out.write(f"{_num(a)},{_num(b)},{kind}\n")


def _traj_csv(s, traj, cfg: RunConfig) -> str:
    if cfg.coords != "original" or s.record is None:
        return traj.to_csv()
    lines = ["t,x,y,zone"]
    for t, x, y, z in zip(traj.t, traj.x, traj.y, traj.zone):
        u, w = s.to_original(x, y)
        if s.original_upper_is_lower and z in (UPPER, LOWER):
            z = LOWER if z == UPPER else UPPER
        lines.append(f"{t!r},{u!r},{w!r},{z}")
    return "\n".join(lines) + "\n"


def _write(path: str | None, text: str, out) -> None:
    if path is None or path == "-":
        out.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_simulate(cfg: RunConfig, spec, out) -> None:
    s = _numeric(cfg, spec)
    x0, y0 = cfg.start
    if cfg.coords == "original":
        x0, y0 = s.from_original(x0, y0)
        if abs(y0) < 1e-15:
            y0 = 0.0
    zone = cfg.zone
    if zone and s.original_upper_is_lower and cfg.coords == "original":
        zone = LOWER if zone == UPPER else UPPER
    traj = integrate(s, (x0, y0), cfg.t_max, _opts(cfg), start_zone=zone)
    _write(cfg.out, _traj_csv(s, traj, cfg), out)
    if traj.truncated:
        sys.stderr.write(f"trajectory truncated: {traj.truncated}\n")


def _cmd_find_cycle(cfg: RunConfig, spec, out) -> None:
    s = _numeric(cfg, spec)
    c = find_crossing_cycle(s, cfg.bracket, cfg.samples, IntegrationOptions(rtol=min(cfg.rtol, 1e-13), atol=min(cfg.atol, 1e-15)))
    out.write(f"rho {_num(c.rho)}\n")
    out.write(f"delta {_num(c.delta)}\n")
    out.write(f"stability {c.stability}\n")
    out.write(f"period {_num(c.period)}\n")
    a, b = sorted(_to_user(s, x, 0.0, cfg)[0] for x in c.crossing_points)
    out.write(f"crossings {_num(a)} {_num(b)}\n")
    if cfg.out:
        _write(cfg.out, _traj_csv(s, c.trajectory, cfg), out)


def _cmd_scan(cfg: RunConfig, spec, out) -> None:
    if cfg.steps < 1:
        raise UsageError("--steps must be positive")
    factory = functools.partial(numeric_family_member, spec)
    rows = pseudo_hopf_scan(factory, cfg.scan_range, cfg.steps, cfg.bracket, cfg.samples)
    out.write("eps,sliding_from,sliding_to,sliding_kind,rho,stability\n")
    for r in rows:
        a, b = r.sliding if r.sliding else ("", "")
        out.write(
            ",".join(
                [
                    _num(r.eps),
                    _num(a) if a != "" else "",
                    _num(b) if b != "" else "",
                    r.sliding_kind or "",
                    _num(r.rho) if r.rho is not None else "none",
                    r.stability or "",
                ]
            )
            + "\n"
        )


def _cmd_portrait(cfg: RunConfig, spec, out) -> None:
    s = _numeric(cfg, spec)
    opts = _opts(cfg)
    if cfg.starts:
        starts = []
        for x, y in cfg.starts:
            if cfg.coords == "original":
                x, y = s.from_original(x, y)
            starts.append((x, y))
    else:
        starts = [(0.05 * k, 1e-3) for k in range(1, 9)]
    trajs = []
    for x, y in starts:
        try:
            trajs.append(integrate(s, (x, y), cfg.t_max, opts))
        except (StepFailure, EventAmbiguity, ValueError) as exc:
            sys.stderr.write(f"skipping start ({x}, {y}): {exc}\n")
    svg = portrait_svg(s, trajs, original=cfg.coords == "original", title=spec.name)
    _write(cfg.out, svg, out)


def _cmd_dump(cfg: RunConfig, spec, out) -> None:
    out.write(dump(spec))


COMMANDS = {
    "lyap": _cmd_lyap,
    "rank": _cmd_rank,
    "classify": _cmd_classify,
    "simulate": _cmd_simulate,
    "find-cycle": _cmd_find_cycle,
    "scan-pseudo-hopf": _cmd_scan,
    "portrait": _cmd_portrait,
    "dump": _cmd_dump,
}


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        if cfg.command not in COMMANDS:
            raise UsageError(f"unknown command {cfg.command!r}")
        spec = parse_file(resolve_system_path(cfg.path))
        COMMANDS[cfg.command](cfg, spec, out)
    except (UsageError, ParseError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except MATH_ERRORS as exc:
        sys.stderr.write(f"math error ({type(exc).__name__}): {exc}\n")
        return EXIT_MATH
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        cfg = _config(ns)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    sys.stderr.write(f"cycleforge {__version__}\n")
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
