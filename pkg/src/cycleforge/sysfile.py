"""Plain-text system descriptions.

Format (one directive per line, ``#`` starts a comment)::

    name palomba
    center 3/5 1/2          # equilibrium in the written coordinates
    eps 1/2                 # value of the family parameter
    side:+                  # following terms belong to y >= y0 (also side:-, side:both)
    dx 1 0 -1               # x' gains -1 * x^1 y^0
    dy 0 1 3
    family dy 0 1 1         # y' gains eps * y
    perturb degree 2        # attach a_kl, b_kl for 2 <= k+l <= 2
    perturb-factor dy 0 1 3 # multiply the b_kl monomials by this polynomial

Coefficients are rational literals (``p``, ``p/q`` or a finite decimal).
``side`` refers to the coordinates the file is written in.  The
perturbation and its factors live in normal-form coordinates; a factor
line outside any side block (or under ``side:both``) applies to both
halves.  Without ``center`` the system is taken to be already centred at
the origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .exactalg import parse_rational
from .filippov.system import NumericSystem, PolyField
from .lyapunov.normal_form import NormalFormRecord, apply_normal_form, to_normal_form
from .lyapunov.planar import LOWER, UPPER, HalfSystem, PiecewiseSystem, PlanarPoly
from .lyapunov.series import attach_perturbation

__all__ = ["ParseError", "SystemSpec", "parse", "parse_file", "dump", "to_piecewise", "to_numeric"]

SIDES = ("+", "-")
EQS = ("dx", "dy")

Terms = dict[tuple[int, int], Fraction]


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


def _empty() -> dict[str, dict[str, Terms]]:
    return {s: {e: {} for e in EQS} for s in SIDES}


@dataclass
class SystemSpec:
    name: str = ""
    center: tuple[Fraction, Fraction] | None = None
    eps: Fraction = Fraction(0)
    terms: dict[str, dict[str, Terms]] = field(default_factory=_empty)
    family: dict[str, dict[str, Terms]] = field(default_factory=_empty)
    perturb_degree: int | None = None
    factors: dict[str, dict[str, Terms]] = field(default_factory=_empty)

    def polys(self, side: str, eps: Fraction | float | None = None) -> tuple[PlanarPoly, PlanarPoly]:
        """(dx, dy) of one side in the written coordinates at the given eps."""
        e = self.eps if eps is None else eps
        out = []
        for eq in EQS:
            t: dict = dict(self.terms[side][eq])
            for m, c in self.family[side][eq].items():
                t[m] = t.get(m, 0) + e * c
            out.append(PlanarPoly(t))
        return out[0], out[1]

    def base_polys(self, side: str) -> tuple[PlanarPoly, PlanarPoly]:
        return self.polys(side, Fraction(0))

    @property
    def has_family(self) -> bool:
        return any(self.family[s][e] for s in SIDES for e in EQS)

    def with_eps(self, eps) -> "SystemSpec":
        return SystemSpec(self.name, self.center, Fraction(eps), self.terms, self.family, self.perturb_degree, self.factors)


def _frac(tok: str, line: int, col: int) -> Fraction:
    try:
        return parse_rational(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(str(exc), line, col) from None


def _int(tok: str, line: int, col: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise ParseError(f"expected a non-negative integer, got {tok!r}", line, col) from None
    if v < 0:
        raise ParseError(f"expected a non-negative integer, got {tok!r}", line, col)
    return v


def _tokens(raw: str) -> list[tuple[str, int]]:
    out = []
    i = 0
    while i < len(raw):
        if raw[i].isspace():
            i += 1
            continue
        j = i
        while j < len(raw) and not raw[j].isspace():
            j += 1
        out.append((raw[i:j], i + 1))
        i = j
    return out


def _add(table: dict, sides: tuple[str, ...], eq: str, m: tuple[int, int], c: Fraction, line: int, col: int) -> None:
    for s in sides:
        if m in table[s][eq]:
            raise ParseError(f"duplicate term {eq} {m[0]} {m[1]} on side {s}", line, col)
        if c:
            table[s][eq][m] = c


def parse(text: str) -> SystemSpec:
    spec = SystemSpec()
    sides: tuple[str, ...] | None = None
    factor_sides: tuple[str, ...] = SIDES
    seen = set()
    any_term = False
    for n, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        toks = _tokens(body)
        if not toks:
            continue
        head, hc = toks[0]
        args = toks[1:]

        def need(k: int) -> None:
            if len(args) != k:
                col = args[k][1] if len(args) > k else len(body.rstrip()) + 1
                raise ParseError(f"{head} takes {k} argument(s), got {len(args)}", n, col)

        if head in ("name", "center", "eps", "perturb"):
            if head in seen:
                raise ParseError(f"repeated directive {head}", n, hc)
            seen.add(head)
        if head == "name":
            need(1)
            spec.name = args[0][0]
        elif head == "center":
            need(2)
            spec.center = (_frac(args[0][0], n, args[0][1]), _frac(args[1][0], n, args[1][1]))
        elif head == "eps":
            need(1)
            spec.eps = _frac(args[0][0], n, args[0][1])
        elif head.startswith("side:"):
            need(0)
            which = head[5:]
            if which == "both":
                sides = SIDES
            elif which in SIDES:
                sides = (which,)
            else:
                raise ParseError(f"unknown side {which!r} (use +, - or both)", n, hc + 5)
            factor_sides = sides
        elif head in EQS or head == "family":
            if sides is None:
                raise ParseError(f"{head} before any side: header", n, hc)
            if head == "family":
                if not args or args[0][0] not in EQS:
                    raise ParseError("family needs dx or dy", n, args[0][1] if args else hc)
                eq, rest, table = args[0][0], args[1:], spec.family
            else:
                eq, rest, table = head, args, spec.terms
            if len(rest) != 3:
                raise ParseError(f"term needs k l c, got {len(rest)} field(s)", n, rest[0][1] if rest else hc)
            k = _int(rest[0][0], n, rest[0][1])
            l = _int(rest[1][0], n, rest[1][1])
            c = _frac(rest[2][0], n, rest[2][1])
            _add(table, sides, eq, (k, l), c, n, hc)
            any_term = True
        elif head == "perturb":
            need(2)
            if args[0][0] != "degree":
                raise ParseError("expected 'perturb degree n'", n, args[0][1])
            d = _int(args[1][0], n, args[1][1])
            if d < 2:
                raise ParseError("perturbation degree must be at least 2", n, args[1][1])
            spec.perturb_degree = d
        elif head == "perturb-factor":
            need(4)
            eq = args[0][0]
            if eq not in EQS:
                raise ParseError("perturb-factor needs dx or dy", n, args[0][1])
            m = (_int(args[1][0], n, args[1][1]), _int(args[2][0], n, args[2][1]))
            _add(spec.factors, factor_sides, eq, m, _frac(args[3][0], n, args[3][1]), n, hc)
        else:
            raise ParseError(f"unknown directive {head!r}", n, hc)
    if not any_term:
        raise ParseError("no dx/dy terms", 0, 0)
    if any(spec.factors[s][e] for s in SIDES for e in EQS) and spec.perturb_degree is None:
        raise ParseError("perturb-factor without perturb degree", 0, 0)
    return spec


def parse_file(path: str) -> SystemSpec:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return parse(text)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _term_lines(prefix: str, terms: Mapping[tuple[int, int], Fraction]) -> list[str]:
    return [f"{prefix} {k} {l} {_fmt(c)}" for (k, l), c in sorted(terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))]


def _side_blocks(table: dict, render) -> list[str]:
    if table["+"] == table["-"]:
        body = render(table["+"])
        return ["side:both"] + body if body else []
    out = []
    for s in SIDES:
        body = render(table[s])
        if body:
            out += [f"side:{s}"] + body
    return out


def dump(spec: SystemSpec) -> str:
    """Canonical text; ``parse(dump(s)) == s``."""
    out = []
    if spec.name:
        out.append(f"name {spec.name}")
    if spec.center is not None:
        out.append(f"center {_fmt(spec.center[0])} {_fmt(spec.center[1])}")
    if spec.eps:
        out.append(f"eps {_fmt(spec.eps)}")

    def eqs(t: dict) -> list[str]:
        return _term_lines("dx", t["dx"]) + _term_lines("dy", t["dy"])

    def fam(t: dict) -> list[str]:
        return _term_lines("family dx", t["dx"]) + _term_lines("family dy", t["dy"])

    def fac(t: dict) -> list[str]:
        return _term_lines("perturb-factor dx", t["dx"]) + _term_lines("perturb-factor dy", t["dy"])

    if spec.terms["+"] == spec.terms["-"] and spec.family["+"] == spec.family["-"]:
        out += ["side:both"] + eqs(spec.terms["+"]) + fam(spec.family["+"])
    else:
        for s in SIDES:
            body = eqs(spec.terms[s]) + fam(spec.family[s])
            if body:
                out += [f"side:{s}"] + body
    if spec.perturb_degree is not None:
        out.append(f"perturb degree {spec.perturb_degree}")
        out += _side_blocks(spec.factors, fac)
    return "\n".join(out) + "\n"


# written side -> normal-form half, honouring an orientation flip of the basis
def _half_of(side: str, swapped: bool) -> str:
    up = side == "+"
    return UPPER if up != swapped else LOWER


def _record(spec: SystemSpec, exact: bool) -> NormalFormRecord | None:
    if spec.center is None:
        return None
    dx, dy = spec.base_polys("+")
    _, _, rec = to_normal_form(dx, dy, spec.center, exact=exact)
    return rec


def _normal_halves(spec: SystemSpec, exact: bool, eps) -> tuple[dict, NormalFormRecord | None]:
    rec = _record(spec, exact)
    halves = {}
    for side in SIDES:
        dx, dy = spec.polys(side, eps)
        if rec is not None:
            dx, dy = apply_normal_form(dx, dy, rec)
        halves[_half_of(side, rec is not None and rec.swapped)] = (dx, dy, side)
    return halves, rec


def to_piecewise(spec: SystemSpec, eps: Fraction | None = None) -> PiecewiseSystem:
    """Exact normal-form system, with the perturbation attached when requested.

    Raises NormalFormError when a half is not in normal form after the
    change of coordinates or the exact transform does not exist.
    """
    e = spec.eps if eps is None else Fraction(eps)
    halves, rec = _normal_halves(spec, True, e)
    base = PiecewiseSystem(
        HalfSystem(halves[UPPER][0], halves[UPPER][1], UPPER),
        HalfSystem(halves[LOWER][0], halves[LOWER][1], LOWER),
        name=spec.name,
    )
    if spec.perturb_degree is None:
        return base
    factors = {}
    for half, (_, _, side) in halves.items():
        fx = spec.factors[side]["dx"]
        fy = spec.factors[side]["dy"]
        factors[half] = (PlanarPoly(fx or {(0, 0): Fraction(1)}), PlanarPoly(fy or {(0, 0): Fraction(1)}))
    s = attach_perturbation(base, spec.perturb_degree, factors)
    return PiecewiseSystem(s.upper, s.lower, s.param_set, spec.name)


def to_numeric(spec: SystemSpec, eps: float | Fraction | None = None, normalize: bool = True) -> NumericSystem:
    """Float system in normal-form coordinates (written coordinates if not ``normalize``).

    The transform is computed in floats, so an irrational frequency is fine.
    Perturbation directives are ignored: numeric commands act on the base
    system.
    """
    e = spec.eps if eps is None else eps
    if not normalize:
        u = spec.polys("+", e)
        lo = spec.polys("-", e)
        return NumericSystem(PolyField.from_polys(*u), PolyField.from_polys(*lo), None, spec.name, float(e))
    halves, rec = _normal_halves(spec, False, e)
    return NumericSystem(
        PolyField.from_polys(halves[UPPER][0], halves[UPPER][1]),
        PolyField.from_polys(halves[LOWER][0], halves[LOWER][1]),
        rec,
        spec.name,
        float(e),
    )


def numeric_family_member(spec: SystemSpec, eps: float) -> NumericSystem:
    """Top-level factory for scans (picklable through functools.partial)."""
    return to_numeric(spec, float(eps))
