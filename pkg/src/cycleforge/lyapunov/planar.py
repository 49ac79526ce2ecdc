"""Planar polynomials, half-systems and piecewise systems split by y = 0."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterator, Mapping

from ..exactalg import ParamJet, ParamSet

__all__ = [
    "PlanarPoly",
    "HalfSystem",
    "PiecewiseSystem",
    "NormalFormError",
    "NotACenter",
    "UPPER",
    "LOWER",
]

UPPER = "upper"
LOWER = "lower"
# perturbation parameters of the upper half carry side "+", the lower "-"
SIDE_OF = {UPPER: "+", LOWER: "-"}


class NormalFormError(ValueError):
    """The linear part is not (and cannot exactly be made) -y, x."""


class NotACenter(NormalFormError):
    """Jacobian at the equilibrium does not have purely imaginary eigenvalues."""


class PlanarPoly:
    """Sparse bivariate polynomial ``sum c_kl x^k y^l``.

    Coefficients are Fractions (or ints), ParamJets, or floats for numeric
    work.  Zero coefficients are never stored.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int], Any] | None = None):
        clean: dict[tuple[int, int], Any] = {}
        for (k, l), c in (terms or {}).items():
            if k < 0 or l < 0:
                raise ValueError("negative exponent")
            if isinstance(c, int) and not isinstance(c, bool):
                c = Fraction(c)
            if c:
                key = (int(k), int(l))
                clean[key] = clean[key] + c if key in clean else c
        object.__setattr__(self, "terms", {key: c for key, c in clean.items() if c})

    def __setattr__(self, name, value):
        raise AttributeError("PlanarPoly is immutable")

    def __reduce__(self):
        return (PlanarPoly, (self.terms,))

    @classmethod
    def x(cls) -> "PlanarPoly":
        return cls({(1, 0): Fraction(1)})

    @classmethod
    def y(cls) -> "PlanarPoly":
        return cls({(0, 1): Fraction(1)})

    @classmethod
    def const(cls, c: Any) -> "PlanarPoly":
        return cls({(0, 0): c})

    @property
    def degree(self) -> int:
        return max((k + l for k, l in self.terms), default=-1)

    @property
    def min_degree(self) -> int:
        return min((k + l for k, l in self.terms), default=-1)

    def coefficient(self, k: int, l: int) -> Any:
        return self.terms.get((k, l), Fraction(0))

    def homogeneous(self, d: int) -> "PlanarPoly":
        return PlanarPoly({m: c for m, c in self.terms.items() if sum(m) == d})

    def truncate_below(self, d: int) -> "PlanarPoly":
        """Drop all terms of total degree < d."""
        return PlanarPoly({m: c for m, c in self.terms.items() if sum(m) >= d})

    def items(self) -> Iterator[tuple[tuple[int, int], Any]]:
        for m in sorted(self.terms, key=lambda m: (m[0] + m[1], -m[0])):
            yield m, self.terms[m]

    def map_coefficients(self, fn: Callable[[Any], Any]) -> "PlanarPoly":
        return PlanarPoly({m: fn(c) for m, c in self.terms.items()})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, PlanarPoly):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        raise TypeError("PlanarPoly is not hashable")

    def __neg__(self) -> "PlanarPoly":
        return PlanarPoly({m: -c for m, c in self.terms.items()})

    def __add__(self, other) -> "PlanarPoly":
        if not isinstance(other, PlanarPoly):
            other = PlanarPoly.const(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return PlanarPoly(out)

    __radd__ = __add__

    def __sub__(self, other) -> "PlanarPoly":
        if not isinstance(other, PlanarPoly):
            other = PlanarPoly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "PlanarPoly":
        return (-self) + other

    def __mul__(self, other) -> "PlanarPoly":
        if isinstance(other, PlanarPoly):
            out: dict = {}
            for (k1, l1), c1 in self.terms.items():
                for (k2, l2), c2 in other.terms.items():
                    m = (k1 + k2, l1 + l2)
                    v = c1 * c2
                    out[m] = out[m] + v if m in out else v
            return PlanarPoly(out)
        return PlanarPoly({m: c * other for m, c in self.terms.items()})

    def __rmul__(self, other) -> "PlanarPoly":
        return PlanarPoly({m: other * c for m, c in self.terms.items()})

    def __pow__(self, n: int) -> "PlanarPoly":
        out = PlanarPoly.const(Fraction(1))
        for _ in range(n):
            out = out * self
        return out

    def evaluate(self, x: Any, y: Any) -> Any:
        total: Any = 0
        for (k, l), c in self.terms.items():
            total = total + c * x**k * y**l
        return total

    def substitute(self, px: "PlanarPoly", py: "PlanarPoly") -> "PlanarPoly":
        """Composition ``self(px(x, y), py(x, y))``."""
        out = PlanarPoly()
        xp: dict[int, PlanarPoly] = {0: PlanarPoly.const(Fraction(1))}
        yp: dict[int, PlanarPoly] = {0: PlanarPoly.const(Fraction(1))}
        for (k, l), c in self.terms.items():
            for cache, base, n in ((xp, px, k), (yp, py, l)):
                top = max(cache)
                while top < n:
                    cache[top + 1] = cache[top] * base
                    top += 1
            out = out + (xp[k] * yp[l]) * c
        return out

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (k, l), c in self.items():
            mono = "*".join(
                s for s in (("x" if k == 1 else f"x^{k}") if k else "", ("y" if l == 1 else f"y^{l}") if l else "") if s
            )
            cs = str(c)
            parts.append(f"({cs})*{mono}" if mono else f"({cs})")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"PlanarPoly({self})"


def _linear_is_normal(dx: PlanarPoly, dy: PlanarPoly) -> bool:
    want = [
        (dx, (0, 0), 0), (dx, (1, 0), 0), (dx, (0, 1), -1),
        (dy, (0, 0), 0), (dy, (1, 0), 1), (dy, (0, 1), 0),
    ]
    for poly, m, v in want:
        c = poly.coefficient(*m)
        if isinstance(c, ParamJet):
            if c.gradient or c.constant != v:
                return False
        elif c != v:
            return False
    return True


@dataclass(frozen=True)
class HalfSystem:
    """``x' = dx, y' = dy`` on one side of y = 0, in normal form."""

    dx: PlanarPoly
    dy: PlanarPoly
    side: str

    def __post_init__(self):
        if self.side not in (UPPER, LOWER):
            raise ValueError(f"side must be {UPPER!r} or {LOWER!r}")
        if not _linear_is_normal(self.dx, self.dy):
            raise NormalFormError(
                f"{self.side} half: linear part must be x' = -y, y' = x with no constant term"
            )

    @property
    def P(self) -> PlanarPoly:
        return self.dx.truncate_below(2)

    @property
    def Q(self) -> PlanarPoly:
        return self.dy.truncate_below(2)

    @property
    def degree(self) -> int:
        return max(self.dx.degree, self.dy.degree)


@dataclass(frozen=True)
class PiecewiseSystem:
    """Two normal-form halves sharing a parameter set; switching line y = 0."""

    upper: HalfSystem
    lower: HalfSystem
    param_set: ParamSet = field(default_factory=ParamSet)
    name: str = ""

    def __post_init__(self):
        if self.upper.side != UPPER or self.lower.side != LOWER:
            raise ValueError("upper/lower halves have mismatched side tags")
        allowed = {UPPER: set(self.param_set.side_ids("+")), LOWER: set(self.param_set.side_ids("-"))}
        for half in (self.upper, self.lower):
            for poly in (half.dx, half.dy):
                for c in poly.terms.values():
                    if isinstance(c, ParamJet) and not set(c.gradient) <= allowed[half.side]:
                        raise ValueError(f"{half.side} half references parameters of the other side")

    def half(self, side: str) -> HalfSystem:
        return self.upper if side == UPPER else self.lower

    @property
    def has_parameters(self) -> bool:
        return len(self.param_set) > 0

    def at_parameters(self, values: Mapping[int, Any]) -> "PiecewiseSystem":
        """Substitute parameter values (first-order jet evaluation)."""

        def sub(c):
            return c.evaluate(values) if isinstance(c, ParamJet) else c

        halves = [
            HalfSystem(h.dx.map_coefficients(sub), h.dy.map_coefficients(sub), h.side)
            for h in (self.upper, self.lower)
        ]
        return PiecewiseSystem(halves[0], halves[1], ParamSet(), self.name)

    def constant_part(self) -> "PiecewiseSystem":
        return self.at_parameters({})
