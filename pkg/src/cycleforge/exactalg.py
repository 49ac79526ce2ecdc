"""Exact coefficient arithmetic.

Rationals are :class:`fractions.Fraction`.  On top of them this module adds

* :class:`PiScalar`, elements ``p + q*pi`` of the subring Q + Q*pi of Q(pi),
  with pi kept as a formal transcendental symbol;
* :class:`ParamJet`, first-order jets ``c0 + sum_i c_i * eps_i`` over a
  sparse set of integer parameter ids, generic in the entry ring;
* :class:`ParamSet`, the ordered list of perturbation parameters;
* :func:`exact_rank`, fraction-free rank over Q(pi).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping, Sequence

__all__ = [
    "PiOverflow",
    "PiScalar",
    "ParamDescriptor",
    "ParamSet",
    "ParamJet",
    "jet_mul",
    "exact_rank",
    "parse_rational",
    "parse_pi_scalar",
]

Scalar = Fraction | int


class PiOverflow(ArithmeticError):
    """Raised when a computation would leave Q + Q*pi (a pi**2 term)."""


_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_rational(text: str) -> Fraction:
    """Parse ``p``, ``p/q`` or a finite decimal into a Fraction."""
    m = _RATIONAL_RE.match(text)
    if m:
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(m.group(1)), den)
    try:
        return Fraction(text.strip())
    except ValueError:
        raise ValueError(f"not a rational literal: {text!r}") from None


class PiScalar:
    """Immutable element ``rat + pi_part*pi`` of Q + Q*pi."""

    __slots__ = ("rat", "pi")

    def __init__(self, rat: Scalar = 0, pi: Scalar = 0):
        object.__setattr__(self, "rat", Fraction(rat))
        object.__setattr__(self, "pi", Fraction(pi))

    def __setattr__(self, name, value):
        raise AttributeError("PiScalar is immutable")

    def __reduce__(self):
        return (PiScalar, (self.rat, self.pi))

    @classmethod
    def coerce(cls, value: Any) -> "PiScalar":
        if isinstance(value, PiScalar):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(value, 0)
        raise TypeError(f"cannot convert {type(value).__name__} to PiScalar")

    @property
    def is_rational(self) -> bool:
        return self.pi == 0

    def __bool__(self) -> bool:
        return bool(self.rat) or bool(self.pi)

    def __eq__(self, other) -> bool:
        if isinstance(other, PiScalar):
            return self.rat == other.rat and self.pi == other.pi
        if isinstance(other, (int, Fraction)):
            return self.pi == 0 and self.rat == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.pi == 0:
            return hash(self.rat)
        return hash((self.rat, self.pi))

    def __neg__(self) -> "PiScalar":
        return PiScalar(-self.rat, -self.pi)

    def __add__(self, other) -> "PiScalar":
        if isinstance(other, PiScalar):
            return PiScalar(self.rat + other.rat, self.pi + other.pi)
        if isinstance(other, (int, Fraction)):
            return PiScalar(self.rat + other, self.pi)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other) -> "PiScalar":
        if isinstance(other, PiScalar):
            return PiScalar(self.rat - other.rat, self.pi - other.pi)
        if isinstance(other, (int, Fraction)):
            return PiScalar(self.rat - other, self.pi)
        return NotImplemented

    def __rsub__(self, other) -> "PiScalar":
        return (-self).__add__(other)

    def __mul__(self, other) -> "PiScalar":
        if isinstance(other, PiScalar):
            if self.pi and other.pi:
                raise PiOverflow(f"({self}) * ({other}) has a pi**2 term")
            return PiScalar(
                self.rat * other.rat, self.rat * other.pi + self.pi * other.rat
            )
        if isinstance(other, (int, Fraction)):
            return PiScalar(self.rat * other, self.pi * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other) -> "PiScalar":
        if isinstance(other, (int, Fraction)):
            return PiScalar(self.rat / other, self.pi / other)
        if isinstance(other, PiScalar) and other.pi == 0:
            return PiScalar(self.rat / other.rat, self.pi / other.rat)
        if isinstance(other, PiScalar):
            # proportional operands have a rational quotient
            if self.rat * other.pi == self.pi * other.rat:
                return PiScalar(self.pi / other.pi)
            raise PiOverflow("quotient leaves Q + Q*pi")
        return NotImplemented

    def evaluate(self, pi_value: Any) -> Any:
        """Numeric value for a given numeric pi (float or mpmath number)."""
        one = pi_value * 0 + 1
        return (one * self.rat.numerator) / self.rat.denominator + (
            pi_value * self.pi.numerator
        ) / self.pi.denominator

    def __float__(self) -> float:
        import math

        return float(self.rat) + float(self.pi) * math.pi

    def __str__(self) -> str:
        if self.pi == 0:
            return str(self.rat)
        pi_txt = f"{abs(self.pi)}*pi"
        if self.rat == 0:
            return pi_txt if self.pi > 0 else f"-{pi_txt}"
        sign = "+" if self.pi > 0 else "-"
        return f"{self.rat} {sign} {pi_txt}"

    def __repr__(self) -> str:
        return f"PiScalar({self})"


_PI_RE = re.compile(
    r"^\s*(?:(?P<rat>[+-]?\d+(?:/\d+)?)\s*)?"
    r"(?:(?P<sign>[+-])?\s*(?P<pi>\d+(?:/\d+)?)\*pi)?\s*$"
)


def parse_pi_scalar(text: str) -> PiScalar:
    """Inverse of ``str(PiScalar)``."""
    m = _PI_RE.match(text)
    if not m or (m.group("rat") is None and m.group("pi") is None):
        raise ValueError(f"not a PiScalar literal: {text!r}")
    rat = parse_rational(m.group("rat")) if m.group("rat") else Fraction(0)
    pi = Fraction(0)
    if m.group("pi"):
        pi = parse_rational(m.group("pi"))
        if m.group("sign") == "-":
            pi = -pi
    return PiScalar(rat, pi)


# --------------------------------------------------------------------------
# parameters

ROLES = ("a", "b")
SIDES = ("-", "+")


@dataclass(frozen=True, order=False)
class ParamDescriptor:
    """Coefficient ``a^side_{kl}`` (in dx) or ``b^side_{kl}`` (in dy)."""

    side: str
    role: str
    k: int
    l: int

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"side must be '-' or '+', got {self.side!r}")
        if self.role not in ROLES:
            raise ValueError(f"role must be 'a' or 'b', got {self.role!r}")
        if self.k < 0 or self.l < 0:
            raise ValueError("exponents must be non-negative")

    @property
    def name(self) -> str:
        if self.k < 10 and self.l < 10:
            return f"{self.role}{self.side}{self.k}{self.l}"
        return f"{self.role}{self.side}{self.k}_{self.l}"

    def sort_key(self) -> tuple:
        # side -, then +; role a then b; graded-lex on (k, l)
        return (SIDES.index(self.side), ROLES.index(self.role), self.k + self.l, self.k)

    @classmethod
    def parse(cls, name: str) -> "ParamDescriptor":
        m = re.fullmatch(r"([ab])([+-])(\d)(\d)|([ab])([+-])(\d+)_(\d+)", name.strip())
        if not m:
            raise ValueError(f"bad parameter name {name!r}")
        g = [x for x in m.groups() if x is not None]
        return cls(side=g[1], role=g[0], k=int(g[2]), l=int(g[3]))

    def __str__(self) -> str:
        return self.name


class ParamSet(Sequence[ParamDescriptor]):
    """Ordered, duplicate-free parameter list; parameter id = position."""

    def __init__(self, descriptors: Iterable[ParamDescriptor] = ()):
        given = list(descriptors)
        items = sorted(set(given), key=ParamDescriptor.sort_key)
        if len(items) != len(given):
            raise ValueError("duplicate parameter descriptors")
        self._items: tuple[ParamDescriptor, ...] = tuple(items)
        self._index = {d: i for i, d in enumerate(self._items)}

    def __getitem__(self, i):
        return self._items[i]

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def __eq__(self, other) -> bool:
        return isinstance(other, ParamSet) and self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def index(self, d: ParamDescriptor) -> int:  # type: ignore[override]
        return self._index[d]

    def names(self) -> list[str]:
        return [d.name for d in self._items]

    def side_ids(self, side: str) -> list[int]:
        return [i for i, d in enumerate(self._items) if d.side == side]

    def __repr__(self) -> str:
        return f"ParamSet({', '.join(self.names())})"


# --------------------------------------------------------------------------
# jets


class ParamJet:
    """First-order jet ``constant + sum_p gradient[p] * eps_p``.

    Entries live in any commutative ring supporting ``+``, ``-``, ``*`` and
    truthiness as a zero test (Fraction, PiScalar, QuasiTrigPoly, ...).
    Products drop every term of second order in the parameters.
    """

    __slots__ = ("constant", "gradient")

    def __init__(self, constant: Any = Fraction(0), gradient: Mapping[int, Any] | None = None):
        self.constant = constant
        self.gradient: dict[int, Any] = (
            {p: v for p, v in gradient.items() if v} if gradient else {}
        )

    @classmethod
    def variable(cls, pid: int, one: Any = Fraction(1), zero: Any = Fraction(0)) -> "ParamJet":
        return cls(zero, {pid: one})

    def __bool__(self) -> bool:
        return bool(self.constant) or bool(self.gradient)

    def __eq__(self, other) -> bool:
        if isinstance(other, ParamJet):
            return self.constant == other.constant and self.gradient == other.gradient
        return not self.gradient and self.constant == other

    def __hash__(self):
        raise TypeError("ParamJet is not hashable")

    def map(self, fn: Callable[[Any], Any]) -> "ParamJet":
        return ParamJet(fn(self.constant), {p: fn(v) for p, v in self.gradient.items()})

    def __neg__(self) -> "ParamJet":
        return self.map(lambda v: -v)

    def _combine(self, other: "ParamJet", sign: int) -> "ParamJet":
        grad = dict(self.gradient)
        for p, v in other.gradient.items():
            if p in grad:
                grad[p] = grad[p] + v if sign > 0 else grad[p] - v
            else:
                grad[p] = v if sign > 0 else -v
        const = self.constant + other.constant if sign > 0 else self.constant - other.constant
        return ParamJet(const, grad)

    def __add__(self, other) -> "ParamJet":
        if isinstance(other, ParamJet):
            return self._combine(other, 1)
        return ParamJet(self.constant + other, self.gradient)

    __radd__ = __add__

    def __sub__(self, other) -> "ParamJet":
        if isinstance(other, ParamJet):
            return self._combine(other, -1)
        return ParamJet(self.constant - other, self.gradient)

    def __rsub__(self, other) -> "ParamJet":
        return (-self).__add__(other)

    def __mul__(self, other) -> "ParamJet":
        if isinstance(other, ParamJet):
            return jet_mul(self, other)
        return self.map(lambda v: v * other)

    def __rmul__(self, other) -> "ParamJet":
        return self.map(lambda v: other * v)

    def evaluate(self, values: Mapping[int, Any]) -> Any:
        """First-order evaluation at parameter values ``{pid: value}``."""
        acc = self.constant
        for p, v in self.gradient.items():
            if p in values:
                acc = acc + v * values[p]
        return acc

    def relabel(self, mapping: Mapping[int, int]) -> "ParamJet":
        return ParamJet(self.constant, {mapping[p]: v for p, v in self.gradient.items()})

    def __repr__(self) -> str:
        parts = [repr(self.constant)] + [f"{v!r}*e{p}" for p, v in sorted(self.gradient.items())]
        return "ParamJet(" + " + ".join(parts) + ")"


def jet_mul(a: ParamJet, b: ParamJet) -> ParamJet:
    """Product truncated at first order in the parameters."""
    ca, cb = a.constant, b.constant
    grad: dict[int, Any] = {}
    if cb:
        for p, v in a.gradient.items():
            grad[p] = v * cb
    if ca:
        for p, v in b.gradient.items():
            t = ca * v
            grad[p] = grad[p] + t if p in grad else t
    return ParamJet(ca * cb, grad)


# --------------------------------------------------------------------------
# rank over Q(pi)

# Polynomials in pi are tuples of Fractions, lowest degree first, no trailing 0.


def poly_trim(p: list) -> tuple:
    while p and not p[-1]:
        p.pop()
    return tuple(p)


def poly_mul(a: tuple, b: tuple) -> tuple:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return poly_trim(out)


def poly_sub(a: tuple, b: tuple) -> tuple:
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    return poly_trim([Fraction(x) for x in out])


def poly_div_exact(a: tuple, b: tuple) -> tuple:
    if not a:
        return ()
    rem = list(a)
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    lead = b[-1]
    for i in range(len(q) - 1, -1, -1):
        c = rem[i + len(b) - 1] / lead
        q[i] = c
        if c:
            for j, y in enumerate(b):
                rem[i + j] -= c * y
    if any(rem):
        raise ArithmeticError("inexact polynomial division in Bareiss step")
    return poly_trim(q)


def as_pi_poly(x: Any) -> tuple:
    s = PiScalar.coerce(x)
    return poly_trim([s.rat, s.pi])


def exact_rank(matrix: Sequence[Sequence[Any]]) -> tuple[int, list[int]]:
    """Rank over Q(pi) and the pivot columns (leftmost independent columns).

    Entries are Fractions or PiScalars.  pi is an indeterminate, so entries
    become polynomials of degree <= 1 and Bareiss elimination keeps every
    intermediate entry a polynomial.
    """
    rows = [[as_pi_poly(x) for x in row] for row in matrix]
    if not rows or not rows[0]:
        return 0, []
    nrows, ncols = len(rows), len(rows[0])
    prev: tuple = (Fraction(1),)
    rank = 0
    pivots: list[int] = []
    for col in range(ncols):
        if rank == nrows:
            break
        sel = next((r for r in range(rank, nrows) if rows[r][col]), None)
        if sel is None:
            continue
        rows[rank], rows[sel] = rows[sel], rows[rank]
        piv = rows[rank][col]
        for r in range(rank + 1, nrows):
            lead = rows[r][col]
            new_row = rows[r][:]
            for c in range(col, ncols):
                num = poly_sub(poly_mul(piv, rows[r][c]), poly_mul(lead, rows[rank][c]))
                new_row[c] = poly_div_exact(num, prev) if num else ()
            rows[r] = new_row
        prev = piv
        pivots.append(col)
        rank += 1
    return rank, pivots
