"""Quasi-trigonometric polynomials: finite sums of theta^k cos(j theta) and
theta^k sin(j theta) with coefficients in a ring.

Coefficients may be Fractions, PiScalars or ParamJets; anything with ``+``,
``-``, ``*`` (also by Fraction) and a truthiness zero test works.  Terms are
keyed by ``(k, j, kind)`` where kind is :data:`COS` or :data:`SIN`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Any, Mapping

from .exactalg import PiOverflow, PiScalar

__all__ = [
    "COS",
    "SIN",
    "QuasiTrigPoly",
    "qtp_mul",
    "qtp_antiderivative",
    "qtp_derivative",
    "qtp_eval_at",
    "qtp_eval_pi_powers",
    "qtp_eval_float",
]

COS = 0
SIN = 1
_KIND_NAMES = {COS: "cos", SIN: "sin"}
_HALF = Fraction(1, 2)
EXACT_ABSCISSAE = {"-pi": -1, "0": 0, "pi": 1, "2pi": 2}


def _canonical(raw: Mapping[tuple, Any]) -> dict:
    out: dict = {}
    for (k, j, kind), c in raw.items():
        if k < 0:
            raise ValueError("theta power must be non-negative")
        if kind not in (COS, SIN):
            raise ValueError(f"kind must be COS or SIN, got {kind!r}")
        if j < 0:
            j = -j
            if kind == SIN:
                c = -c
        if kind == SIN and j == 0:
            continue  # sin(0) = 0
        key = (k, j, kind)
        out[key] = out[key] + c if key in out else c
    return {key: c for key, c in out.items() if c}


class QuasiTrigPoly:
    """Immutable sparse quasi-trigonometric polynomial."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, Any] | None = None, *, _trusted: bool = False):
        if _trusted:
            object.__setattr__(self, "terms", terms)
        else:
            object.__setattr__(self, "terms", _canonical(terms or {}))

    def __setattr__(self, name, value):
        raise AttributeError("QuasiTrigPoly is immutable")

    def __reduce__(self):
        return (QuasiTrigPoly, (self.terms,))

    # constructors
    @classmethod
    def zero(cls) -> "QuasiTrigPoly":
        return cls({}, _trusted=True)

    @classmethod
    def constant(cls, c: Any) -> "QuasiTrigPoly":
        return cls({(0, 0, COS): c}) if c else cls.zero()

    @classmethod
    def cos(cls, j: int = 1, c: Any = Fraction(1), k: int = 0) -> "QuasiTrigPoly":
        return cls({(k, j, COS): c})

    @classmethod
    def sin(cls, j: int = 1, c: Any = Fraction(1), k: int = 0) -> "QuasiTrigPoly":
        return cls({(k, j, SIN): c})

    @classmethod
    def theta(cls, k: int = 1, c: Any = Fraction(1)) -> "QuasiTrigPoly":
        return cls({(k, 0, COS): c})

    # structure
    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, QuasiTrigPoly):
            return self.terms == other.terms
        if not other:
            return not self.terms
        return self.terms == {(0, 0, COS): other}

    def __hash__(self):
        raise TypeError("QuasiTrigPoly is not hashable")

    @property
    def theta_degree(self) -> int:
        return max((k for k, _, _ in self.terms), default=0)

    @property
    def max_harmonic(self) -> int:
        return max((j for _, j, _ in self.terms), default=0)

    def canonicalize(self) -> "QuasiTrigPoly":
        return QuasiTrigPoly(self.terms)

    def map_coefficients(self, fn) -> "QuasiTrigPoly":
        return QuasiTrigPoly({key: fn(c) for key, c in self.terms.items()})

    # ring operations
    def __neg__(self) -> "QuasiTrigPoly":
        return QuasiTrigPoly({key: -c for key, c in self.terms.items()}, _trusted=True)

    def __add__(self, other) -> "QuasiTrigPoly":
        if not isinstance(other, QuasiTrigPoly):
            if not other:
                return self
            other = QuasiTrigPoly.constant(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for key, c in other.terms.items():
            if key in out:
                s = out[key] + c
                if s:
                    out[key] = s
                else:
                    del out[key]
            else:
                out[key] = c
        return QuasiTrigPoly(out, _trusted=True)

    __radd__ = __add__

    def __sub__(self, other) -> "QuasiTrigPoly":
        return self + (-other)

    def __rsub__(self, other) -> "QuasiTrigPoly":
        return (-self) + other

    def scale(self, c: Any) -> "QuasiTrigPoly":
        if not c:
            return QuasiTrigPoly.zero()
        out = {}
        for key, v in self.terms.items():
            w = v * c
            if w:
                out[key] = w
        return QuasiTrigPoly(out, _trusted=True)

    def __mul__(self, other) -> "QuasiTrigPoly":
        if isinstance(other, QuasiTrigPoly):
            return qtp_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other) -> "QuasiTrigPoly":
        if not other:
            return QuasiTrigPoly.zero()
        out = {}
        for key, v in self.terms.items():
            w = other * v
            if w:
                out[key] = w
        return QuasiTrigPoly(out, _trusted=True)

    # text
    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, j, kind in sorted(self.terms):
            c = self.terms[(k, j, kind)]
            factors = [f"({c})" if " " in str(c) else str(c)]
            if k:
                factors.append("theta" if k == 1 else f"theta^{k}")
            if j:
                factors.append(f"{_KIND_NAMES[kind]}({j} t)")
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"QuasiTrigPoly({self})"


def qtp_mul(f: QuasiTrigPoly, g: QuasiTrigPoly) -> QuasiTrigPoly:
    """Exact product via product-to-sum identities."""
    ft, gt = f.terms, g.terms
    if not ft or not gt:
        return QuasiTrigPoly.zero()
    out: dict = {}
    get = out.get
    for (k1, j1, s1), c1 in ft.items():
        for (k2, j2, s2), c2 in gt.items():
            c = c1 * c2 * _HALF
            if not c:
                continue
            k = k1 + k2
            jp = j1 + j2
            jm = j1 - j2
            if s1 == COS and s2 == COS:
                key = (k, jp, COS)
                out[key] = get(key, 0) + c
                key = (k, jm if jm >= 0 else -jm, COS)
                out[key] = get(key, 0) + c
            elif s1 == SIN and s2 == SIN:
                key = (k, jm if jm >= 0 else -jm, COS)
                out[key] = get(key, 0) + c
                key = (k, jp, COS)
                out[key] = get(key, 0) - c
            elif s1 == SIN:
                # sin a cos b = [sin(a+b) + sin(a-b)] / 2
                key = (k, jp, SIN)
                out[key] = get(key, 0) + c
                if jm > 0:
                    key = (k, jm, SIN)
                    out[key] = get(key, 0) + c
                elif jm < 0:
                    key = (k, -jm, SIN)
                    out[key] = get(key, 0) - c
            else:
                # cos a sin b = [sin(a+b) - sin(a-b)] / 2
                key = (k, jp, SIN)
                out[key] = get(key, 0) + c
                if jm > 0:
                    key = (k, jm, SIN)
                    out[key] = get(key, 0) - c
                elif jm < 0:
                    key = (k, -jm, SIN)
                    out[key] = get(key, 0) + c
    return QuasiTrigPoly({key: c for key, c in out.items() if c}, _trusted=True)


def qtp_antiderivative(f: QuasiTrigPoly) -> QuasiTrigPoly:
    """Antiderivative F with F(0) = 0."""
    out: dict = {}

    def acc(key, c):
        out[key] = out[key] + c if key in out else c

    for (k, j, kind), c in f.terms.items():
        if j == 0:
            acc((k + 1, 0, COS), c * Fraction(1, k + 1))
            continue
        inv_j = Fraction(1, j)
        # integration by parts, lowering k each step
        coef, kk, cur = c, k, kind
        while True:
            if cur == COS:
                # int t^kk cos = t^kk sin / j - kk/j int t^(kk-1) sin
                acc((kk, j, SIN), coef * inv_j)
                nxt = -coef * kk * inv_j
                cur = SIN
            else:
                # int t^kk sin = -t^kk cos / j + kk/j int t^(kk-1) cos
                acc((kk, j, COS), -coef * inv_j)
                nxt = coef * kk * inv_j
                cur = COS
            if kk == 0:
                break
            kk -= 1
            coef = nxt
    # F(0) is the sum of the theta^0 cosine coefficients
    at_zero = [c for (k, j, kind), c in out.items() if k == 0 and kind == COS]
    if at_zero:
        v0 = at_zero[0]
        for c in at_zero[1:]:
            v0 = v0 + c
        if v0:
            acc((0, 0, COS), -v0)
    return QuasiTrigPoly({key: c for key, c in out.items() if c}, _trusted=True)


def qtp_derivative(f: QuasiTrigPoly) -> QuasiTrigPoly:
    out: dict = {}

    def acc(key, c):
        out[key] = out[key] + c if key in out else c

    for (k, j, kind), c in f.terms.items():
        if k:
            acc((k - 1, j, kind), c * k)
        if j:
            if kind == COS:
                acc((k, j, SIN), -c * j)
            else:
                acc((k, j, COS), c * j)
    return QuasiTrigPoly({key: c for key, c in out.items() if c}, _trusted=True)


def _abscissa_multiple(theta: Any) -> int:
    if isinstance(theta, str):
        key = theta.replace(" ", "").replace("π", "pi").replace("−", "-")
        if key in EXACT_ABSCISSAE:
            return EXACT_ABSCISSAE[key]
    elif isinstance(theta, PiScalar) and theta.rat == 0 and theta.pi in (-1, 0, 1, 2):
        return int(theta.pi)
    elif isinstance(theta, int) and theta in (-1, 0, 1, 2):
        return theta
    raise ValueError(f"exact evaluation only at -pi, 0, pi, 2pi; got {theta!r}")


def qtp_eval_pi_powers(f: QuasiTrigPoly, theta: Any) -> dict[int, Any]:
    """Value at an exact abscissa as ``{pi power: coefficient}``.

    ``theta`` is one of ``"-pi"``, ``"0"``, ``"pi"``, ``"2pi"`` (or the
    integer multiple of pi, or the matching PiScalar).
    """
    s = _abscissa_multiple(theta)
    out: dict[int, Any] = {}
    for (k, j, kind), c in f.terms.items():
        if kind == SIN:
            continue
        if s == 0 and k > 0:
            continue
        factor = s**k * (1 if (s * j) % 2 == 0 else -1)
        v = c * factor
        out[k] = out[k] + v if k in out else v
    return {k: v for k, v in out.items() if v}


def qtp_eval_at(f: QuasiTrigPoly, theta: Any) -> Any:
    """Exact value at theta in {-pi, 0, pi, 2pi}.

    The base coefficient ring is extended by pi; a theta^2 (or higher) term
    surviving the substitution raises PiOverflow, as does pi times a
    coefficient that already carries pi.
    """
    total: Any = Fraction(0)
    for k, v in sorted(qtp_eval_pi_powers(f, theta).items()):
        if k == 0:
            total = v + total
        elif k == 1:
            total = v * PiScalar(0, 1) + total
        else:
            raise PiOverflow(f"theta^{k} term survives evaluation at {theta}")
    return total


def qtp_eval_float(f: QuasiTrigPoly, theta: float, coeff=float) -> float:
    """Floating-point value at an arbitrary theta (tests and diagnostics)."""
    total = 0.0
    for (k, j, kind), c in f.terms.items():
        trig = math.cos(j * theta) if kind == COS else math.sin(j * theta)
        total += coeff(c) * theta**k * trig
    return total

