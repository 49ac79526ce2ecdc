"""Bring a planar field with a linear center to x' = -y + ..., y' = x + ...

The recipe: translate the equilibrium to the origin, change basis to
``[v, J v / omega]`` with ``v = (1, 0)`` (so the horizontal switching line
through the equilibrium stays horizontal), then rescale time by
``1 / omega``.  Time rescaling by a positive constant does not move zeros of
the displacement map.

Exact mode needs ``omega`` rational.  When ``omega**2`` is not the square of
a rational the exact transform does not exist over Q; float mode is then the
only option and symbolic callers get :class:`NormalFormError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .planar import NormalFormError, NotACenter, PlanarPoly

__all__ = ["NormalFormRecord", "to_normal_form", "apply_normal_form", "rational_sqrt"]


def rational_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None."""
    q = Fraction(q)
    if q < 0:
        return None
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


@dataclass(frozen=True)
class NormalFormRecord:
    """How normal-form coordinates (u, w) relate to the original (x, y).

    ``(x, y) = equilibrium + T (u, w)`` and ``t_original = t_normal / omega``.
    ``T`` is upper triangular, so ``w = 0`` is the line ``y = y0``.
    ``swapped`` is set when ``w > 0`` corresponds to ``y < y0``.
    """

    equilibrium: tuple[Any, Any]
    T: tuple[tuple[Any, Any], tuple[Any, Any]]
    omega: Any
    omega2: Any
    exact: bool

    @property
    def swapped(self) -> bool:
        return self.T[1][1] < 0

    @property
    def is_identity(self) -> bool:
        return (
            self.equilibrium == (0, 0)
            and self.T == ((1, 0), (0, 1))
            and self.omega == 1
        )

    def to_original(self, u: Any, w: Any) -> tuple[Any, Any]:
        (a, b), (_, d) = self.T
        x0, y0 = self.equilibrium
        return x0 + a * u + b * w, y0 + d * w

    def from_original(self, x: Any, y: Any) -> tuple[Any, Any]:
        (a, b), (_, d) = self.T
        x0, y0 = self.equilibrium
        w = (y - y0) / d
        u = (x - x0 - b * w) / a
        return u, w


def _coerce(poly: PlanarPoly, exact: bool) -> PlanarPoly:
    if exact:
        return poly.map_coefficients(Fraction)
    return poly.map_coefficients(float)


def apply_normal_form(dx: PlanarPoly, dy: PlanarPoly, rec: NormalFormRecord) -> tuple[PlanarPoly, PlanarPoly]:
    """Transform another field with an existing record (the other half)."""
    dx = _coerce(dx, rec.exact)
    dy = _coerce(dy, rec.exact)
    (a, b), (_, d) = rec.T
    x0, y0 = rec.equilibrium
    one = Fraction(1) if rec.exact else 1.0
    px = PlanarPoly({(0, 0): x0 * one, (1, 0): a * one, (0, 1): b * one})
    py = PlanarPoly({(0, 0): y0 * one, (0, 1): d * one})
    fx = dx.substitute(px, py)
    fy = dy.substitute(px, py)
    # T^-1 = [[1/a, -b/(a d)], [0, 1/d]]
    w_dot = fy * (one / d)
    u_dot = (fx - w_dot * b) * (one / a)
    scale = one / rec.omega
    return u_dot * scale, w_dot * scale


def to_normal_form(
    dx: PlanarPoly,
    dy: PlanarPoly,
    equilibrium: tuple[Any, Any] = (0, 0),
    exact: bool = True,
) -> tuple[PlanarPoly, PlanarPoly, NormalFormRecord]:
    """Normal form of ``x' = dx, y' = dy`` at a linear center.

    Raises NotACenter unless trace is 0 and determinant positive, and
    NormalFormError in exact mode when omega is irrational or the point
    is not an equilibrium.
    """
    conv = Fraction if exact else float
    x0, y0 = conv(equilibrium[0]), conv(equilibrium[1])
    dx = _coerce(dx, exact)
    dy = _coerce(dy, exact)
    one = conv(1)
    zero = conv(0)
    shift_x = PlanarPoly({(0, 0): x0, (1, 0): one})
    shift_y = PlanarPoly({(0, 0): y0, (0, 1): one})
    tx = dx.substitute(shift_x, shift_y)
    ty = dy.substitute(shift_x, shift_y)
    c0x, c0y = tx.coefficient(0, 0), ty.coefficient(0, 0)
    scale_ref = max(1.0, abs(float(x0)), abs(float(y0)))
    if (exact and (c0x or c0y)) or (not exact and max(abs(c0x), abs(c0y)) > 1e-12 * scale_ref):
        raise NormalFormError(f"({equilibrium[0]}, {equilibrium[1]}) is not an equilibrium")
    ja, jb = tx.coefficient(1, 0), tx.coefficient(0, 1)
    jc, jd = ty.coefficient(1, 0), ty.coefficient(0, 1)
    trace = ja + jd
    det = ja * jd - jb * jc
    tol = 0 if exact else 1e-12 * max(1.0, abs(float(ja)), abs(float(jd)))
    if abs(trace) > tol:
        raise NotACenter(f"trace of the Jacobian is {trace}, not 0")
    if det <= 0:
        raise NotACenter(f"determinant of the Jacobian is {det}, not positive")
    if exact:
        omega = rational_sqrt(det)
        if omega is None:
            raise NormalFormError(
                f"omega^2 = {det} is not a rational square; exact normal form needs "
                "an irrational rescaling (use numeric mode)"
            )
    else:
        omega = math.sqrt(det)
    if jc != 0:
        # v = (1, 0); second basis vector J v / omega
        T = ((one, ja / omega), (zero, jc / omega))
    else:  # pragma: no cover - unreachable for a center, kept for safety
        raise NotACenter("Jacobian has (1, 0) as an eigendirection")
    if not exact:
        tx, ty = tx.map_coefficients(float), ty.map_coefficients(float)
    rec = NormalFormRecord((x0, y0), T, omega, det, exact)
    # translation already applied; transform the shifted field
    shifted = NormalFormRecord((zero, zero), T, omega, det, exact)
    u_dot, w_dot = apply_normal_form(tx, ty, shifted)
    if not exact:
        u_dot = _clean_linear(u_dot, {(1, 0): 0.0, (0, 1): -1.0})
        w_dot = _clean_linear(w_dot, {(1, 0): 1.0, (0, 1): 0.0})
    return u_dot, w_dot, rec


def _clean_linear(poly: PlanarPoly, linear: dict) -> PlanarPoly:
    # snap round-off in the linear part to the exact normal-form values
    terms = dict(poly.terms)
    terms.pop((0, 0), None)
    for m, v in linear.items():
        if abs(terms.get(m, 0.0) - v) > 1e-9:
            raise NormalFormError("numeric normal form drifted")
        terms[m] = v
    return PlanarPoly(terms)
