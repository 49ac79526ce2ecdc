"""High-precision Taylor-series integration of polynomial fields (mpmath).

Used as the independent numeric oracle for the displacement series: double
precision cannot resolve errors of size rho**9 at rho = 2.5e-3.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Mapping

import mpmath

__all__ = ["TaylorField", "taylor_half_flight", "taylor_displacement"]


class TaylorField:
    """``z' = sign * F(z)`` for a polynomial field, coefficients as mpf."""

    def __init__(self, dx: Mapping[tuple[int, int], Any], dy: Mapping[tuple[int, int], Any], sign: int = 1):
        def conv(c):
            if isinstance(c, Fraction):
                return mpmath.mpf(c.numerator) / c.denominator
            return mpmath.mpf(c)

        self.tx = [(k, l, sign * conv(c)) for (k, l), c in sorted(dx.items())]
        self.ty = [(k, l, sign * conv(c)) for (k, l), c in sorted(dy.items())]
        self.kmax = max([k for k, _, _ in self.tx + self.ty] or [0])
        self.lmax = max([l for _, l, _ in self.tx + self.ty] or [0])

    def coefficients(self, x0, y0, order: int) -> tuple[list, list]:
        """Taylor coefficients of the solution through (x0, y0) at t = 0."""
        X = [x0]
        Y = [y0]
        zero = mpmath.mpf(0)
        # px[k][n] = [t^n] x(t)^k, likewise py
        px = [[mpmath.mpf(1)] + [zero] * order] + [[] for _ in range(self.kmax)]
        py = [[mpmath.mpf(1)] + [zero] * order] + [[] for _ in range(self.lmax)]
        for n in range(order):
            for pw, S, top in ((px, X, self.kmax), (py, Y, self.lmax)):
                for k in range(1, top + 1):
                    prev = pw[k - 1]
                    if k == 1:
                        pw[1].append(S[n])
                    else:
                        pw[k].append(mpmath.fsum(S[i] * prev[n - i] for i in range(n + 1)))
            fx = zero
            fy = zero
            for terms, acc in ((self.tx, 0), (self.ty, 1)):
                total = zero
                for k, l, c in terms:
                    if l == 0:
                        v = px[k][n]
                    elif k == 0:
                        v = py[l][n]
                    else:
                        v = mpmath.fsum(px[k][i] * py[l][n - i] for i in range(n + 1))
                    total += c * v
                if acc == 0:
                    fx = total
                else:
                    fy = total
            X.append(fx / (n + 1))
            Y.append(fy / (n + 1))
        return X, Y


def _poly_eval(c: list, h) -> Any:
    acc = mpmath.mpf(0)
    for v in reversed(c):
        acc = acc * h + v
    return acc


def _poly_deriv_eval(c: list, h) -> Any:
    acc = mpmath.mpf(0)
    for n in range(len(c) - 1, 0, -1):
        acc = acc * h + n * c[n]
    return acc


def _step_size(X: list, Y: list, order: int, digits: int) -> Any:
    radius = mpmath.inf
    for S in (X, Y):
        for n in (order - 1, order):
            a = abs(S[n])
            if a:
                radius = min(radius, a ** (-mpmath.mpf(1) / n))
    if radius == mpmath.inf:
        return mpmath.mpf(1)
    return min(mpmath.mpf(1), radius * mpmath.power(10, -mpmath.mpf(digits + 5) / order))


def taylor_half_flight(
    field: TaylorField,
    x0,
    zone_sign: int,
    order: int = 40,
    max_steps: int = 10_000,
) -> Any:
    """Integrate from (x0, 0) into the half-plane sign(y) = zone_sign until y = 0.

    Returns x at the return to the axis.
    """
    digits = mpmath.mp.dps
    x, y = mpmath.mpf(x0), mpmath.mpf(0)
    started = False
    for _ in range(max_steps):
        X, Y = field.coefficients(x, y, order)
        h = _step_size(X, Y, order, digits)
        y_new = _poly_eval(Y, h)
        if not started:
            if y_new * zone_sign <= 0:
                raise ValueError("field does not enter the requested half-plane")
            started = True
        elif y_new * zone_sign <= 0:
            # root of the step polynomial in (0, h]: Newton from the secant guess
            s = h * y / (y - y_new)
            for _ in range(200):
                f = _poly_eval(Y, s)
                d = _poly_deriv_eval(Y, s)
                ds = f / d
                s -= ds
                if abs(ds) <= abs(s) * mpmath.mpf(10) ** (-digits + 3) + mpmath.mpf(10) ** (-2 * digits):
                    break
            return _poly_eval(X, s)
        x = _poly_eval(X, h)
        y = y_new
    raise RuntimeError("no return to y = 0 within the step budget")


def taylor_displacement(
    upper: tuple[Mapping, Mapping],
    lower: tuple[Mapping, Mapping],
    rho,
    dps: int = 50,
    order: int = 40,
) -> Any:
    """(Pi^-)^{-1}(rho) - Pi^+(rho) at working precision ``dps`` digits."""
    with mpmath.workdps(dps):
        up = TaylorField(upper[0], upper[1], sign=1)
        lo = TaylorField(lower[0], lower[1], sign=-1)
        r = mpmath.mpf(rho) if not isinstance(rho, Fraction) else mpmath.mpf(rho.numerator) / rho.denominator
        pi_plus = -taylor_half_flight(up, r, +1, order)
        back = -taylor_half_flight(lo, r, -1, order)
        return back - pi_plus
