"""Float polynomial vector fields on both sides of the switching line y = 0."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from ..lyapunov.normal_form import NormalFormRecord
from ..lyapunov.planar import UPPER, PlanarPoly

__all__ = ["PolyField", "NumericSystem"]


def _horner_table(poly: Mapping[tuple[int, int], Any]) -> tuple[tuple[float, ...], ...]:
    # rows indexed by the y power, each a coefficient list in x (low to high)
    if not poly:
        return ((0.0,),)
    ly = max(l for _, l in poly)
    kx = max(k for k, _ in poly)
    table = [[0.0] * (kx + 1) for _ in range(ly + 1)]
    for (k, l), c in poly.items():
        table[l][k] += float(c)
    return tuple(tuple(r) for r in table)


def _horner(table: tuple[tuple[float, ...], ...], x: float, y: float) -> float:
    acc = 0.0
    for row in reversed(table):
        inner = 0.0
        for c in reversed(row):
            inner = inner * x + c
        acc = acc * y + inner
    return acc


@dataclass(frozen=True)
class PolyField:
    """Planar polynomial field with float coefficients, evaluated by Horner."""

    dx: tuple[tuple[float, ...], ...]
    dy: tuple[tuple[float, ...], ...]
    terms_x: tuple[tuple[int, int, float], ...] = ()
    terms_y: tuple[tuple[int, int, float], ...] = ()

    @classmethod
    def from_polys(cls, dx: PlanarPoly | Mapping, dy: PlanarPoly | Mapping) -> "PolyField":
        tx = dx.terms if isinstance(dx, PlanarPoly) else dict(dx)
        ty = dy.terms if isinstance(dy, PlanarPoly) else dict(dy)
        return cls(
            _horner_table(tx),
            _horner_table(ty),
            tuple(sorted((k, l, float(c)) for (k, l), c in tx.items())),
            tuple(sorted((k, l, float(c)) for (k, l), c in ty.items())),
        )

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        return _horner(self.dx, x, y), _horner(self.dy, x, y)

    def fx(self, x: float, y: float) -> float:
        return _horner(self.dx, x, y)

    def fy(self, x: float, y: float) -> float:
        return _horner(self.dy, x, y)

    @property
    def degree(self) -> int:
        return max([k + l for k, l, _ in self.terms_x + self.terms_y] or [0])

    def sigma_polynomial(self) -> list[float]:
        """Coefficients (low to high) of y' restricted to y = 0."""
        return list(self.dy[0])


@dataclass(frozen=True)
class NumericSystem:
    """Two float fields, switching line y = 0.

    ``record`` (optional) maps these coordinates back to the ones the system
    was written in.
    """

    upper: PolyField
    lower: PolyField
    record: NormalFormRecord | None = None
    name: str = ""
    eps: float = 0.0

    @classmethod
    def smooth(cls, dx: PlanarPoly, dy: PlanarPoly, **kw) -> "NumericSystem":
        f = PolyField.from_polys(dx, dy)
        return cls(f, f, **kw)

    def field(self, zone: str) -> PolyField:
        return self.upper if zone == UPPER else self.lower

    def to_original(self, x: float, y: float) -> tuple[float, float]:
        if self.record is None:
            return x, y
        u, w = self.record.to_original(x, y)
        return float(u), float(w)

    def from_original(self, x: float, y: float) -> tuple[float, float]:
        if self.record is None:
            return x, y
        u, w = self.record.from_original(x, y)
        return float(u), float(w)

    def original_sigma_x(self, x: float) -> float:
        return self.to_original(x, 0.0)[0]

    def sigma_x_from_original(self, x_orig: float) -> float:
        """Normal-form abscissa of the Sigma point with original abscissa x_orig."""
        if self.record is None:
            return x_orig
        y0 = float(self.record.equilibrium[1])
        return self.from_original(x_orig, y0)[0]

    @property
    def original_upper_is_lower(self) -> bool:
        return self.record is not None and self.record.swapped
