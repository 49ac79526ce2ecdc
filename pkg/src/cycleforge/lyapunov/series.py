"""Polar expansion, radial recursion and the difference map.

Internally every function of theta is carried as a ParamJet whose constant
and gradient entries are QuasiTrigPolys ("jet of series").  Mathematically
that is the same object as a QuasiTrigPoly with ParamJet coefficients, but
the product then costs one series product per parameter instead of one jet
product per pair of terms.  The public functions accept and return the
QuasiTrigPoly-with-ParamJet-coefficients form; conversion is exact.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Mapping, Sequence

from ..exactalg import ParamDescriptor, ParamJet, ParamSet, PiOverflow, PiScalar
from ..trigseries import QuasiTrigPoly, qtp_antiderivative, qtp_eval_pi_powers
from .planar import LOWER, UPPER, SIDE_OF, HalfSystem, PiecewiseSystem, PlanarPoly

__all__ = [
    "FORWARD",
    "BACKWARD",
    "DisplacementSeries",
    "polar_expansion",
    "solve_radial_coefficients",
    "displacement_series",
    "attach_perturbation",
    "worker_count",
]

FORWARD = "forward_0_to_pi"
BACKWARD = "backward_0_to_minus_pi"
DEFAULT_ORDER = 15

_ZERO = QuasiTrigPoly.zero()
_ONE_Q = QuasiTrigPoly.constant(Fraction(1))
_ONE = ParamJet(_ONE_Q)


def worker_count() -> int:
    raw = os.environ.get("CYCLEFORGE_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, min(n, os.cpu_count() or 1))


# --------------------------------------------------------------------------
# conversions between the two views of a parametric series


def _as_jet(c: Any) -> ParamJet:
    if isinstance(c, ParamJet):
        return c
    return ParamJet(Fraction(c))


def _series_to_jet(f: QuasiTrigPoly) -> ParamJet:
    const: dict = {}
    grads: dict[int, dict] = {}
    for key, c in f.terms.items():
        j = _as_jet(c)
        if j.constant:
            const[key] = j.constant
        for p, v in j.gradient.items():
            grads.setdefault(p, {})[key] = v
    return ParamJet(
        QuasiTrigPoly(const, _trusted=True),
        {p: QuasiTrigPoly(t, _trusted=True) for p, t in grads.items()},
    )


def _jet_to_series(j: ParamJet, parametric: bool) -> QuasiTrigPoly:
    if not parametric:
        return j.constant
    terms: dict = {}
    for key, c in j.constant.terms.items():
        terms[key] = ParamJet(c)
    for p, g in j.gradient.items():
        for key, c in g.terms.items():
            cur = terms.get(key)
            if cur is None:
                terms[key] = ParamJet(Fraction(0), {p: c})
            else:
                grad = dict(cur.gradient)
                grad[p] = c
                terms[key] = ParamJet(cur.constant, grad)
    return QuasiTrigPoly(terms)


# --------------------------------------------------------------------------
# polar expansion


@lru_cache(maxsize=None)
def _cs_pow(a: int, b: int) -> QuasiTrigPoly:
    """cos(t)^a sin(t)^b as a trig polynomial."""
    if a == 0 and b == 0:
        return _ONE_Q
    if a > 0:
        return _cs_pow(a - 1, b) * QuasiTrigPoly.cos(1)
    return _cs_pow(a, b - 1) * QuasiTrigPoly.sin(1)


def _homogeneous_jet(poly: PlanarPoly, d: int) -> ParamJet:
    const = _ZERO
    grads: dict[int, QuasiTrigPoly] = {}
    for (k, l), c in poly.terms.items():
        if k + l != d:
            continue
        base = _cs_pow(k, l)
        j = _as_jet(c)
        if j.constant:
            const = const + base.scale(j.constant)
        for p, v in j.gradient.items():
            grads[p] = grads[p] + base.scale(v) if p in grads else base.scale(v)
    return ParamJet(const, grads)


_C = ParamJet(QuasiTrigPoly.cos(1))
_S = ParamJet(QuasiTrigPoly.sin(1))


def _polar_jets(P: PlanarPoly, Q: PlanarPoly, N: int) -> dict[int, ParamJet]:
    degs = [d for d in range(2, max(P.degree, Q.degree, 1) + 1)]
    A: dict[int, ParamJet] = {}
    B: dict[int, ParamJet] = {}
    for d in degs:
        Pd, Qd = _homogeneous_jet(P, d), _homogeneous_jet(Q, d)
        A[d] = _C * Pd + _S * Qd
        B[d] = _C * Qd - _S * Pd
    # 1 / (1 + sum_m r^m B_{m+1}) = sum_m E_m r^m
    E: dict[int, ParamJet] = {0: _ONE}
    for m in range(1, N):
        acc = ParamJet(_ZERO)
        for i in range(1, m + 1):
            if i + 1 in B and B[i + 1]:
                acc = acc + B[i + 1] * E[m - i]
        E[m] = -acc
    R: dict[int, ParamJet] = {}
    for i in range(2, N + 1):
        acc = ParamJet(_ZERO)
        for d, Ad in A.items():
            if i - d >= 0 and Ad:
                acc = acc + Ad * E[i - d]
        R[i] = acc
    return R


def _as_planar(h: HalfSystem | tuple[PlanarPoly, PlanarPoly]) -> tuple[PlanarPoly, PlanarPoly]:
    if isinstance(h, HalfSystem):
        return h.P, h.Q
    return h[0].truncate_below(2), h[1].truncate_below(2)


def _is_parametric(*polys: PlanarPoly) -> bool:
    return any(isinstance(c, ParamJet) for p in polys for c in p.terms.values())


def polar_expansion(h: HalfSystem, N: int) -> list[QuasiTrigPoly]:
    """R_2 .. R_N with dr/dtheta = sum R_i r^i (truncated at r^N)."""
    if N < 2:
        raise ValueError("order N must be at least 2")
    P, Q = _as_planar(h)
    parametric = _is_parametric(P, Q)
    R = _polar_jets(P, Q, N)
    return [_jet_to_series(R[i], parametric) for i in range(2, N + 1)]


# --------------------------------------------------------------------------
# radial recursion


def _radial_jets(R: Mapping[int, ParamJet], N: int) -> dict[int, ParamJet]:
    """r_2..r_N from R_2..R_N; r = rho + sum r_n rho^n, r_n(0) = 0."""
    # u = r / rho = 1 + sum_{k >= 1} u_k rho^k with u_k = r_{k+1};
    # powers[i][m] is the rho^m coefficient of u^i
    u: dict[int, ParamJet] = {0: _ONE}
    powers: dict[int, dict[int, ParamJet]] = {i: {0: _ONE} for i in range(1, N + 1)}
    r: dict[int, ParamJet] = {}
    for n in range(2, N + 1):
        forcing = ParamJet(_ZERO)
        for i in range(2, n + 1):
            Ri = R.get(i)
            m = n - i
            if m not in powers[i]:
                acc = powers[i - 1][m]  # k = 0 term, u_0 = 1
                for k in range(1, m + 1):
                    uk = u[k]
                    prev = powers[i - 1][m - k]
                    if uk and prev:
                        acc = acc + uk * prev
                powers[i][m] = acc
            if Ri is not None and Ri:
                forcing = forcing + Ri * powers[i][m]
        rn = forcing.map(qtp_antiderivative)
        r[n] = rn
        u[n - 1] = rn
        powers[1][n - 1] = rn
    return r


def solve_radial_coefficients(R: Sequence[QuasiTrigPoly], direction: str = FORWARD) -> list[QuasiTrigPoly]:
    """r_2 .. r_N for R = [R_2, ..., R_N].

    The formal solutions are the same for both directions; ``direction``
    only names the endpoint (pi or -pi) at which the caller evaluates them.
    """
    if direction not in (FORWARD, BACKWARD):
        raise ValueError(f"direction must be {FORWARD!r} or {BACKWARD!r}")
    N = len(R) + 1
    parametric = any(isinstance(c, ParamJet) for f in R for c in f.terms.values())
    jets = {i + 2: _series_to_jet(f) for i, f in enumerate(R)}
    r = _radial_jets(jets, N)
    return [_jet_to_series(r[n], parametric) for n in range(2, N + 1)]


# --------------------------------------------------------------------------
# difference map


@dataclass
class _Entry:
    """Pi-polynomial valued jet: {pi power: Fraction} for constant and gradient."""

    constant: dict[int, Fraction] = field(default_factory=dict)
    gradient: dict[int, dict[int, Fraction]] = field(default_factory=dict)


def _pi_poly_to_scalar(poly: Mapping[int, Fraction]) -> PiScalar:
    bad = [k for k, v in poly.items() if k >= 2 and v]
    if bad:
        raise PiOverflow(f"coefficient carries pi^{max(bad)}")
    return PiScalar(poly.get(0, 0), poly.get(1, 0))


def _pi_poly_value(poly: Mapping[int, Fraction], pi_value: Any) -> Any:
    total = pi_value * 0
    for k, v in poly.items():
        total = total + (pi_value**k) * v.numerator / v.denominator
    return total


def _poly_add(a: dict, b: Mapping, sign: int) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + sign * v
    return {k: v for k, v in out.items() if v}


def _structure_key(P: PlanarPoly, Q: PlanarPoly, params: ParamSet) -> tuple:
    def poly_key(poly):
        items = []
        for m in sorted(poly.terms):
            j = _as_jet(poly.terms[m])
            grad = tuple(sorted(((params[p].role, params[p].k, params[p].l), v) for p, v in j.gradient.items()))
            items.append((m, j.constant, grad))
        return tuple(items)

    return poly_key(P), poly_key(Q)


@dataclass(frozen=True)
class DisplacementSeries:
    """Delta(rho) = sum_{i >= 2} d_i rho^i up to the truncation order.

    ``coefficients[i]`` is the rho^(i+2) coefficient; ``L(k)`` is the rho^(k+1)
    coefficient, so ``L(1)`` is the rho^2 term.  Values are ParamJets over
    PiScalar when the system has parameters and PiScalars otherwise.
    Internally each entry is kept as a polynomial in pi so that
    non-center systems (whose constants carry higher powers of pi) can
    still be evaluated numerically.
    """

    order: int
    param_set: ParamSet
    entries: tuple[_Entry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def _convert(self, e: _Entry) -> Any:
        const = _pi_poly_to_scalar(e.constant)
        if not len(self.param_set):
            return const
        grad = {p: _pi_poly_to_scalar(v) for p, v in e.gradient.items()}
        return ParamJet(const, grad)

    @property
    def coefficients(self) -> list[Any]:
        return [self._convert(e) for e in self.entries]

    def rho_coefficient(self, power: int) -> Any:
        if not 2 <= power <= self.order:
            raise IndexError(f"rho^{power} outside 2..{self.order}")
        return self._convert(self.entries[power - 2])

    def L(self, k: int) -> Any:
        return self.rho_coefficient(k + 1)

    def gradient(self, k: int) -> dict[int, PiScalar]:
        """Gradient of L(k) with respect to the parameters (by id)."""
        e = self.entries[k - 1]
        return {p: _pi_poly_to_scalar(v) for p, v in sorted(e.gradient.items())}

    def constant(self, k: int) -> PiScalar:
        return _pi_poly_to_scalar(self.entries[k - 1].constant)

    def pi_polynomial(self, power: int) -> dict[int, Fraction]:
        """Constant part of the rho^power coefficient as {pi power: value}."""
        return dict(self.entries[power - 2].constant)

    def numeric_coefficient(self, power: int, params: Mapping[int, Any] | None = None, pi_value: Any = math.pi) -> Any:
        e = self.entries[power - 2]
        total = _pi_poly_value(e.constant, pi_value)
        for p, v in (params or {}).items():
            if p in e.gradient:
                total = total + _pi_poly_value(e.gradient[p], pi_value) * v
        return total

    def evaluate(self, rho: Any, params: Mapping[int, Any] | None = None, pi_value: Any = math.pi) -> Any:
        """Truncated Delta(rho), first order in the parameters."""
        total = rho * 0
        for power in range(self.order, 1, -1):
            total = (total + self.numeric_coefficient(power, params, pi_value)) * rho
        return total * rho


def displacement_series(s: PiecewiseSystem, N: int = DEFAULT_ORDER) -> DisplacementSeries:
    """Coefficients of rho^2..rho^N in r^-(-pi) - r^+(pi)."""
    if N < 2:
        raise ValueError("order N must be at least 2")
    halves = {UPPER: s.upper, LOWER: s.lower}
    keys = {side: _structure_key(h.P, h.Q, s.param_set) for side, h in halves.items()}
    endpoints = {UPPER: "pi", LOWER: "-pi"}
    values: dict[str, list] = {}
    same_shape = keys[UPPER] == keys[LOWER]
    # r^-(-pi) differs from r^+(pi) only through the endpoint when the
    # halves coincide, so one recursion serves both.
    jobs = [UPPER] if same_shape else [UPPER, LOWER]
    if len(jobs) > 1 and worker_count() > 1:
        with ProcessPoolExecutor(max_workers=2) as pool:
            futs = {
                side: pool.submit(_half_series_jets, halves[side].P, halves[side].Q, N)
                for side in jobs
            }
            rjets = {side: f.result() for side, f in futs.items()}
    else:
        rjets = {side: _half_series_jets(halves[side].P, halves[side].Q, N) for side in jobs}
    if same_shape:
        rjets[LOWER] = _relabel_series(rjets[UPPER], s.param_set, "-")
    for side in (UPPER, LOWER):
        values[side] = [
            (
                qtp_eval_pi_powers(jet.constant, endpoints[side]),
                {
                    p: v
                    for p, v in ((p, qtp_eval_pi_powers(g, endpoints[side])) for p, g in jet.gradient.items())
                    if v
                },
            )
            for jet in rjets[side]
        ]
    entries = []
    for (uc, ug), (lc, lg) in zip(values[UPPER], values[LOWER]):
        const = _poly_add(lc, uc, -1)
        grad: dict[int, dict] = {}
        for p, v in lg.items():
            grad[p] = dict(v)
        for p, v in ug.items():
            grad[p] = _poly_add(grad.get(p, {}), v, -1)
        entries.append(_Entry(const, {p: v for p, v in sorted(grad.items()) if v}))
    return DisplacementSeries(N, s.param_set, tuple(entries))


def _half_series_jets(P: PlanarPoly, Q: PlanarPoly, N: int) -> list[ParamJet]:
    r = _radial_jets(_polar_jets(P, Q, N), N)
    return [r[n] for n in range(2, N + 1)]


def _relabel_series(jets: list[ParamJet], params: ParamSet, side: str) -> list[ParamJet]:
    mapping = {}
    for pid, d in enumerate(params):
        other = ParamDescriptor(side, d.role, d.k, d.l)
        if d.side != side:
            try:
                mapping[pid] = params.index(other)
            except KeyError:
                raise ValueError(f"parameter {d.name} has no counterpart on side {side}") from None
    return [j.relabel(mapping) for j in jets]


# --------------------------------------------------------------------------
# perturbation


def attach_perturbation(
    base: PiecewiseSystem,
    degree: int,
    factors: Mapping[str, tuple[PlanarPoly, PlanarPoly]] | None = None,
    min_degree: int = 2,
) -> PiecewiseSystem:
    """Add ``a_kl x^k y^l`` to dx and ``b_kl x^k y^l`` to dy on both sides.

    ``factors`` optionally maps a side (``"upper"``/``"lower"``) to a pair of
    polynomials multiplying the dx and dy monomials.  For a system that is
    a translate of a Kolmogorov system ``x' = x X, y' = y Y`` the factors are
    the translated coordinate functions, so the perturbed system remains of
    Kolmogorov type.  Without factors the plain monomials are used.
    """
    if base.has_parameters:
        raise ValueError("base system already carries parameters")
    if degree < min_degree:
        raise ValueError(f"perturbation degree must be at least {min_degree}")
    descs = []
    for side in ("-", "+"):
        for role in ("a", "b"):
            for d in range(min_degree, degree + 1):
                for k in range(d + 1):
                    descs.append(ParamDescriptor(side, role, k, d - k))
    params = ParamSet(descs)
    factors = dict(factors or {})
    one = PlanarPoly.const(Fraction(1))
    halves = []
    for half in (base.upper, base.lower):
        fx, fy = factors.get(half.side, (one, one))
        side = SIDE_OF[half.side]
        polys = {"a": _jetify(half.dx), "b": _jetify(half.dy)}
        for role, factor in (("a", fx), ("b", fy)):
            terms = dict(polys[role])
            for pid in params.side_ids(side):
                d = params[pid]
                if d.role != role:
                    continue
                for (k, l), c in factor.terms.items():
                    m = (k + d.k, l + d.l)
                    cur = terms.get(m, ParamJet(Fraction(0)))
                    grad = dict(cur.gradient)
                    grad[pid] = grad.get(pid, 0) + Fraction(c)
                    terms[m] = ParamJet(cur.constant, grad)
            polys[role] = terms
        halves.append(HalfSystem(PlanarPoly(polys["a"]), PlanarPoly(polys["b"]), half.side))
    return PiecewiseSystem(halves[0], halves[1], params, base.name)


def _jetify(poly: PlanarPoly) -> dict:
    return {m: _as_jet(c) for m, c in poly.terms.items()}
