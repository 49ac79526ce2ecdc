"""First-order rank analysis of Lyapunov constants.

The Jacobian of L(1)..L(K) with respect to the perturbation parameters at
zero is assembled from the gradient parts of the displacement series; its
exact rank over Q(pi) gives a lower bound on the number of small crossing
limit cycles.  An extra cycle is credited for the pseudo-Hopf mechanism
(sliding segment created by a constant term outside the parameter set)
unless disabled.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exactalg import (
    ParamDescriptor,
    ParamSet,
    PiOverflow,
    PiScalar,
    as_pi_poly,
    exact_rank,
    poly_div_exact,
    poly_mul,
)
from .lyapunov.planar import PiecewiseSystem
from .lyapunov.series import DisplacementSeries, displacement_series

__all__ = [
    "CyclicityReport",
    "analyze",
    "report_render",
    "jacobian_csv",
    "format_linear_form",
    "reduce_constants",
    "pivots_from_names",
    "DEFAULT_K",
]

DEFAULT_K = 14


@dataclass(frozen=True)
class CyclicityReport:
    order: int
    param_set: ParamSet
    jacobian: tuple[tuple[PiScalar, ...], ...]
    rank: int
    independent_params: tuple[ParamDescriptor, ...]
    cycle_bound: int
    pseudo_hopf: bool
    constants: tuple[PiScalar, ...] = ()
    ranks_by_order: tuple[int, ...] = ()
    name: str = ""

    def row(self, k: int) -> dict[int, PiScalar]:
        return {p: v for p, v in enumerate(self.jacobian[k - 1]) if v}


def _dense_rows(series: DisplacementSeries, K: int) -> list[list[PiScalar]]:
    n = len(series.param_set)
    rows = []
    for k in range(1, K + 1):
        grad = series.gradient(k)
        rows.append([grad.get(p, PiScalar()) for p in range(n)])
    return rows


def analyze(
    s: PiecewiseSystem,
    K: int = DEFAULT_K,
    pseudo_hopf: bool = True,
    series: DisplacementSeries | None = None,
) -> CyclicityReport:
    """Rank of the Jacobian of L(1)..L(K) at zero parameters."""
    if K < 1:
        raise ValueError("order K must be at least 1")
    if series is None or series.order < K + 1:
        series = displacement_series(s, K + 1)
    rows = _dense_rows(series, K)
    if len(s.param_set):
        rank, pivots = exact_rank(rows)
        by_order = tuple(exact_rank(rows[:k])[0] for k in range(1, K + 1))
    else:
        rank, pivots, by_order = 0, [], tuple(0 for _ in range(K))
    bound = rank + 1 if pseudo_hopf else rank
    return CyclicityReport(
        order=K,
        param_set=s.param_set,
        jacobian=tuple(tuple(r) for r in rows),
        rank=rank,
        independent_params=tuple(s.param_set[c] for c in pivots),
        cycle_bound=bound,
        pseudo_hopf=pseudo_hopf,
        constants=tuple(series.constant(k) for k in range(1, K + 1)),
        ranks_by_order=by_order,
        name=s.name,
    )


# --------------------------------------------------------------------------
# text forms


def _coef_text(c: PiScalar) -> str:
    txt = str(c)
    return f"({txt})" if " " in txt else txt


def format_linear_form(grad: Mapping[int, PiScalar], params: ParamSet) -> str:
    """Canonical text of ``sum c_p * p`` in parameter-set order."""
    parts: list[str] = []
    for pid in sorted(p for p, v in grad.items() if v):
        c = PiScalar.coerce(grad[pid])
        name = params[pid].name
        mixed = c.rat != 0 and c.pi != 0
        if not parts:
            parts.append(f"{_coef_text(c)}*{name}")
        elif not mixed and (c.rat < 0 or (c.rat == 0 and c.pi < 0)):
            parts.append(f"- {_coef_text(-c)}*{name}")
        else:
            parts.append(f"+ {_coef_text(c)}*{name}")
    return " ".join(parts) if parts else "0"


def report_render(r: CyclicityReport) -> str:
    lines = []
    if r.name:
        lines.append(f"system {r.name}")
    lines.append(f"order K = {r.order}, {len(r.param_set)} parameters")
    if not len(r.param_set):
        lines.append("rank 0, no parameters")
        lines.append(f"bound {r.cycle_bound}" + (" (pseudo-Hopf +1)" if r.pseudo_hopf else ""))
        return "\n".join(lines) + "\n"
    for k in range(1, r.order + 1):
        lines.append(f"L({k}) linear: {format_linear_form(r.row(k), r.param_set)}")
    lines.append("rank by order: " + " ".join(str(x) for x in r.ranks_by_order))
    lines.append(f"independent parameters: {', '.join(d.name for d in r.independent_params)}")
    extra = " (rank + 1 for the pseudo-Hopf cycle)" if r.pseudo_hopf else ""
    lines.append(f"rank {r.rank}, bound {r.cycle_bound}{extra}")
    return "\n".join(lines) + "\n"


def jacobian_csv(r: CyclicityReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["constant"] + r.param_set.names())
    for k, row in enumerate(r.jacobian, start=1):
        w.writerow([f"L({k})"] + [str(v) for v in row])
    return buf.getvalue()


# --------------------------------------------------------------------------
# reduction of later constants modulo earlier ones


def _times_ratio(a: PiScalar, b: PiScalar, c: PiScalar) -> PiScalar:
    """a * b / c in Q + Q*pi, exact, or PiOverflow."""
    num = poly_mul(as_pi_poly(a), as_pi_poly(b))
    try:
        q = poly_div_exact(num, as_pi_poly(c))
    except ArithmeticError:
        raise PiOverflow(f"({a})*({b})/({c}) is not in Q + Q*pi") from None
    if len(q) > 2:
        raise PiOverflow(f"({a})*({b})/({c}) has a pi^2 term")
    q = tuple(q) + (Fraction(0),) * (2 - len(q))
    return PiScalar(q[0], q[1])


def reduce_constants(
    rows: Sequence[Mapping[int, PiScalar]],
    pivots: Sequence[int],
) -> list[dict[int, PiScalar]]:
    """Reduce each gradient row modulo the previous reduced rows.

    Row k (k >= 1, zero-based) has the pivot columns ``pivots[:k]``
    eliminated using rows 0..k-1, i.e. the earlier linear conditions are
    solved for those parameters and substituted.  Row j's pivot must be
    nonzero in reduced row j.  The leading coefficient of each row stays 1.
    """
    reduced: list[dict[int, PiScalar]] = []
    for k, row in enumerate(rows):
        cur = {p: PiScalar.coerce(v) for p, v in row.items() if v}
        for j in range(min(k, len(pivots))):
            basis, p = reduced[j], pivots[j]
            if not basis.get(p):
                raise ValueError(f"pivot column {p} vanishes in reduced row {j + 1}")
            rp = cur.get(p)
            if not rp:
                continue
            for q, bq in basis.items():
                delta = _times_ratio(rp, bq, basis[p])
                v = cur.get(q, PiScalar()) - delta
                if v:
                    cur[q] = v
                else:
                    cur.pop(q, None)
        reduced.append(dict(sorted(cur.items())))
    return reduced


def pivots_from_names(names: Iterable[str], params: ParamSet) -> list[int]:
    return [params.index(ParamDescriptor.parse(n)) for n in names]
