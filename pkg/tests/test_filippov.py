import math
import random

import pytest

from cycleforge.cli import resolve_system_path
from cycleforge.filippov import (
    CROSSING,
    ESCAPING,
    SLIDING,
    TANGENCY,
    EventAmbiguity,
    IntegrationOptions,
    NoSignChange,
    NotMonodromic,
    NumericSystem,
    PolyField,
    classify_point,
    find_crossing_cycle,
    half_flight,
    integrate,
    numeric_displacement,
    pseudo_hopf_scan,
    return_map,
    sigma_partition,
    sliding_field,
    sliding_segments,
)
from cycleforge.filippov.sigma import NotSlidingRegion, sliding_lambda
from cycleforge.lyapunov.planar import LOWER, UPPER
from cycleforge.sysfile import numeric_family_member, parse_file, to_numeric

SEED = 31337
CASES = 20


def spec(name):
    return parse_file(resolve_system_path(name))


def numeric(name, **kw):
    return to_numeric(spec(name), **kw)


def const_fields(xu, yu, xl, yl):
    return NumericSystem(PolyField.from_polys({(0, 0): xu}, {(0, 0): yu}), PolyField.from_polys({(0, 0): xl}, {(0, 0): yl}))


class TestClassify:
    def test_palomba_segment(self):
        s = numeric("palomba_eps05")
        segs = sliding_segments(s, -1, 1)
        assert len(segs) == 1
        a, b, kind = segs[0]
        assert kind == ESCAPING
        assert sorted((s.original_sigma_x(a), s.original_sigma_x(b))) == pytest.approx([0.6, 0.7], abs=1e-12)
        assert classify_point(s, s.sigma_x_from_original(0.8)).kind == CROSSING

    def test_attracting_segment_for_negative_eps(self):
        s = numeric("palomba_epsm05")
        (a, b, kind), = sliding_segments(s, -1, 1)
        assert kind == SLIDING
        assert sorted((s.original_sigma_x(a), s.original_sigma_x(b))) == pytest.approx([0.5, 0.6], abs=1e-12)

    def test_no_segment_at_zero(self):
        assert sliding_segments(numeric("palomba"), -1, 1) == []

    def test_identical_fields_cross(self):
        s = numeric("komquar_cub")
        assert classify_point(s, 0.1).kind == CROSSING

    def test_raw_kolmogorov_is_tangent_everywhere(self):
        s = numeric("komquar_4", normalize=False)
        assert sigma_partition(s, -3, 3) == [(-3, 3, TANGENCY)]
        assert classify_point(s, 0.4).kind == TANGENCY

    def test_trichotomy(self):
        r = random.Random(SEED)
        for _ in range(CASES):
            yu, yl = r.uniform(-2, 2), r.uniform(-2, 2)
            c = classify_point(const_fields(1.0, yu, -1.0, yl), 0.0)
            kinds = [yu * yl > 0, yu < 0 < yl, yl < 0 < yu]
            assert sum(kinds) == 1
            assert c.kind == (CROSSING, SLIDING, ESCAPING)[kinds.index(True)]


class TestSlidingField:
    def test_symmetric(self):
        s = const_fields(2.5, -1.0, 2.5, 1.0)
        assert sliding_lambda(s, 0.0) == 0.5
        assert sliding_field(s, 0.0) == 2.5

    def test_direct_formula(self):
        s = const_fields(3.0, -2.0, 0.0, 1.0)
        assert sliding_lambda(s, 0.0) == pytest.approx(1 / 3)
        assert sliding_field(s, 0.0) == pytest.approx(1.0)

    def test_not_sliding(self):
        with pytest.raises(NotSlidingRegion):
            sliding_field(const_fields(1.0, 1.0, 1.0, 1.0), 0.0)

    def test_endpoints_continuous(self):
        s = numeric("palomba_damped")
        (a, b, _), = sliding_segments(s, -1, 1)
        for end, inner in ((a, a + 1e-9), (b, b - 1e-9)):
            lam = sliding_lambda(s, inner)
            assert min(abs(lam), abs(lam - 1)) < 1e-6
            field = s.upper if abs(lam - 1) < 1e-6 else s.lower
            assert sliding_field(s, inner) == pytest.approx(field.fx(end, 0.0), abs=1e-6)

    def test_palomba_pseudo_equilibria(self):
        s = numeric("palomba_epsm05")
        (a, b, _), = sliding_segments(s, -1, 1)
        for x in (a + 0.2 * (b - a), 0.5 * (a + b)):
            assert abs(sliding_field(s, x)) < 1e-12


class TestIntegrate:
    def test_linear_center_period(self):
        s = numeric("linear_center")
        t = integrate(s, (0.3, 0.0), 2 * math.pi, IntegrationOptions())
        assert (t.x[-1], t.y[-1]) == pytest.approx((0.3, 0.0), abs=1e-9)
        assert t.events[0].kind == CROSSING
        assert t.events[0].x == pytest.approx(-0.3, abs=1e-10)
        assert t.events[0].t == pytest.approx(math.pi, abs=1e-9)
        assert t.truncated is None

    def test_zone_tags_consistent(self):
        t = integrate(numeric("palomba_damped"), (0.2, 1e-3), 15.0)
        for y, z in zip(t.y, t.zone):
            if z == UPPER:
                assert y >= -1e-12
            elif z == LOWER:
                assert y <= 1e-12

    def test_palomba_center_closes(self):
        s = numeric("palomba")
        tu, xu = half_flight(s.upper, 0.1, UPPER)
        tl, xl = half_flight(s.lower, xu, LOWER)
        assert xl == pytest.approx(0.1, abs=1e-11)

    def test_escaping_segment_repels(self):
        # printed family at eps = 0.5: every crossing orbit enlarges
        s = numeric("palomba_eps05")
        rho = [0.35]
        for _ in range(4):
            rho.append(return_map(s, rho[-1]))
        assert all(b > a for a, b in zip(rho, rho[1:]))

    def test_damped_spirals_onto_cycle(self):
        s = numeric("palomba_damped")
        c = find_crossing_cycle(s, (0.01, 0.5))
        rho = [0.2]
        for _ in range(6):
            rho.append(return_map(s, rho[-1]))
        assert all(a < b < c.rho for a, b in zip(rho, rho[1:]))

    def test_sliding_to_pseudo_equilibrium(self):
        s = numeric("palomba_epsm05")
        (a, b, _), = sliding_segments(s, -1, 1)
        x = 0.5 * (a + b)
        # start on the segment itself
        t = integrate(s, (x, 0.0), 5.0)
        assert t.truncated == "pseudo-equilibrium"
        assert t.zone[-1] == "sliding"

    def test_tangency_truncates(self):
        s = numeric("komquar_4", normalize=False)
        t = integrate(s, (0.5, 0.0), 1.0)
        assert t.truncated == "tangency"
        with pytest.raises(EventAmbiguity):
            integrate(s, (0.5, 0.0), 1.0, IntegrationOptions(strict=True))

    def test_csv(self):
        t = integrate(numeric("linear_center"), (0.3, 0.0), 1.0)
        lines = t.to_csv().splitlines()
        assert lines[0] == "t,x,y,zone"
        assert len(lines) == len(t) + 1

    def test_bad_options(self):
        with pytest.raises(ValueError):
            IntegrationOptions(rtol=0)


class TestDisplacement:
    def test_linear_center(self):
        s = numeric("linear_center")
        assert abs(numeric_displacement(s, 0.25)) < 1e-12

    def test_palomba_center(self):
        s = numeric("palomba")
        for k in range(20):
            rho = 0.01 + 0.19 * k / 19
            assert abs(numeric_displacement(s, rho)) <= 1e-9

    def test_not_monodromic_inside_escaping_segment(self):
        with pytest.raises(NotMonodromic):
            numeric_displacement(numeric("palomba_eps05"), 0.05)

    def test_no_sign_change_for_center(self):
        with pytest.raises(NoSignChange):
            find_crossing_cycle(numeric("palomba"), (0.01, 0.2))

    def test_bad_bracket(self):
        with pytest.raises(ValueError):
            find_crossing_cycle(numeric("palomba"), (0.2, 0.1))

    def test_time_reversal(self):
        r = random.Random(SEED + 1)
        systems = [numeric("palomba_damped"), numeric("komquar_cub"), numeric("weak_focus")]
        for i in range(CASES):
            s = systems[i % 3]
            rho = r.uniform(0.12, 0.18)
            _, x1 = half_flight(s.upper, rho, UPPER)
            _, back = half_flight(s.upper, x1, UPPER, backward=True)
            assert abs(back - rho) <= 1e-9 * rho


class TestCycles:
    def test_fixed_point_reintegration(self):
        r = random.Random(SEED + 2)
        sp = spec("palomba_damped")
        for _ in range(CASES):
            eps = r.uniform(0.05, 0.5)
            s = numeric_family_member(sp, eps)
            c = find_crossing_cycle(s, (0.002, 0.5), samples=16)
            assert abs(c.delta) <= 1e-10
            assert abs(return_map(s, c.rho) - c.rho) <= 1e-8 * c.rho
            end = c.trajectory
            assert (end.x[-1], end.y[-1]) == pytest.approx((c.rho, 0.0), abs=1e-8 * c.rho + 1e-12)

    def test_first_integral_conserved(self):
        # lower Palomba field, original coordinates: H = 5x - 3 ln x + 2y - ln y
        r = random.Random(SEED + 3)
        s = numeric("palomba")

        def H(x, y):
            return 5 * x - 3 * math.log(x) + 2 * y - math.log(y)

        checked = 0
        for _ in range(CASES):
            x0 = r.uniform(0.35, 0.85)
            y0 = r.uniform(0.2, 0.45)
            u, w = s.from_original(x0, y0)
            t = integrate(s, (u, w), 4.0)
            h0 = H(x0, y0)
            arc = [s.to_original(x, y) for x, y, z in zip(t.x, t.y, t.zone) if z == (UPPER if s.original_upper_is_lower else LOWER)]
            # only the first arc, before the orbit leaves the lower half
            first = []
            for p in arc:
                if p[1] > 0.5 + 1e-12:
                    break
                first.append(p)
            assert first
            for x, y in first:
                assert abs(H(x, y) - h0) <= 1e-8 * abs(h0)
            checked += len(first)
        assert checked > CASES


class TestScan:
    def test_palomba_damped_rows(self):
        rows = pseudo_hopf_scan(_damped, (-0.2, 0.5), 8, workers=1)
        by_eps = {r.eps: r for r in rows}
        zero = by_eps[0.0]
        assert zero.sliding is None and zero.rho is None
        top = by_eps[0.5]
        assert top.sliding == pytest.approx((0.6, 0.7), abs=1e-12)
        assert top.stability == "stable"
        positive = [r.rho for r in rows if r.eps > 0]
        assert all(a < b for a, b in zip(positive, positive[1:]))
        assert all(r.rho is None for r in rows if r.eps < 0)

    def test_worker_count_does_not_change_output(self):
        a = pseudo_hopf_scan(_damped, (0.1, 0.3), 3, workers=1)
        b = pseudo_hopf_scan(_damped, (0.1, 0.3), 3, workers=2)
        assert a == b


_DAMPED = None


def _damped(eps):
    global _DAMPED
    if _DAMPED is None:
        _DAMPED = spec("palomba_damped")
    return numeric_family_member(_DAMPED, eps)
