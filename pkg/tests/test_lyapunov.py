import math
import random
from fractions import Fraction as F

import pytest

from cycleforge.exactalg import PiScalar
from cycleforge.lyapunov.normal_form import to_normal_form
from cycleforge.lyapunov.planar import (
    LOWER,
    UPPER,
    HalfSystem,
    NormalFormError,
    NotACenter,
    PiecewiseSystem,
    PlanarPoly as P,
)
from cycleforge.lyapunov.series import (
    BACKWARD,
    FORWARD,
    attach_perturbation,
    displacement_series,
    polar_expansion,
    solve_radial_coefficients,
)
from cycleforge.sysfile import parse_file, to_piecewise
from cycleforge.cli import resolve_system_path
from cycleforge.trigseries import QuasiTrigPoly as Q, qtp_mul

X, Y = P.x(), P.y()
SEED = 777
CASES = 20


def fixture(name):
    return parse_file(resolve_system_path(name))


def smooth(dx, dy):
    return PiecewiseSystem(HalfSystem(dx, dy, UPPER), HalfSystem(dx, dy, LOWER))


def hamiltonian(H):
    # x' = -H_y, y' = H_x
    dx, dy = {}, {}
    for (k, l), c in H.terms.items():
        if l:
            dx[(k, l - 1)] = dx.get((k, l - 1), 0) - l * c
        if k:
            dy[(k - 1, l)] = dy.get((k - 1, l), 0) + k * c
    return P(dx), P(dy)


def rand_poly(r, degrees, scale=3):
    return P({(k, d - k): F(r.randint(-scale, scale), r.randint(1, 3)) for d in degrees for k in range(d + 1) if r.random() < 0.6})


class TestNormalForm:
    def test_identity_for_normal_systems(self):
        dx, dy, rec = to_normal_form(-Y + X * X, X + X * Y, (0, 0))
        assert rec.is_identity
        assert dx == -Y + X * X and dy == X + X * Y

    def test_palomba_needs_sqrt3(self):
        dx, dy = -X + 2 * X * Y, 3 * Y - 5 * X * Y
        with pytest.raises(NormalFormError):
            to_normal_form(dx, dy, (F(3, 5), F(1, 2)))
        u, w, rec = to_normal_form(dx, dy, (F(3, 5), F(1, 2)), exact=False)
        assert rec.omega2 == pytest.approx(3.0)
        assert u.coefficient(0, 1) == -1.0 and w.coefficient(1, 0) == 1.0
        assert u.coefficient(1, 0) == 0.0 and w.coefficient(0, 1) == 0.0
        assert rec.swapped

    def test_not_a_center(self):
        with pytest.raises(NotACenter):
            to_normal_form(X - Y, X, (0, 0))
        with pytest.raises(NotACenter):
            to_normal_form(Y, X, (0, 0))
        with pytest.raises(NormalFormError):
            to_normal_form(-Y + P.const(1), X, (0, 0))

    def test_quartic_kolmogorov_matches_printed_normal_form(self):
        a = to_piecewise(fixture("komquar_4"))
        b = to_piecewise(fixture("komquar_5"))
        assert a.upper.dx == b.upper.dx and a.upper.dy == b.upper.dy

    def test_round_trip_coordinates(self):
        _, _, rec = to_normal_form(-X + 2 * X * Y, 3 * Y - 5 * X * Y, (F(3, 5), F(1, 2)), exact=False)
        u, w = rec.from_original(*rec.to_original(0.3, -0.2))
        assert (u, w) == pytest.approx((0.3, -0.2))

    def test_half_system_checks_linear_part(self):
        with pytest.raises(NormalFormError):
            HalfSystem(Y, X, UPPER)


class TestPolar:
    def test_quadratic_example(self):
        h = HalfSystem(-Y, X + X * X, UPPER)
        R = polar_expansion(h, 3)
        s, c = Q.sin(1), Q.cos(1)
        assert R[0] == qtp_mul(s, qtp_mul(c, c))
        c5 = qtp_mul(c, qtp_mul(qtp_mul(c, c), qtp_mul(c, c)))
        assert R[1] == -qtp_mul(s, c5)

    def test_linear_center(self):
        assert all(not r for r in polar_expansion(HalfSystem(-Y, X + P(), UPPER), 6))

    def test_pure_trig(self):
        r = random.Random(SEED)
        for _ in range(5):
            h = HalfSystem(-Y + rand_poly(r, (2, 3)), X + rand_poly(r, (2, 3)), UPPER)
            assert all(R.theta_degree == 0 for R in polar_expansion(h, 5))

    def test_zero_polynomial_is_harmless(self):
        h1 = HalfSystem(-Y + X * Y, X + Y * Y, UPPER)
        h2 = HalfSystem(-Y + X * Y + P(), X + Y * Y + P({(3, 0): F(0)}), UPPER)
        assert [r.terms for r in polar_expansion(h1, 6)] == [r.terms for r in polar_expansion(h2, 6)]


class TestRadial:
    def test_single_forcing(self):
        c = Q.cos(1)
        R2 = qtp_mul(Q.sin(1), qtp_mul(c, c))
        r = solve_radial_coefficients([R2], FORWARD)
        cube = qtp_mul(c, qtp_mul(c, c))
        assert r[0] == (Q.constant(F(1)) - cube).scale(F(1, 3))
        assert solve_radial_coefficients([R2], BACKWARD)[0] == r[0]

    def test_zero_forcing(self):
        assert all(not x for x in solve_radial_coefficients([Q.zero()] * 4))


class TestDisplacement:
    def test_weak_focus_frozen(self):
        ds = displacement_series(to_piecewise(fixture("weak_focus")), 9)
        assert ds.pi_polynomial(3) == {1: F(3, 4)}
        assert ds.pi_polynomial(7) == {1: F(-69, 2048), 3: F(135, 512)}
        for p in (2, 4, 5, 6, 8, 9):
            assert ds.pi_polynomial(p) == {}
        assert ds.L(2) == PiScalar(0, F(3, 4))

    def test_indexing(self):
        ds = displacement_series(to_piecewise(fixture("weak_focus")), 5)
        assert len(ds.coefficients) == 4
        assert ds.rho_coefficient(3) == ds.L(2) == ds.coefficients[1]

    @pytest.mark.parametrize("name", ["komquar_cub", "komquar_5", "linear_center"])
    def test_fixture_centers_vanish(self, name):
        ds = displacement_series(to_piecewise(fixture(name)), 8)
        assert all(not c for c in ds.coefficients)

    def test_random_piecewise_hamiltonian_centers(self):
        r = random.Random(SEED + 1)
        for _ in range(CASES):
            H = P({(2, 0): F(1, 2), (0, 2): F(1, 2)}) + rand_poly(r, (3,))
            Hm = H + Y * rand_poly(r, (2,))
            up, lo = hamiltonian(H), hamiltonian(Hm)
            s = PiecewiseSystem(HalfSystem(*up, UPPER), HalfSystem(*lo, LOWER))
            ds = displacement_series(s, 8)
            assert all(not c for c in ds.coefficients)

    def test_non_center_detected(self):
        # upper x' = -y + x y, lower linear: L(1) = -integral_0^pi cos^2 sin = -2/3
        s = PiecewiseSystem(HalfSystem(-Y + X * Y, X + P(), UPPER), HalfSystem(-Y, X + P(), LOWER))
        ds = displacement_series(s, 4)
        assert ds.L(1) == PiScalar(F(-2, 3))

    def test_series_against_float_pi(self):
        ds = displacement_series(to_piecewise(fixture("weak_focus")), 9)
        rho = 0.01
        assert ds.evaluate(rho) == pytest.approx(0.75 * math.pi * rho**3 + (-69 / 2048 * math.pi + 135 / 512 * math.pi**3) * rho**7)


class TestPerturbation:
    def test_counts(self):
        base = to_piecewise(fixture("linear_center"))
        assert len(attach_perturbation(base, 2).param_set) == 12
        assert len(attach_perturbation(base, 3).param_set) == 28

    def test_constant_part_is_base(self):
        base = to_piecewise(fixture("komquar_cub"))
        s = to_piecewise(fixture("komquar_cub_perturbed"))
        c = s.constant_part()
        assert c.upper.dx == base.upper.dx and c.lower.dy == base.lower.dy

    def test_sides_use_own_parameters(self):
        s = to_piecewise(fixture("komquar_cub_perturbed"))
        ds = displacement_series(s, 3)
        names = {s.param_set[p].name for p in ds.gradient(1)}
        assert any(n[1] == "+" for n in names) and any(n[1] == "-" for n in names)

    def test_rejects_bad_degree(self):
        with pytest.raises(ValueError):
            attach_perturbation(to_piecewise(fixture("linear_center")), 1)
