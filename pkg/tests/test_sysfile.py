import random
from fractions import Fraction as F

import pytest

from cycleforge.cli import resolve_system_path
from cycleforge.lyapunov.planar import NormalFormError
from cycleforge.sysfile import SystemSpec, ParseError, dump, parse, parse_file, to_numeric, to_piecewise

FIXTURES = [
    "palomba",
    "palomba_eps05",
    "palomba_epsm05",
    "palomba_damped",
    "palomba_antidamped",
    "komquar_cub",
    "komquar_cub_perturbed",
    "komquar_5",
    "komquar_5_perturbed",
    "komquar_4",
    "weak_focus",
    "linear_center",
]
SEED = 555
CASES = 25


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_round_trip(name):
    s = parse_file(resolve_system_path(name))
    assert s.name == name
    assert parse(dump(s)) == s
    assert dump(parse(dump(s))) == dump(s)


def test_random_round_trip():
    r = random.Random(SEED)
    for _ in range(CASES):
        s = SystemSpec(name=f"sys{r.randint(0, 99)}")
        if r.random() < 0.5:
            s.center = (F(r.randint(-3, 3), r.randint(1, 4)), F(r.randint(-3, 3), r.randint(1, 4)))
        if r.random() < 0.5:
            s.eps = F(r.randint(-5, 5), r.randint(1, 9))
        same = r.random() < 0.4
        for side in "+-":
            for eq in ("dx", "dy"):
                if same and side == "-":
                    s.terms["-"][eq] = dict(s.terms["+"][eq])
                    s.family["-"][eq] = dict(s.family["+"][eq])
                    continue
                s.terms[side][eq] = {(r.randint(0, 3), r.randint(0, 3)): F(r.randint(1, 9), r.randint(1, 5)) for _ in range(3)}
                if r.random() < 0.3:
                    s.family[side][eq] = {(0, 1): F(r.randint(1, 3))}
        if r.random() < 0.5:
            s.perturb_degree = r.randint(2, 4)
            for side in "+-":
                s.factors[side]["dx"] = {(0, 0): F(1), (1, 0): F(r.randint(1, 3), 2)}
        assert parse(dump(s)) == s


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 0),
        ("# only a comment\n", 0),
        ("dx 1 0 1\n", 1),
        ("side:+\ndx 1 0\n", 2),
        ("side:+\ndx 1 0 1/0\n", 2),
        ("side:+\ndx -1 0 1\n", 2),
        ("side:up\n", 1),
        ("side:+\ndx 1 0 1\ndx 1 0 2\n", 3),
        ("side:both\ndy 1 0 1\nperturb degree 1\n", 3),
        ("side:both\ndy 1 0 1\nwobble 3\n", 3),
        ("name a\nname b\nside:+\ndx 0 1 -1\n", 2),
        ("side:both\ndy 1 0 1\nperturb-factor dx 0 0 1\n", 0),
    ],
)
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as exc:
        parse(text)
    assert exc.value.line == line


def test_error_column():
    with pytest.raises(ParseError) as exc:
        parse("side:+\ndx 1 0 abc\n")
    assert (exc.value.line, exc.value.column) == (2, 8)
    assert "line 2, column 8" in str(exc.value)


def test_komquar_cub_structure():
    s = to_piecewise(parse_file(resolve_system_path("komquar_cub")))
    assert s.upper.degree == 3
    assert s.upper.dx.coefficient(2, 1) == 3 and s.upper.dx.coefficient(1, 1) == F(1, 2)


def test_palomba_exact_fails_numeric_works():
    spec = parse_file(resolve_system_path("palomba"))
    with pytest.raises(NormalFormError):
        to_piecewise(spec)
    s = to_numeric(spec)
    # the written upper half (y >= 1/2) lands below w = 0
    assert s.record.swapped and s.original_upper_is_lower
    assert s.to_original(0.0, 0.0) == pytest.approx((0.6, 0.5))


def test_eps_override():
    spec = parse_file(resolve_system_path("palomba"))
    a = to_numeric(spec, F(1, 2))
    b = to_numeric(parse_file(resolve_system_path("palomba_eps05")))
    assert a.upper == b.upper and a.lower == b.lower
    assert spec.with_eps(F(1, 2)).eps == F(1, 2)


def test_raw_mode_keeps_coordinates():
    s = to_numeric(parse_file(resolve_system_path("komquar_4")), normalize=False)
    assert s.record is None
    assert s.upper.fx(2.0, 3.0) == pytest.approx(-2.0 * 2.0 * (29 * 4 - 240 + 360 + 324 + 420))
