from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import P1, V2, circle_system, thales_system
from pbe.bounds import BoundContext
from pbe.exactnum import LogBound, ln_enclosure
from pbe.mpoly import parse_poly
from pbe.system import PolySystem
from pbe.valuations import PadicApprox, Place, RealBall, Tri, norm_leq, sqrt_certified
from pbe.witness import (
    FreeCoordinate,
    GenericityError,
    Given,
    Linear,
    Newton,
    Rabinowitsch,
    Style,
    WitnessFailure,
    autopilot,
    chain_threshold_fn,
    choose_free_coordinate,
    choose_free_coordinates,
    infer_recipe,
    pattern_integer,
    precision_for,
    solve_fiber,
    step_from_json,
)

SEVEN = Place(7)


def thales_ctx(place=None, R=2):
    s = thales_system(g_height_bound=2)
    return s, BoundContext.for_system(s.f, s.g, 1, R, place or Place(), nvars=2)


def test_pattern_integer():
    assert pattern_integer(13) == 1234567890123
    assert pattern_integer(3) == 123


def test_decimal_pattern_choice():
    c = choose_free_coordinate(LogBound(Fraction(286, 10), Fraction(287, 10)), Place(), Style.decimal())
    assert c.value == P1
    assert c.height.arg == 10 ** 13


def test_decimal_pattern_skips_trailing_zero():
    # k = 10 gives 1234567890, not coprime to 10
    t = ln_enclosure(10 ** 10) - Fraction(1, 10 ** 6)
    c = choose_free_coordinate(t, Place(), Style.decimal())
    assert c.value == Fraction(12345678901, 10 ** 11)


def test_user_value_rejected():
    with pytest.raises(GenericityError) as exc:
        choose_free_coordinate(LogBound(Fraction(286, 10), Fraction(287, 10)), Place(), Style.user([Fraction(1, 2)]))
    assert exc.value.index == 0


def test_padic_pattern_choice():
    c = choose_free_coordinate(LogBound(Fraction(296, 10), Fraction(297, 10)), SEVEN, Style.padic())
    assert c.value == 7 * 1234567890123
    assert abs(float(c.height.lo) - 29.79) < 0.01


def test_thales_real_fiber_at_4330_bits():
    s, ctx = thales_ctx()
    free = [FreeCoordinate(P1, ln_enclosure(10 ** 13), LogBound.exact(0))]
    w = solve_fiber(s, free, infer_recipe(s), Place(), 4330)
    g = s.g
    from pbe.valuations import eval_certified
    out = eval_certified(g, w.values, Place(), 4330)
    bound = Fraction(11, 10) / 10 ** 1303
    assert -bound <= out.lo_q and out.hi_q <= bound


def test_thales_padic_fiber():
    s, ctx = thales_ctx(SEVEN)
    q = Fraction(7 * 1234567890123)
    free = [FreeCoordinate(q, ln_enclosure(q), LogBound.exact(0))]
    w = solve_fiber(s, free, infer_recipe(s), SEVEN, 1525)
    assert w.recipe[0].branch == 1
    assert w.values[1].digits(4) == [1, 0, 3, 5]
    assert w.residuals[0].residue == 0


def test_exact_fiber():
    s = circle_system()
    free = [FreeCoordinate(Fraction(3, 5), ln_enclosure(5), LogBound.exact(0))]
    w = solve_fiber(s, free, infer_recipe(s), Place(), 64)
    assert w.values[1] == Fraction(4, 5)
    assert w.residuals == [0]
    assert w.is_exact()


def test_recipe_steps():
    vars3 = ("x", "y", "t")
    s = PolySystem(vars3, [parse_poly("y - x^2", vars3), parse_poly("1 + t*(y - 2)", vars3)],
                   parse_poly("0", vars3), 1)
    recipe = infer_recipe(s)
    assert [type(r) for r in recipe] == [Linear, Rabinowitsch]
    free = [FreeCoordinate(Fraction(1, 3), ln_enclosure(3), LogBound.exact(0))]
    w = solve_fiber(s, free, recipe, Place(), 64)
    assert w.values == [Fraction(1, 3), Fraction(1, 9), Fraction(9, 17)]
    assert all(r == 0 for r in w.residuals)


def test_recipe_json_roundtrip():
    s = circle_system()
    steps = infer_recipe(s) + [Given(0, Fraction(1, 2), "x1"),
                               Newton(1, vars_=(1,), polys=[s.f[0]], box=[(Fraction(0), Fraction(1))])]
    for st_ in steps:
        assert step_from_json(st_.to_json(), s.vars).to_json() == st_.to_json()


def test_non_triangular_has_no_recipe():
    s = PolySystem(V2, [parse_poly("x1^3 + x2^3 - 1", V2)], parse_poly("0", V2), 1)
    assert infer_recipe(s) is None


def test_quadratic_negative_radicand_fails():
    s = circle_system()
    free = [FreeCoordinate(Fraction(2), ln_enclosure(2), LogBound.exact(0))]
    with pytest.raises(WitnessFailure):
        solve_fiber(s, free, infer_recipe(s), Place(), 64)


def test_newton_step_solves_fiber():
    s = circle_system()
    step = Newton(1, vars_=(1,), polys=[s.f[0]], box=[(Fraction(9, 10), Fraction(1))])
    free = [FreeCoordinate(P1, ln_enclosure(10 ** 13), LogBound.exact(0))]
    w = solve_fiber(s, free, [step], Place(), 512)
    ref = sqrt_certified(1 - P1 * P1, Place(), 1, 512)
    assert w.values[1].intersect(ref) is not None
    assert norm_leq(w.residuals[0], LogBound.exact(-300)) is Tri.YES


def test_autopilot_thales():
    s, ctx = thales_ctx()
    w = autopilot(s, ctx)
    assert w.free_values == [P1]
    assert w.precision == precision_for(
        __import__("pbe.bounds", fromlist=["epsilon_main"]).epsilon_main(ctx, s.height_with([P1])), Place())
    s7, ctx7 = thales_ctx(SEVEN)
    w7 = autopilot(s7, ctx7)
    assert w7.free_values == [7 * 1234567890123]
    assert 1525 <= w7.precision <= 4000


def test_autopilot_rejects_low_height_user_value():
    s, ctx = thales_ctx()
    with pytest.raises(GenericityError):
        autopilot(s, ctx, Style.user([Fraction(1, 2)]))


def test_witness_reverifies_from_json():
    s, ctx = thales_ctx()
    w = autopilot(s, ctx)
    obj = w.to_json()
    free = [FreeCoordinate(Fraction(c["value"]), LogBound.from_json(c["height"]), LogBound.from_json(c["threshold"]))
            for c in obj["free"]]
    recipe = [step_from_json(x, s.vars) for x in obj["recipe"]]
    again = solve_fiber(s, free, recipe, Place(), obj["precision"])
    assert again.to_json() == obj


def test_chain_thresholds_nondecreasing():
    vars3 = ("x", "y", "z")
    s = PolySystem(vars3, [parse_poly("z - x - 2*y", vars3)], parse_poly("z - 2*y - x", vars3), 2)
    ctx = BoundContext.for_system(s.f, s.g, 2, 1, Place(), nvars=3)
    fn = chain_threshold_fn(s, ctx, "main")
    free = choose_free_coordinates(s, fn, Place(), Style.decimal())
    assert free[0].threshold.hi <= free[1].threshold.lo
    assert free[0].height.arg < free[1].height.arg


@settings(max_examples=50)
@given(st.fractions(min_value=Fraction(-9, 10), max_value=Fraction(9, 10), max_denominator=10 ** 6),
       st.integers(64, 512))
def test_quadratic_branches_square_to_radicand(x, bits):
    r = RealBall.from_rational(1 - x * x, bits)
    for b in (1, -1):
        s = sqrt_certified(r, Place(), b, bits)
        assert s.square().intersect(r) is not None
        assert s.square().contains(1 - x * x) or s.square().width() > 0


@settings(max_examples=50)
@given(st.integers(1, 10 ** 9))
def test_padic_quadratic_branches(k):
    q = 7 * k
    rad = PadicApprox.from_rational(1 - q * q, 7, 40)
    for b in (1, 6):
        s = sqrt_certified(rad, SEVEN, b)
        assert (s.residue ** 2 - rad.residue) % 7 ** 40 == 0
