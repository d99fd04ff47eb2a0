import itertools
import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from pbe.mpoly import (
    MPoly,
    PolySyntaxError,
    height_arg,
    height_of_polys,
    height_of_set,
    kronecker_substitute,
    parse_poly,
)

V2 = ("x1", "x2")
X = ("x",)


def test_parse_goal_expression():
    g = parse_poly("(x1-1)*(x1+1) + x2*x2", V2)
    assert g == parse_poly("x1^2 + x2^2 - 1", V2)
    assert str(g) == "x1^2 + x2^2 - 1"


def test_parse_zero_and_coefficients():
    assert parse_poly("0", V2).is_zero()
    g = parse_poly("14*x^2 + 4*x + 4", X)
    assert sorted(g.coefficients()) == [4, 4, 14]


def test_parse_errors():
    with pytest.raises(PolySyntaxError) as exc:
        parse_poly("x1 + * 2", V2)
    assert exc.value.pos == 5
    with pytest.raises(PolySyntaxError):
        parse_poly("x3 + 1", V2)
    with pytest.raises(PolySyntaxError):
        parse_poly("(x1 + 1", V2)


def test_parse_rationals_and_powers():
    g = parse_poly("3/4*x1^3 - (x2 - 1/2)^2", V2)
    assert g.eval_exact([2, 1]) == Fraction(3, 4) * 8 - Fraction(1, 4)


def test_heights_of_sets():
    assert height_of_set([Fraction(2, 3)]).arg == 3
    assert height_arg([Fraction(1234567890123, 10 ** 13)]) == 10 ** 13
    assert height_arg([1, -1, 1]) == 1
    assert height_arg([0]) == 1
    with pytest.raises(ValueError):
        height_arg([])


def test_heights_of_polys():
    f = parse_poly("x1^2 + x2^2 - 1", V2)
    assert height_of_polys([f]).lo == 0
    assert height_of_polys([f, parse_poly("2*x1", V2)]).arg == 2
    assert height_of_polys([parse_poly("14*x^2 + 4*x + 4", X)]).arg == 14


def test_derivatives():
    f = parse_poly("x1^2 + x2^2 - 1", V2)
    assert f.partial_derivative(1) == parse_poly("2*x2", V2)
    assert f.gradient() == [parse_poly("2*x1", V2), parse_poly("2*x2", V2)]
    assert MPoly.const(V2, 5).partial_derivative(0).is_zero()


def test_kronecker_examples():
    z = ("z",)
    g, D = kronecker_substitute(parse_poly("x1 + x2", V2))
    assert D == 2 and g == parse_poly("z + z^2", z)
    g, D = kronecker_substitute(MPoly.zero(V2))
    assert g.is_zero()
    g, D = kronecker_substitute(parse_poly("x1*x2", V2))
    assert D == 2 and g == parse_poly("z^3", z)


@pytest.mark.parametrize("n,D", [(2, 2), (3, 2), (2, 3), (3, 3)])
def test_kronecker_monomial_map_injective(n, D):
    seen = set()
    for e in itertools.product(range(D), repeat=n):
        k = sum(ei * D ** i for i, ei in enumerate(e))
        assert k not in seen
        seen.add(k)


def test_eval_exact_examples():
    assert parse_poly("14*x^2 + 4*x + 4", X).eval_exact([100]) == 140404
    f = parse_poly("x1^2 + x2^2 - 1", V2)
    assert f.eval_exact([0, 0]) == f.constant_term() == -1
    assert f.eval_exact([Fraction(3, 5), Fraction(4, 5)]) == 0


def test_zero_degree_is_flagged():
    with pytest.raises(ValueError):
        MPoly.zero(V2).degree()
    assert MPoly.zero(V2).degree_or_none() is None


# ---------------------------------------------------------------------------
# properties

small_q = st.fractions(min_value=-20, max_value=20, max_denominator=6)


def polys(nvars=2, max_deg=3, max_terms=5, coeffs=small_q):
    vars = tuple(f"x{i + 1}" for i in range(nvars))
    exps = st.tuples(*[st.integers(0, max_deg)] * nvars)
    return st.dictionaries(exps, coeffs, max_size=max_terms).map(lambda t: MPoly(vars, t))


@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a + b) - b == a


@given(polys())
def test_print_parse_roundtrip(p):
    assert parse_poly(str(p), p.vars) == p


def _height_by_places(values):
    """h(A) = sum over places of max(0, log max |a|_v), using sympy's factorint."""
    vals = [Fraction(v) for v in values]
    arch = max(abs(v) for v in vals)
    total = math.log(arch) if arch > 1 else 0.0
    primes = set()
    for v in vals:
        for x in (v.numerator, v.denominator):
            if x not in (0, 1, -1):
                primes |= set(sympy.factorint(abs(x)))
    for p in primes:
        best = None
        for v in vals:
            if v == 0:
                continue
            val = sympy.multiplicity(p, v.numerator) - sympy.multiplicity(p, v.denominator)
            best = val if best is None else min(best, val)
        if best is not None and best < 0:
            total += -best * math.log(p)
    return total


@settings(max_examples=200)
@given(st.lists(st.fractions(min_value=-10 ** 6, max_value=10 ** 6, max_denominator=10 ** 5), min_size=1, max_size=6))
def test_height_lcm_matches_factorization(values):
    M = height_arg(values)
    assert math.isclose(math.log(M), _height_by_places(values), rel_tol=1e-12, abs_tol=1e-12)


@settings(max_examples=500)
@given(polys(nvars=3, max_deg=4, max_terms=6, coeffs=st.integers(-50, 50).map(Fraction)))
def test_kronecker_preserves_zeroness_and_height(g):
    gk, D = kronecker_substitute(g)
    assert gk.is_zero() == g.is_zero()
    assert sorted(gk.coefficients()) == sorted(g.coefficients())
    if not g.is_zero():
        assert height_arg(gk.coefficients()) == height_arg(g.coefficients())


@given(polys(), st.tuples(small_q, small_q))
def test_substitute_matches_eval(p, pt):
    assert p.substitute({0: pt[0], 1: pt[1]}).constant_term() == p.eval_exact(pt)
