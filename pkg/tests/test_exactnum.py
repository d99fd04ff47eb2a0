from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from pbe.exactnum import (
    NEG_INFINITY,
    Cmp,
    Dyadic,
    LogBound,
    compare_certain,
    format_rational,
    lb_add,
    lb_max,
    lb_scale,
    ln2_enclosure,
    ln_enclosure,
    parse_rational,
    refinement_cap,
)

mpmath.mp.dps = 80
LN2 = mpmath.mpf("0.693147180559945309417232121458176568075500134360255254120680009493393621969694715605863326996418687542")


def ref_ln(q: Fraction, dps: int = 200):
    with mpmath.workdps(dps):
        return mpmath.log(mpmath.mpf(q.numerator) / q.denominator)


def encloses(bound: LogBound, x, dps: int = 200) -> bool:
    with mpmath.workdps(dps):
        lo = mpmath.mpf(bound.lo.numerator) / bound.lo.denominator
        hi = mpmath.mpf(bound.hi.numerator) / bound.hi.denominator
        return lo <= x <= hi


def test_ln_one_is_exact():
    b = ln_enclosure(1, 64)
    assert b.lo == b.hi == 0


def test_ln2_width_and_value():
    b = ln_enclosure(2, 64)
    assert encloses(b, LN2)
    assert b.width() <= Fraction(2, 2 ** 64)
    assert ln2_enclosure(64).contains(b.lo) or encloses(ln2_enclosure(64), LN2)


def test_ln_ten_to_thirteen():
    b = ln_enclosure(10 ** 13, 64)
    assert encloses(b, 13 * ref_ln(Fraction(10)))
    assert abs(float(b.lo) - 29.9336) < 1e-4


def test_ln_rejects_nonpositive():
    with pytest.raises(ValueError):
        ln_enclosure(0)
    with pytest.raises(ValueError):
        ln_enclosure(Fraction(-1, 2))


def test_logbound_add_exact():
    assert lb_add(LogBound.exact(1), LogBound.exact(2)) == LogBound.exact(3)


def test_logbound_scale_enclosure():
    blk = ln_enclosure(10 ** 13) + ln_enclosure(3) * 18 + ln_enclosure(2) / 3
    out = lb_scale(144, blk)
    # 144 * (13 ln 10 + 18 ln 3 + ln 2 / 3), independent value
    assert encloses(out, mpmath.mpf("7191.31341097947121543018279910230889834318151903892184222851"), 60)


def test_logbound_max_with_neg_infinity():
    assert lb_max(LogBound.exact(0), NEG_INFINITY) == LogBound.exact(0)
    assert lb_max(NEG_INFINITY, NEG_INFINITY).is_neg_inf


def test_neg_infinity_rules():
    assert (NEG_INFINITY + LogBound.exact(5)).is_neg_inf
    with pytest.raises(ArithmeticError):
        -NEG_INFINITY
    with pytest.raises(ArithmeticError):
        LogBound.exact(1) - NEG_INFINITY


def test_compare_basic():
    assert compare_certain(LogBound.exact(1), LogBound.exact(2)) is Cmp.LE
    assert compare_certain(LogBound.exact(2), LogBound.exact(1)) is Cmp.GE


def test_compare_same_value_is_unknown():
    a = ln_enclosure(3, 64)
    b = LogBound(a.lo, a.hi)
    c = LogBound(a.lo - Fraction(1, 2 ** 80), a.hi)
    assert compare_certain(b, c) is Cmp.UNKNOWN


def test_compare_refines_to_separate():
    # ln(2^20) vs ln(2^20 + 1): overlap at 8 bits, separate after refinement
    a = ln_enclosure(2 ** 20, 8)
    b = ln_enclosure(2 ** 20 + 1, 8)
    assert compare_certain(a, b, bits=8) is Cmp.LE


def test_refinement_cap_env(monkeypatch):
    monkeypatch.setenv("PBE_LOG_PRECISION_CAP", "64")
    assert refinement_cap() == 64
    a = ln_enclosure(2 ** 100, 16)
    b = ln_enclosure(2 ** 100 + 1, 16)
    assert compare_certain(a, b, bits=16) is Cmp.UNKNOWN


def test_rational_format_roundtrip():
    for q in [Fraction(0), Fraction(-3, 7), Fraction(10 ** 40 + 1, 3)]:
        assert parse_rational(format_rational(q)) == q
    with pytest.raises(ValueError):
        parse_rational("1/0")


def test_dyadic_canonical():
    d = Dyadic(12, 0)
    assert (d.mantissa, d.exponent) == (3, 2)
    assert Dyadic.parse(str(d)) == d
    assert Dyadic.from_fraction(Fraction(3, 8)).to_fraction() == Fraction(3, 8)


def test_logbound_json_roundtrip():
    b = ln_enclosure(7)
    assert LogBound.from_json(b.to_json()) == LogBound(b.lo, b.hi)
    assert LogBound.from_json(NEG_INFINITY.to_json()).is_neg_inf


rationals = st.fractions(min_value=Fraction(1, 10 ** 30), max_value=Fraction(10 ** 30), max_denominator=10 ** 30)


@settings(max_examples=1000)
@given(q=rationals, bits=st.integers(min_value=8, max_value=256))
def test_ln_enclosure_contains_reference(q, bits):
    # reference at roughly four times the working precision
    dps = max(40, (4 * bits) // 3 + 20)
    b = ln_enclosure(q, bits)
    assert encloses(b, ref_ln(q, dps), dps)


@given(q=rationals, bits=st.integers(min_value=8, max_value=400))
def test_ln_enclosure_width_bound(q, bits):
    b = ln_enclosure(q, bits)
    e = abs(Fraction(q).numerator.bit_length() - Fraction(q).denominator.bit_length()) + 1
    assert b.width() <= Fraction(1 + e, 2 ** bits)


@given(q=rationals, bits=st.integers(min_value=8, max_value=200))
def test_ln_enclosure_monotone_refinement(q, bits):
    a = ln_enclosure(q, bits)
    b = ln_enclosure(q, 2 * bits)
    # the finer enclosure is never wider; both contain the true value so they overlap
    assert b.width() <= a.width()
    assert b.lo <= a.hi and a.lo <= b.hi


@given(a=st.fractions(max_denominator=10 ** 6), b=st.fractions(max_denominator=10 ** 6),
       c=st.fractions(max_denominator=10 ** 6))
def test_rational_arithmetic_exact(a, b, c):
    lhs = (a + b) + c
    rhs = Fraction(a.numerator * b.denominator + b.numerator * a.denominator, a.denominator * b.denominator) + c
    assert lhs == rhs


@given(k1=st.integers(min_value=1, max_value=60), k2=st.integers(min_value=1, max_value=60),
       base=st.integers(min_value=2, max_value=50))
def test_compare_sound_on_powers(k1, k2, base):
    res = compare_certain(ln_enclosure(base ** k1), ln_enclosure(base ** k2))
    if res is Cmp.LE:
        assert k1 <= k2
    elif res is Cmp.GE:
        assert k1 >= k2
    elif res is Cmp.EQ:
        assert k1 == k2
