"""Exact rationals, dyadic numbers and rigorous natural-log enclosures.

Rationals are plain :class:`fractions.Fraction` values (always reduced, with a
positive denominator).  Every logarithmic quantity handled by the rest of the
package is a :class:`LogBound`: a closed rational interval guaranteed to
contain the exact value, or the distinguished ``NEG_INFINITY`` for ``log 0``.
"""
from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Union

RationalLike = Union[int, Fraction, str]

DEFAULT_BITS = 128
DEFAULT_CAP = 512


def refinement_cap() -> int:
    """Cap (in bits) for ln-enclosure refinement; ``PBE_LOG_PRECISION_CAP`` overrides."""
    raw = os.environ.get("PBE_LOG_PRECISION_CAP")
    if raw:
        return max(8, int(raw))
    return DEFAULT_CAP


def to_rational(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot convert {type(x).__name__} to a rational exactly")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_rational(s: str) -> Fraction:
    s = s.strip()
    if "/" in s:
        num, den = s.split("/", 1)
        den_i = int(den)
        if den_i <= 0:
            raise ValueError(f"bad rational {s!r}: denominator must be positive")
        return Fraction(int(num), den_i)
    return Fraction(int(s))


# ---------------------------------------------------------------------------
# Dyadic numbers


@dataclass(frozen=True)
class Dyadic:
    """The number ``mantissa * 2**exponent`` in canonical form (odd mantissa, or 0*2^0)."""

    mantissa: int
    exponent: int = 0

    def __post_init__(self):
        m, e = self.mantissa, self.exponent
        if m == 0:
            e = 0
        else:
            tz = (m & -m).bit_length() - 1
            if tz:
                m >>= tz
                e += tz
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "exponent", e)

    def to_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.mantissa << self.exponent)
        return Fraction(self.mantissa, 1 << -self.exponent)

    @classmethod
    def from_fraction(cls, q: Fraction) -> "Dyadic":
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not dyadic")
        return cls(q.numerator, -(den.bit_length() - 1))

    def __str__(self) -> str:
        return f"{self.mantissa}*2^{self.exponent}"

    @classmethod
    def parse(cls, s: str) -> "Dyadic":
        mant, exp = s.split("*2^")
        return cls(int(mant), int(exp))

    def __lt__(self, other: "Dyadic") -> bool:
        return self.to_fraction() < other.to_fraction()

    def __le__(self, other: "Dyadic") -> bool:
        return self.to_fraction() <= other.to_fraction()


def floor_log2(q: Fraction) -> int:
    """Largest e with 2**e <= q, for q > 0."""
    num, den = q.numerator, q.denominator
    e = num.bit_length() - den.bit_length()
    if e >= 0:
        if num < den << e:
            e -= 1
    elif num << -e < den:
        e -= 1
    return e


# ---------------------------------------------------------------------------
# Log enclosures


@dataclass(frozen=True)
class LogBound:
    """Closed interval ``[lo, hi]`` containing a real logarithmic quantity.

    ``arg`` is set when the bound encloses ``ln(arg)`` for an exactly known
    positive rational, which lets callers refine it to any precision.
    """

    lo: Optional[Fraction]
    hi: Optional[Fraction]
    arg: Optional[Fraction] = None

    def __post_init__(self):
        if (self.lo is None) != (self.hi is None):
            raise ValueError("only the all-(-inf) bound may have missing endpoints")
        if self.lo is not None and self.lo > self.hi:
            raise ValueError(f"invalid LogBound: lo={self.lo} > hi={self.hi}")

    @property
    def is_neg_inf(self) -> bool:
        return self.lo is None

    @classmethod
    def exact(cls, x: RationalLike) -> "LogBound":
        q = to_rational(x)
        return cls(q, q)

    def refined(self, bits: int) -> "LogBound":
        if self.arg is None:
            return self
        return ln_enclosure(self.arg, bits)

    def width(self) -> Fraction:
        if self.is_neg_inf:
            return Fraction(0)
        return self.hi - self.lo

    def contains(self, x: Fraction) -> bool:
        return not self.is_neg_inf and self.lo <= x <= self.hi

    # interval arithmetic -------------------------------------------------
    def __add__(self, other: "LogBound | RationalLike") -> "LogBound":
        other = _as_logbound(other)
        if self.is_neg_inf or other.is_neg_inf:
            return NEG_INFINITY
        arg = self.arg * other.arg if self.arg is not None and other.arg is not None else None
        return LogBound(self.lo + other.lo, self.hi + other.hi, arg)

    __radd__ = __add__

    def __neg__(self) -> "LogBound":
        if self.is_neg_inf:
            raise ArithmeticError("negating log 0 = -inf would produce +inf")
        arg = 1 / self.arg if self.arg is not None else None
        return LogBound(-self.hi, -self.lo, arg)

    def __sub__(self, other: "LogBound | RationalLike") -> "LogBound":
        other = _as_logbound(other)
        if other.is_neg_inf:
            raise ArithmeticError("subtracting log 0 = -inf")
        return self + (-other)

    def __rsub__(self, other: RationalLike) -> "LogBound":
        return _as_logbound(other) - self

    def scale(self, c: RationalLike) -> "LogBound":
        c = to_rational(c)
        if c < 0:
            raise ValueError("scale factor must be non-negative; use neg() for sign changes")
        if self.is_neg_inf:
            if c == 0:
                raise ArithmeticError("0 * log 0 is undefined")
            return NEG_INFINITY
        return LogBound(self.lo * c, self.hi * c)

    def __mul__(self, c: RationalLike) -> "LogBound":
        return self.scale(c)

    __rmul__ = __mul__

    def __truediv__(self, c: RationalLike) -> "LogBound":
        c = to_rational(c)
        if c <= 0:
            raise ValueError("divisor must be positive")
        return self.scale(1 / c)

    def to_json(self) -> dict:
        if self.is_neg_inf:
            return {"lo": "-inf", "hi": "-inf"}
        return {"lo": format_rational(self.lo), "hi": format_rational(self.hi)}

    @classmethod
    def from_json(cls, obj: dict) -> "LogBound":
        if obj["lo"] == "-inf":
            return NEG_INFINITY
        return cls(parse_rational(obj["lo"]), parse_rational(obj["hi"]))

    def __repr__(self) -> str:
        if self.is_neg_inf:
            return "LogBound(-inf)"
        return f"LogBound([{float(self.lo):.6g}, {float(self.hi):.6g}])"


NEG_INFINITY = LogBound(None, None)


def _as_logbound(x) -> LogBound:
    if isinstance(x, LogBound):
        return x
    return LogBound.exact(x)


def lb_add(a: LogBound, b: LogBound) -> LogBound:
    return a + b


def lb_scale(c: RationalLike, a: LogBound) -> LogBound:
    return a.scale(c)


def lb_neg(a: LogBound) -> LogBound:
    return -a


def lb_max(a: LogBound, b: LogBound) -> LogBound:
    if a.is_neg_inf:
        return b
    if b.is_neg_inf:
        return a
    return LogBound(max(a.lo, b.lo), max(a.hi, b.hi))


def _atanh_fixed(num: int, den: int, w: int) -> tuple[int, int]:
    """Fixed-point bounds ``(lo, hi)`` on ``atanh(num/den) * 2**w`` for ``0 <= num/den <= 1/3``."""
    if num == 0:
        return 0, 0
    z_lo = (num << w) // den
    z_hi = -((-(num << w)) // den)
    z2_lo = (num * num << w) // (den * den)
    z2_hi = -((-(num * num << w)) // (den * den))
    s_lo = s_hi = 0
    p_lo, p_hi = z_lo, z_hi
    k = 0
    while True:
        d = 2 * k + 1
        s_lo += p_lo // d
        s_hi += -((-p_hi) // d)
        p_lo = (p_lo * z2_lo) >> w
        p_hi = -((-(p_hi * z2_hi)) >> w)
        k += 1
        if p_hi <= 1:
            break
    # tail: sum_{j>=k} z^(2j+1)/(2j+1) <= p_hi/(2k+1) * 1/(1-z^2), and z^2 <= 1/9
    tail = -((-(p_hi * 9)) // (8 * (2 * k + 1))) + 1
    return s_lo, s_hi + tail


@lru_cache(maxsize=64)
def _ln2_fixed(w: int) -> tuple[int, int]:
    lo, hi = _atanh_fixed(1, 3, w)
    return 2 * lo, 2 * hi


def ln2_enclosure(bits: int = DEFAULT_BITS) -> LogBound:
    w = bits + 8
    lo, hi = _ln2_fixed(w)
    return LogBound(Fraction(lo, 1 << w), Fraction(hi, 1 << w), Fraction(2))


def ln_enclosure(q: RationalLike, bits: int = DEFAULT_BITS) -> LogBound:
    """Rigorous enclosure of ``ln q`` with width at most ``2**-bits * (1 + |e|)``.

    ``q = 2**e * r`` with ``r`` in ``[1, 2)``; ``ln r = 2 atanh((r-1)/(r+1))`` is
    summed in fixed point with directed rounding and an explicit tail bound.
    """
    q = to_rational(q)
    if q <= 0:
        raise ValueError(f"ln_enclosure: argument must be positive, got {q}")
    if bits < 8:
        raise ValueError("bits must be >= 8")
    if q == 1:
        return LogBound(Fraction(0), Fraction(0), Fraction(1))
    e = floor_log2(q)
    w = bits + 8 + 2 * abs(e).bit_length()
    # r = q / 2^e, z = (r - 1)/(r + 1) = (num - den*2^e)/(num + den*2^e)
    num, den = q.numerator, q.denominator
    if e >= 0:
        a, b = num, den << e
    else:
        a, b = num << -e, den
    r_lo, r_hi = _atanh_fixed(a - b, a + b, w)
    r_lo, r_hi = 2 * r_lo, 2 * r_hi
    l2_lo, l2_hi = _ln2_fixed(w)
    if e >= 0:
        lo = r_lo + e * l2_lo
        hi = r_hi + e * l2_hi
    else:
        lo = r_lo + e * l2_hi
        hi = r_hi + e * l2_lo
    scale = 1 << w
    return LogBound(Fraction(lo, scale), Fraction(hi, scale), q)


def ln_int(n: int, bits: int = DEFAULT_BITS) -> LogBound:
    """Enclosure of ``ln n``; ``ln 0`` is ``NEG_INFINITY`` by convention."""
    if n == 0:
        return NEG_INFINITY
    return ln_enclosure(Fraction(n), bits)


class Cmp(enum.Enum):
    LE = "LE"
    GE = "GE"
    EQ = "EQ"
    UNKNOWN = "UNKNOWN"


def _cmp_once(a: LogBound, b: LogBound) -> Cmp:
    if a.is_neg_inf and b.is_neg_inf:
        return Cmp.EQ
    if a.is_neg_inf:
        return Cmp.LE
    if b.is_neg_inf:
        return Cmp.GE
    le = a.hi <= b.lo
    ge = a.lo >= b.hi
    if le and ge:
        return Cmp.EQ
    if le:
        return Cmp.LE
    if ge:
        return Cmp.GE
    return Cmp.UNKNOWN


def compare_certain(
    a: LogBound,
    b: LogBound,
    refiner: Optional[Callable[[int], tuple[LogBound, LogBound]]] = None,
    bits: int = DEFAULT_BITS,
    cap: Optional[int] = None,
) -> Cmp:
    """Certain comparison of two enclosures.

    Returns ``LE`` only if ``a.hi <= b.lo`` and ``GE`` only if ``a.lo >= b.hi``
    (``EQ`` when both hold).  When the enclosures overlap, ``refiner(bits)`` is
    asked for tighter pairs at doubling precision up to ``cap``; bounds that
    carry their exact argument are refined automatically.
    """
    cap = refinement_cap() if cap is None else cap
    result = _cmp_once(a, b)
    while result is Cmp.UNKNOWN and bits < cap:
        bits = min(2 * bits, cap)
        if refiner is not None:
            a, b = refiner(bits)
        elif a.arg is not None or b.arg is not None:
            a, b = a.refined(bits), b.refined(bits)
        else:
            break
        result = _cmp_once(a, b)
    return result


def certainly_ge(a: LogBound, b: LogBound, **kw) -> bool:
    return compare_certain(a, b, **kw) in (Cmp.GE, Cmp.EQ)


def certainly_le(a: LogBound, b: LogBound, **kw) -> bool:
    return compare_certain(a, b, **kw) in (Cmp.LE, Cmp.EQ)
