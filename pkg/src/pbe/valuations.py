"""Certified evaluation at the places of Q.

Two backends share one small arithmetic interface:

* :class:`RealBall` for the archimedean place: an interval with dyadic
  endpoints, every operation rounded outward to a relative mantissa precision;
* :class:`PadicApprox` for an odd prime ``p``: a residue class modulo ``p**N``.

Exact rationals (:class:`~fractions.Fraction`) are accepted wherever a
certified value is, and stay exact until they meet an approximate operand.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .exactnum import (
    NEG_INFINITY,
    Cmp,
    Dyadic,
    LogBound,
    compare_certain,
    floor_log2,
    format_rational,
    ln_enclosure,
    parse_rational,
    to_rational,
)
from .mpoly import MPoly

GUARD_BITS = 64


class PrecisionMismatch(ValueError):
    pass


class NegativeRadicand(ValueError):
    pass


class NonResidue(ValueError):
    pass


class InsufficientPrecision(ValueError):
    pass


class NotVerified(RuntimeError):
    """Interval Newton could not prove existence and uniqueness of a root."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Place:
    """``p = None`` is the archimedean place; otherwise an odd prime."""

    p: Optional[int] = None

    def __post_init__(self):
        if self.p is not None:
            if self.p == 2:
                raise ValueError("the 2-adic place is not supported")
            if not is_prime(self.p):
                raise ValueError(f"{self.p} is not prime")

    @classmethod
    def infinity(cls) -> "Place":
        return cls(None)

    @classmethod
    def prime(cls, p: int) -> "Place":
        return cls(p)

    @classmethod
    def parse(cls, text: str) -> "Place":
        text = str(text).strip().lower()
        if text in ("inf", "infinity", "oo", "real"):
            return cls(None)
        return cls(int(text))

    @property
    def is_archimedean(self) -> bool:
        return self.p is None

    def ln_p(self, bits: int = 128) -> LogBound:
        return ln_enclosure(self.p, bits)

    def __str__(self) -> str:
        return "inf" if self.p is None else str(self.p)


# ---------------------------------------------------------------------------
# dyadic helpers (all exact unless named round_*)


def _cmp(am: int, ae: int, bm: int, be: int) -> int:
    e = min(ae, be)
    x = am << (ae - e)
    y = bm << (be - e)
    return (x > y) - (x < y)


def _add(am: int, ae: int, bm: int, be: int) -> tuple[int, int]:
    e = min(ae, be)
    return (am << (ae - e)) + (bm << (be - e)), e


def _round(m: int, e: int, bits: int, up: bool) -> tuple[int, int]:
    excess = m.bit_length() - bits
    if excess <= 0:
        return m, e
    if up:
        return -((-m) >> excess), e + excess
    return m >> excess, e + excess


def _frac_bound(q: Fraction, bits: int, up: bool) -> tuple[int, int]:
    """Dyadic ``m*2^e`` with at most ``bits`` bits, below/above ``q``."""
    if q == 0:
        return 0, 0
    den = q.denominator
    if den & (den - 1) == 0:
        return _round(q.numerator, -(den.bit_length() - 1), bits, up)
    k = bits - 1 - floor_log2(abs(q))
    num = q.numerator << k if k >= 0 else q.numerator
    d = den if k >= 0 else den << -k
    m = -((-num) // d) if up else num // d
    return _round(m, -k, bits, up)


def _to_frac(m: int, e: int) -> Fraction:
    return Fraction(m << e) if e >= 0 else Fraction(m, 1 << -e)


class RealBall:
    """Closed interval ``[lo, hi]`` with dyadic endpoints at ``bits`` mantissa bits."""

    __slots__ = ("lm", "le", "hm", "he", "bits")

    def __init__(self, lo: Dyadic, hi: Dyadic, bits: int):
        self.lm, self.le = lo.mantissa, lo.exponent
        self.hm, self.he = hi.mantissa, hi.exponent
        self.bits = bits
        if _cmp(self.lm, self.le, self.hm, self.he) > 0:
            raise ValueError("RealBall with lo > hi")

    @classmethod
    def _raw(cls, lm, le, hm, he, bits) -> "RealBall":
        b = cls.__new__(cls)
        b.lm, b.le, b.hm, b.he, b.bits = lm, le, hm, he, bits
        return b

    @classmethod
    def from_rational(cls, q, bits: int) -> "RealBall":
        q = to_rational(q)
        lm, le = _frac_bound(q, bits, False)
        hm, he = _frac_bound(q, bits, True)
        return cls._raw(lm, le, hm, he, bits)

    @classmethod
    def from_interval(cls, lo, hi, bits: int) -> "RealBall":
        lm, le = _frac_bound(to_rational(lo), bits, False)
        hm, he = _frac_bound(to_rational(hi), bits, True)
        if _cmp(lm, le, hm, he) > 0:
            raise ValueError("lo > hi")
        return cls._raw(lm, le, hm, he, bits)

    @property
    def lo(self) -> Dyadic:
        return Dyadic(self.lm, self.le)

    @property
    def hi(self) -> Dyadic:
        return Dyadic(self.hm, self.he)

    @property
    def lo_q(self) -> Fraction:
        return _to_frac(self.lm, self.le)

    @property
    def hi_q(self) -> Fraction:
        return _to_frac(self.hm, self.he)

    @property
    def place(self) -> Place:
        return Place(None)

    def width(self) -> Fraction:
        return self.hi_q - self.lo_q

    def mid(self) -> Fraction:
        return (self.lo_q + self.hi_q) / 2

    def contains(self, x) -> bool:
        if isinstance(x, RealBall):
            return self.lo_q <= x.lo_q and x.hi_q <= self.hi_q
        x = to_rational(x)
        return self.lo_q <= x <= self.hi_q

    def contains_zero(self) -> bool:
        return self.lm <= 0 <= self.hm

    def abs_max(self) -> Fraction:
        return max(abs(self.lo_q), abs(self.hi_q))

    def abs_min(self) -> Fraction:
        if self.contains_zero():
            return Fraction(0)
        return min(abs(self.lo_q), abs(self.hi_q))

    def with_bits(self, bits: int) -> "RealBall":
        lm, le = _round(self.lm, self.le, bits, False)
        hm, he = _round(self.hm, self.he, bits, True)
        return RealBall._raw(lm, le, hm, he, bits)

    def _coerce(self, other) -> "RealBall":
        if isinstance(other, RealBall):
            return other
        if isinstance(other, PadicApprox):
            raise PrecisionMismatch("cannot combine real and p-adic values")
        return RealBall.from_rational(other, self.bits)

    def __add__(self, other) -> "RealBall":
        o = self._coerce(other)
        bits = max(self.bits, o.bits)
        lm, le = _round(*_add(self.lm, self.le, o.lm, o.le), bits, False)
        hm, he = _round(*_add(self.hm, self.he, o.hm, o.he), bits, True)
        return RealBall._raw(lm, le, hm, he, bits)

    __radd__ = __add__

    def __neg__(self) -> "RealBall":
        return RealBall._raw(-self.hm, self.he, -self.lm, self.le, self.bits)

    def __sub__(self, other) -> "RealBall":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RealBall":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RealBall":
        o = self._coerce(other)
        bits = max(self.bits, o.bits)
        prods = [
            (self.lm * o.lm, self.le + o.le),
            (self.lm * o.hm, self.le + o.he),
            (self.hm * o.lm, self.he + o.le),
            (self.hm * o.hm, self.he + o.he),
        ]
        lo = prods[0]
        hi = prods[0]
        for p in prods[1:]:
            if _cmp(*p, *lo) < 0:
                lo = p
            if _cmp(*p, *hi) > 0:
                hi = p
        lm, le = _round(*lo, bits, False)
        hm, he = _round(*hi, bits, True)
        return RealBall._raw(lm, le, hm, he, bits)

    __rmul__ = __mul__

    def square(self) -> "RealBall":
        """Tighter than ``self * self`` when the ball straddles zero."""
        if self.lm >= 0:
            lo, hi = (self.lm * self.lm, 2 * self.le), (self.hm * self.hm, 2 * self.he)
        elif self.hm <= 0:
            lo, hi = (self.hm * self.hm, 2 * self.he), (self.lm * self.lm, 2 * self.le)
        else:
            a, b = (self.lm * self.lm, 2 * self.le), (self.hm * self.hm, 2 * self.he)
            lo, hi = (0, 0), (a if _cmp(*a, *b) >= 0 else b)
        lm, le = _round(*lo, self.bits, False)
        hm, he = _round(*hi, self.bits, True)
        return RealBall._raw(lm, le, hm, he, self.bits)

    def reciprocal(self) -> "RealBall":
        if self.contains_zero():
            raise ZeroDivisionError("reciprocal of a ball containing 0")
        lo_q, hi_q = self.lo_q, self.hi_q
        lm, le = _frac_bound(1 / hi_q, self.bits, False)
        hm, he = _frac_bound(1 / lo_q, self.bits, True)
        return RealBall._raw(lm, le, hm, he, self.bits)

    def __truediv__(self, other) -> "RealBall":
        return self * self._coerce(other).reciprocal()

    def intersect(self, other: "RealBall") -> Optional["RealBall"]:
        lo = (self.lm, self.le) if _cmp(self.lm, self.le, other.lm, other.le) >= 0 else (other.lm, other.le)
        hi = (self.hm, self.he) if _cmp(self.hm, self.he, other.hm, other.he) <= 0 else (other.hm, other.he)
        if _cmp(*lo, *hi) > 0:
            return None
        return RealBall._raw(*lo, *hi, max(self.bits, other.bits))

    def strictly_inside(self, other: "RealBall") -> bool:
        return _cmp(other.lm, other.le, self.lm, self.le) < 0 and _cmp(self.hm, self.he, other.hm, other.he) < 0

    def to_json(self) -> dict:
        return {"lo": str(self.lo), "hi": str(self.hi), "bits": self.bits}

    @classmethod
    def from_json(cls, obj: dict) -> "RealBall":
        return cls(Dyadic.parse(obj["lo"]), Dyadic.parse(obj["hi"]), int(obj["bits"]))

    def __eq__(self, other) -> bool:
        return isinstance(other, RealBall) and self.to_json() == other.to_json()

    def __repr__(self) -> str:
        return f"RealBall([{float(self.lo_q):.17g}, {float(self.hi_q):.17g}], bits={self.bits})"


def _vp(x: int, p: int) -> int:
    if x == 0:
        raise ValueError("valuation of 0")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def rational_valuation(q: Fraction, p: int) -> Optional[int]:
    """``v_p(q)``; ``None`` for ``q = 0``."""
    if q == 0:
        return None
    return _vp(q.numerator, p) - _vp(q.denominator, p)


class PadicApprox:
    """The residue class ``residue + p**N Z_p``."""

    __slots__ = ("p", "N", "residue")

    def __init__(self, p: int, N: int, residue: int):
        if N < 1:
            raise ValueError("p-adic precision must be at least 1")
        self.p = p
        self.N = N
        self.residue = residue % p ** N

    @classmethod
    def from_rational(cls, q, p: int, N: int) -> "PadicApprox":
        q = to_rational(q)
        if q.denominator % p == 0:
            raise ValueError(f"{q} is not {p}-integral")
        mod = p ** N
        return cls(p, N, q.numerator * pow(q.denominator, -1, mod) % mod)

    @property
    def place(self) -> Place:
        return Place(self.p)

    @property
    def modulus(self) -> int:
        return self.p ** self.N

    def valuation(self) -> Optional[int]:
        """Exact valuation when determined, ``None`` if the residue is 0."""
        if self.residue == 0:
            return None
        return _vp(self.residue, self.p)

    def contains(self, x) -> bool:
        if isinstance(x, PadicApprox):
            return x.p == self.p and x.N >= self.N and (x.residue - self.residue) % self.modulus == 0
        q = to_rational(x)
        if q.denominator % self.p == 0:
            return False
        return (q.numerator - self.residue * q.denominator) % self.modulus == 0

    def digits(self, count: Optional[int] = None) -> list[int]:
        count = self.N if count is None else min(count, self.N)
        out, r = [], self.residue
        for _ in range(count):
            out.append(r % self.p)
            r //= self.p
        return out

    def _coerce(self, other) -> "PadicApprox":
        if isinstance(other, PadicApprox):
            if other.p != self.p:
                raise PrecisionMismatch(f"cannot combine {self.p}-adic and {other.p}-adic values")
            return other
        if isinstance(other, RealBall):
            raise PrecisionMismatch("cannot combine real and p-adic values")
        return PadicApprox.from_rational(other, self.p, self.N)

    def __add__(self, other) -> "PadicApprox":
        o = self._coerce(other)
        return PadicApprox(self.p, min(self.N, o.N), self.residue + o.residue)

    __radd__ = __add__

    def __neg__(self) -> "PadicApprox":
        return PadicApprox(self.p, self.N, -self.residue)

    def __sub__(self, other) -> "PadicApprox":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "PadicApprox":
        return self._coerce(other) - self

    def __mul__(self, other) -> "PadicApprox":
        o = self._coerce(other)
        return PadicApprox(self.p, min(self.N, o.N), self.residue * o.residue)

    __rmul__ = __mul__

    def square(self) -> "PadicApprox":
        return self * self

    def reciprocal(self) -> "PadicApprox":
        if self.residue % self.p == 0:
            raise ZeroDivisionError("only p-adic units are inverted")
        return PadicApprox(self.p, self.N, pow(self.residue, -1, self.modulus))

    def __truediv__(self, other) -> "PadicApprox":
        return self * self._coerce(other).reciprocal()

    def to_json(self) -> dict:
        return {"p": self.p, "N": self.N, "residue": str(self.residue)}

    @classmethod
    def from_json(cls, obj: dict) -> "PadicApprox":
        return cls(int(obj["p"]), int(obj["N"]), int(obj["residue"]))

    def __eq__(self, other) -> bool:
        return isinstance(other, PadicApprox) and (self.p, self.N, self.residue) == (other.p, other.N, other.residue)

    def __repr__(self) -> str:
        return f"PadicApprox(p={self.p}, N={self.N}, digits={self.digits(6)}...)"


CertifiedValue = Union[Fraction, RealBall, PadicApprox]


def value_to_json(x: CertifiedValue) -> dict:
    if isinstance(x, RealBall):
        return {"kind": "real", **x.to_json()}
    if isinstance(x, PadicApprox):
        return {"kind": "padic", **x.to_json()}
    return {"kind": "exact", "value": format_rational(to_rational(x))}


def value_from_json(obj: dict) -> CertifiedValue:
    kind = obj["kind"]
    if kind == "real":
        return RealBall.from_json(obj)
    if kind == "padic":
        return PadicApprox.from_json(obj)
    if kind == "exact":
        return parse_rational(obj["value"])
    raise ValueError(f"unknown value kind {kind!r}")


def lift(q, place: Place, precision: int) -> CertifiedValue:
    """Certified value of an exact rational at ``place``."""
    if place.is_archimedean:
        return RealBall.from_rational(q, precision)
    return PadicApprox.from_rational(q, place.p, precision)


def _check_place(x, place: Place) -> None:
    if isinstance(x, RealBall) and not place.is_archimedean:
        raise PrecisionMismatch("real ball supplied at a p-adic place")
    if isinstance(x, PadicApprox) and x.p != place.p:
        raise PrecisionMismatch(f"{x.p}-adic value supplied at place {place}")


def _horner(f: MPoly, point: Sequence, order: list[int], one):
    """Recursive Horner along the last variable in ``order``."""
    if f.is_zero():
        return Fraction(0)
    if not order:
        return f.constant_term()
    i = order[-1]
    rest = order[:-1]
    coeffs = f.univariate_coeffs(i)
    top = max(coeffs)
    acc = None
    for k in range(top, -1, -1):
        c = coeffs.get(k)
        cv = _horner(c, point, rest, one) if c is not None else Fraction(0)
        if acc is None:
            acc = cv
        else:
            acc = acc * point[i] + cv
    return acc


def eval_certified(
    f: MPoly,
    point: Sequence[Optional[CertifiedValue]],
    place: Place,
    precision: Optional[int] = None,
) -> CertifiedValue:
    """Enclosure of ``f(point)``.

    Exact coordinates are substituted exactly before any rounding happens, and
    the remaining arithmetic runs with ``GUARD_BITS`` extra bits before the
    result is rounded back to ``precision``.  Coordinates of variables that do
    not occur in ``f`` may be ``None``.
    """
    if len(point) != f.nvars:
        raise ValueError(f"expected {f.nvars} coordinates, got {len(point)}")
    used = f.used_vars()
    exact = {}
    approx: dict[int, CertifiedValue] = {}
    for i in used:
        x = point[i]
        if x is None:
            raise ValueError(f"coordinate {f.vars[i]} is required but missing")
        if isinstance(x, (RealBall, PadicApprox)):
            _check_place(x, place)
            approx[i] = x
        else:
            exact[i] = to_rational(x)
    g = f.substitute(exact) if exact else f
    if not approx:
        return g.constant_term()
    if place.is_archimedean:
        prec = precision or max(x.bits for x in approx.values())
        work = prec + GUARD_BITS
        pt = [None] * f.nvars
        for i, x in approx.items():
            pt[i] = x if x.bits >= work else RealBall._raw(x.lm, x.le, x.hm, x.he, work)
        val = _horner(g, pt, sorted(approx), None)
        if not isinstance(val, RealBall):
            val = RealBall.from_rational(val, work)
        return val.with_bits(prec)
    prec = precision or min(x.N for x in approx.values())
    low = [x.N for x in approx.values() if x.N < prec]
    if low:
        raise PrecisionMismatch(f"p-adic coordinate known to {min(low)} digits, {prec} requested")
    pt = [None] * f.nvars
    for i, x in approx.items():
        pt[i] = x
    for c in g.coefficients():
        if c.denominator % place.p == 0:
            raise ValueError("p-adic evaluation needs p-integral coefficients")
    val = _horner(g, pt, sorted(approx), None)
    if not isinstance(val, PadicApprox):
        val = PadicApprox.from_rational(val, place.p, prec)
    return PadicApprox(place.p, min(prec, val.N), val.residue)


# ---------------------------------------------------------------------------
# square roots


def _sqrt_floor_frac(q: Fraction, bits: int, up: bool) -> tuple[int, int]:
    """Dyadic bound on ``sqrt(q)`` for rational ``q >= 0``."""
    if q == 0:
        return 0, 0
    k = bits + 1 - floor_log2(q) // 2
    # sqrt(q) * 2^k = sqrt(q * 4^k)
    if k >= 0:
        num, den = q.numerator << (2 * k), q.denominator
    else:
        num, den = q.numerator, q.denominator << (-2 * k)
    if up:
        t = -((-num) // den)
        r = math.isqrt(t)
        if r * r < t:
            r += 1
    else:
        r = math.isqrt(num // den)
    return _round(r, -k, bits, up)


def _rational_sqrt(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


def sqrt_certified(
    x: CertifiedValue,
    place: Optional[Place] = None,
    branch: int = 1,
    precision: Optional[int] = None,
) -> CertifiedValue:
    """Square root with an explicit branch.

    Real place: ``branch`` is the sign (+1 or -1).  p-adic place: ``branch`` is
    the residue class mod p of the unit part of the root.  An exact rational
    square stays exact.
    """
    if isinstance(x, RealBall):
        place = Place(None)
    elif isinstance(x, PadicApprox):
        place = Place(x.p)
    elif place is None:
        raise ValueError("place required for an exact radicand")
    if place.is_archimedean:
        if branch not in (1, -1):
            raise ValueError("real branch must be +1 or -1")
        if not isinstance(x, RealBall):
            q = to_rational(x)
            if q < 0:
                raise NegativeRadicand(f"square root of negative {q}")
            r = _rational_sqrt(q)
            if r is not None:
                return branch * r
            bits = precision or 128
            lo_q, hi_q = q, q
        else:
            bits = precision or x.bits
            if x.lm < 0:
                raise NegativeRadicand("real square root of a ball reaching below 0")
            lo_q, hi_q = x.lo_q, x.hi_q
        lm, le = _sqrt_floor_frac(lo_q, bits, False)
        hm, he = _sqrt_floor_frac(hi_q, bits, True)
        ball = RealBall._raw(lm, le, hm, he, bits)
        return ball if branch == 1 else -ball
    p = place.p
    if not isinstance(x, PadicApprox):
        q = to_rational(x)
        r = _rational_sqrt(q)
        if r is not None and r != 0 and r.numerator % p and r.denominator % p:
            for cand in (r, -r):
                if (cand.numerator - branch * cand.denominator) % p == 0:
                    return cand
            raise NonResidue(f"branch {branch} is not a square root class of {q} mod {p}")
        if precision is None:
            raise ValueError("precision required for a p-adic square root of an exact value")
        x = PadicApprox.from_rational(q, p, precision)
    return _padic_sqrt(x, branch)


def _padic_sqrt(x: PadicApprox, branch: int) -> PadicApprox:
    p, N = x.p, x.N
    v = x.valuation()
    if v is None:
        raise InsufficientPrecision("radicand is 0 to the working precision; branch undetermined")
    if v % 2:
        raise NonResidue("odd valuation: not a square")
    k = v // 2
    M = N - v
    if M < 1:
        raise InsufficientPrecision("no digits of the unit part are known")
    u = (x.residue // p ** v) % p ** M
    r = branch % p
    if r == 0:
        raise ValueError("branch must be a nonzero class mod p")
    if pow(u % p, (p - 1) // 2, p) != 1:
        raise NonResidue(f"{u % p} is not a quadratic residue mod {p}")
    if (r * r - u) % p:
        raise NonResidue(f"branch {r} is not a square root of {u % p} mod {p}")
    s, prec = r, 1
    while prec < M:
        prec = min(2 * prec, M)
        mod = p ** prec
        s = (s - (s * s - u) * pow(2 * s, -1, mod)) % mod
    # known mod p^(M) for the unit part, times p^k
    return PadicApprox(p, M + k, s * p ** k)


# ---------------------------------------------------------------------------
# norms


class Tri(enum.Enum):
    YES = "YES"
    NO = "NO"
    UNKNOWN = "UNKNOWN"


def _ln_q(q: Fraction, bits: int) -> LogBound:
    return NEG_INFINITY if q == 0 else ln_enclosure(q, bits)


def norm_upper_bound(x: CertifiedValue, place: Optional[Place] = None, bits: int = 128) -> LogBound:
    """Enclosure whose ``hi`` bounds ``log |x|_v`` from above."""
    if isinstance(x, RealBall):
        return _ln_q(x.abs_max(), bits)
    if isinstance(x, PadicApprox):
        v = x.valuation()
        return (x.place.ln_p(bits) * (x.N if v is None else v)).__neg__()
    q = to_rational(x)
    if q == 0:
        return NEG_INFINITY
    if place is None or place.is_archimedean:
        return ln_enclosure(abs(q), bits)
    v = rational_valuation(q, place.p)
    return -(place.ln_p(bits) * v) if v >= 0 else place.ln_p(bits) * (-v)


def norm_lower_bound(x: CertifiedValue, place: Optional[Place] = None, bits: int = 128) -> LogBound:
    """Enclosure whose ``lo`` bounds ``log |x|_v`` from below (``NEG_INFINITY`` if 0 is possible)."""
    if isinstance(x, RealBall):
        return _ln_q(x.abs_min(), bits)
    if isinstance(x, PadicApprox):
        v = x.valuation()
        if v is None:
            return NEG_INFINITY
        return -(x.place.ln_p(bits) * v)
    return norm_upper_bound(x, place, bits)


def _exact_norm_range(x: CertifiedValue, place: Optional[Place]) -> tuple[Fraction, Fraction]:
    """Rational ``(low, high)`` with ``low <= |x|_v <= high``."""
    if isinstance(x, RealBall):
        return x.abs_min(), x.abs_max()
    if isinstance(x, PadicApprox):
        v = x.valuation()
        if v is None:
            return Fraction(0), Fraction(1, x.p ** x.N)
        return Fraction(1, x.p ** v), Fraction(1, x.p ** v)
    q = to_rational(x)
    if q == 0:
        return Fraction(0), Fraction(0)
    if place is None or place.is_archimedean:
        return abs(q), abs(q)
    v = rational_valuation(q, place.p)
    return (Fraction(place.p) ** -v,) * 2


def norm_leq(x: CertifiedValue, eps_log: LogBound, place: Optional[Place] = None) -> Tri:
    """Is ``|x|_v <= e^eps`` certain (YES), certainly false (NO), or undecided?

    When ``eps_log`` carries its exact argument the test is a rational comparison.
    """
    if eps_log.arg is not None:
        low, high = _exact_norm_range(x, place)
        if high <= eps_log.arg:
            return Tri.YES
        return Tri.NO if low > eps_log.arg else Tri.UNKNOWN
    if isinstance(x, PadicApprox):
        if eps_log.is_neg_inf:
            return Tri.UNKNOWN if x.residue == 0 else Tri.NO
        lnp = x.place.ln_p()
        v = x.valuation()
        # |x| <= p^-v' where v' = N if residue 0 else v
        v_known = x.N if v is None else v
        # need -v_known * ln p <= eps.lo
        up = compare_certain(-(lnp * v_known), eps_log,
                             refiner=lambda b: (-(x.place.ln_p(b) * v_known), eps_log.refined(b)))
        if up in (Cmp.LE, Cmp.EQ):
            return Tri.YES
        if v is not None:
            return Tri.NO if up is Cmp.GE else Tri.UNKNOWN
        return Tri.UNKNOWN
    if eps_log.is_neg_inf:
        if not isinstance(x, RealBall) and to_rational(x) == 0:
            return Tri.YES
        if isinstance(x, RealBall) and x.abs_max() == 0:
            return Tri.YES
        lower = norm_lower_bound(x, place)
        return Tri.UNKNOWN if lower.is_neg_inf else Tri.NO
    up = compare_certain(norm_upper_bound(x, place), eps_log,
                         refiner=lambda b: (norm_upper_bound(x, place, b), eps_log.refined(b)))
    if up in (Cmp.LE, Cmp.EQ):
        return Tri.YES
    if _strictly_above(lambda b: norm_lower_bound(x, place, b), eps_log):
        return Tri.NO
    return Tri.UNKNOWN


def _strictly_above(fn: Callable[[int], LogBound], eps_log: LogBound) -> bool:
    low = fn(128)
    if low.is_neg_inf:
        return False
    c = compare_certain(low, eps_log, refiner=lambda b: (fn(b), eps_log.refined(b)))
    if c is not Cmp.GE:
        return False
    # GE allows equality of the exact values only when both are exactly known
    return not (low.width() == 0 and eps_log.width() == 0 and low.lo == eps_log.lo)


def norm_geq(x: CertifiedValue, eps_log: LogBound, place: Optional[Place] = None, strict: bool = False) -> Tri:
    """Is ``|x|_v >= e^eps`` (``>`` when ``strict``) certain?"""
    if eps_log.arg is not None:
        low, high = _exact_norm_range(x, place)
        if low > eps_log.arg or (not strict and low == eps_log.arg):
            return Tri.YES
        return Tri.NO if high < eps_log.arg or (strict and high == eps_log.arg) else Tri.UNKNOWN
    low_fn = lambda b: norm_lower_bound(x, place, b)  # noqa: E731
    if eps_log.is_neg_inf:
        if not strict:
            return Tri.YES
        return Tri.UNKNOWN if low_fn(128).is_neg_inf else Tri.YES
    if strict:
        if _strictly_above(low_fn, eps_log):
            return Tri.YES
    else:
        low = low_fn(128)
        if not low.is_neg_inf:
            c = compare_certain(low, eps_log, refiner=lambda b: (low_fn(b), eps_log.refined(b)))
            if c in (Cmp.GE, Cmp.EQ):
                return Tri.YES
    up = norm_upper_bound(x, place)
    if up.is_neg_inf:
        return Tri.NO
    c = compare_certain(up, eps_log, refiner=lambda b: (norm_upper_bound(x, place, b), eps_log.refined(b)))
    if c is Cmp.LE and not (up.width() == 0 and eps_log.width() == 0 and up.hi == eps_log.lo):
        return Tri.NO
    return Tri.UNKNOWN


def value_width(x: CertifiedValue) -> Fraction:
    return x.width() if isinstance(x, RealBall) else Fraction(0)


# ---------------------------------------------------------------------------
# determinants


def _laplace(M: list[list]) -> CertifiedValue:
    n = len(M)
    memo: dict[tuple[int, int], CertifiedValue] = {}

    def minor(row: int, cols: int):
        # determinant of rows row..n-1 restricted to the column set bitmask
        if row == n:
            return Fraction(1)
        key = (row, cols)
        if key in memo:
            return memo[key]
        total = Fraction(0)
        sign = 1
        for j in range(n):
            if cols >> j & 1:
                a = M[row][j]
                if not (isinstance(a, Fraction) and a == 0):
                    term = a * minor(row + 1, cols & ~(1 << j))
                    total = total + term if sign > 0 else total - term
                sign = -sign
        memo[key] = total
        return total

    return minor(0, (1 << n) - 1)


def _bareiss(M: list[list]) -> Optional[CertifiedValue]:
    n = len(M)
    A = [row[:] for row in M]
    prev = Fraction(1)
    sign = 1
    for k in range(n - 1):
        piv = None
        for r in range(k, n):
            a = A[r][k]
            nonzero = (a != 0) if isinstance(a, Fraction) else (isinstance(a, RealBall) and not a.contains_zero())
            if nonzero:
                piv = r
                break
        if piv is None:
            return None
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) / prev
        prev = A[k][k]
    d = A[n - 1][n - 1]
    return d if sign > 0 else -d


def det_certified(M: Sequence[Sequence[CertifiedValue]]) -> CertifiedValue:
    """Determinant enclosure: cofactor expansion up to 4x4, Bareiss above.

    Bareiss needs pivots certified non-zero (exact or real balls away from 0);
    otherwise, and for p-adic entries, memoised Laplace expansion is used.
    """
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("matrix must be square")
    if n == 0:
        return Fraction(1)
    rows = [[x if isinstance(x, (RealBall, PadicApprox)) else to_rational(x) for x in row] for row in M]
    if n > 4 and not any(isinstance(x, PadicApprox) for row in rows for x in row):
        d = _bareiss(rows)
        if d is not None:
            return d
    return _laplace(rows)


# ---------------------------------------------------------------------------
# interval Newton (Krawczyk form)


def _mat_inverse(J: list[list[Fraction]]) -> Optional[list[list[Fraction]]]:
    n = len(J)
    A = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(J)]
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return None
        A[c], A[piv] = A[piv], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


def _round_frac(q: Fraction, bits: int) -> Fraction:
    m, e = _frac_bound(q, bits, False)
    return _to_frac(m, e)


def _krawczyk_step(F, jac, box: list[RealBall], bits: int):
    n = len(box)
    mids = [_round_frac(b.mid(), bits + GUARD_BITS) for b in box]
    Jm = [[jac[i][j].eval_exact(mids) for j in range(n)] for i in range(n)]
    Y = _mat_inverse([[_round_frac(x, 64) if x else x for x in row] for row in Jm])
    if Y is None:
        return None
    Y = [[_round_frac(x, bits) if x else x for x in row] for row in Y]
    work = bits + GUARD_BITS
    mballs = [RealBall.from_rational(m, work) for m in mids]
    Fm = [eval_certified(f, mballs, Place(None), work) for f in F]
    JX = [[eval_certified(jac[i][j], box, Place(None), work) for j in range(n)] for i in range(n)]
    diff = [b - m for b, m in zip(box, mballs)]
    out = []
    for i in range(n):
        acc = mballs[i]
        for k in range(n):
            if Y[i][k]:
                acc = acc - Fm[k] * Y[i][k]
        for j in range(n):
            c = RealBall.from_rational(int(i == j), work)
            for k in range(n):
                if Y[i][k]:
                    c = c - JX[k][j] * Y[i][k]
            acc = acc + c * diff[j]
        out.append(acc.with_bits(bits))
    return out


def interval_newton_refine(F: Sequence[MPoly], box: Sequence[RealBall], bits: Optional[int] = None,
                           max_iter: int = 60) -> list[RealBall]:
    """Prove a unique zero of the square system ``F`` in ``box`` and tighten it.

    Uses the Krawczyk operator ``K(X) = m - Y F(m) + (I - Y F'(X))(X - m)``:
    ``K(X)`` strictly inside ``X`` proves existence and uniqueness.  Raises
    :class:`NotVerified` when that containment cannot be established.
    """
    n = len(box)
    if len(F) != n:
        raise ValueError("system must be square")
    bits = bits or max(b.bits for b in box)
    box = [b.with_bits(bits) if b.bits != bits else b for b in box]
    jac = [[f.partial_derivative(j) for j in range(n)] for f in F]
    K = _krawczyk_step(F, jac, box, bits)
    if K is None or not all(k.strictly_inside(b) for k, b in zip(K, box)):
        raise NotVerified("Krawczyk image is not strictly inside the box")
    box = [k.intersect(b) for k, b in zip(K, box)]
    prev_w = None
    for _ in range(max_iter):
        K = _krawczyk_step(F, jac, box, bits)
        if K is None:
            break
        new = [k.intersect(b) for k, b in zip(K, box)]
        if any(x is None for x in new):
            raise NotVerified("empty intersection during refinement")
        w = max(x.width() for x in new)
        box = new
        if prev_w is not None and w >= prev_w:
            break
        prev_w = w
    return box
