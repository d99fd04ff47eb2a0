"""Explicit thresholds, tolerances and size bounds as certified log enclosures.

Every calculator takes a ``bits`` argument and recomputes all logarithms at
that precision, so callers can refine a comparison by calling again with more
bits.  Rounding is pessimistic for the user: heights that must be exceeded are
read at ``hi``, tolerances at ``lo``.

``K_degree`` (the degree of the number field) and ``Nv`` (the local degree) are
carried as parameters and are 1 for the rationals.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .exactnum import DEFAULT_BITS, NEG_INFINITY, LogBound, ln_enclosure
from .mpoly import MPoly, height_arg
from .valuations import Place

FACTORIAL_WARN_LIMIT = 8


def _ln(k, bits: int) -> LogBound:
    return ln_enclosure(Fraction(k), bits)


def _r(x: LogBound, bits: int) -> LogBound:
    return x.refined(bits)


@dataclass(frozen=True)
class BoundContext:
    n: int
    m: int
    d: int
    degrees: tuple[int, ...]
    deg_g: Optional[int]
    logR: LogBound = field(default_factory=lambda: LogBound.exact(0))
    place: Place = field(default_factory=Place)
    K_degree: int = 1
    Nv: int = 1

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(self.degrees))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.m < 0 or len(self.degrees) != self.m:
            raise ValueError("degrees must list one degree per f_i")
        if not 0 <= self.d <= self.n:
            raise ValueError("need 0 <= d <= n")
        if self.logR.is_neg_inf or self.logR.lo < 0:
            raise ValueError("R must be >= 1")
        if self.D < 1:
            raise ValueError("D must be >= 1")

    @property
    def D_f(self) -> int:
        return max(self.degrees, default=1) or 1

    @property
    def D_g(self) -> int:
        if self.deg_g is None or self.deg_g == 0:
            raise ValueError("deg g = 0: constant goal must be decided directly")
        return self.deg_g

    @property
    def D(self) -> int:
        return max(list(self.degrees) + [self.deg_g or 0, 1])

    @classmethod
    def for_system(cls, fs: Sequence[MPoly], g: Optional[MPoly], d: int, R=1,
                   place: Optional[Place] = None, nvars: Optional[int] = None) -> "BoundContext":
        n = nvars if nvars is not None else (fs[0].nvars if fs else g.nvars)
        degs = tuple(f.degree_or_none() or 0 for f in fs)
        deg_g = g.degree_or_none() if g is not None else None
        R = Fraction(R)
        return cls(n=n, m=len(fs), d=d, degrees=degs, deg_g=deg_g,
                   logR=ln_enclosure(R) if R != 1 else LogBound.exact(0),
                   place=place or Place())

    def R_bound(self, bits: int) -> LogBound:
        return _r(self.logR, bits)

    def to_json(self) -> dict:
        return {
            "n": self.n, "m": self.m, "d": self.d, "degrees": list(self.degrees),
            "deg_g": self.deg_g, "D": self.D, "K_degree": self.K_degree, "Nv": self.Nv,
            "logR": self.logR.to_json(), "place": str(self.place),
        }


# ---------------------------------------------------------------------------
# genericity chains


def genericity_threshold_main(ctx: BoundContext, H_prev: LogBound, bits: int = DEFAULT_BITS) -> LogBound:
    """``n D^(m+1) (H_prev + 4 ln(n+2))``."""
    n, D, m = ctx.n, ctx.D, ctx.m
    return (_r(H_prev, bits) + _ln(n + 2, bits) * 4) * (n * D ** (m + 1))


def genericity_threshold_f_only(ctx: BoundContext, H_prev: LogBound, bits: int = DEFAULT_BITS) -> LogBound:
    """``n D_f^m (H_prev + 4 ln(n+2))`` with ``H_prev = h(f, p_1..p_(i-1))`` (g excluded)."""
    n, m = ctx.n, ctx.m
    return (_r(H_prev, bits) + _ln(n + 2, bits) * 4) * (n * ctx.D_f ** m)


def weak_degree_sequence(ctx: BoundContext, count: int) -> list[int]:
    seq = sorted(list(ctx.degrees) + [ctx.deg_g or 0], reverse=True)
    seq = [x for x in seq if x > 0]
    seq += [1] * max(0, count - len(seq))
    return seq[:count]


def genericity_threshold_weak(ctx: BoundContext, H_prev: LogBound, i: int, bits: int = DEFAULT_BITS) -> LogBound:
    """The chain with degrees sorted non-increasingly (``i`` is 1-based)."""
    n, m, d, D = ctx.n, ctx.m, ctx.d, ctx.D
    if not 1 <= i <= max(d, 1):
        raise ValueError("coordinate index out of range")
    n_i = min(n, m + i)
    Ds = weak_degree_sequence(ctx, n_i)
    inv_sum = sum(Fraction(1, x) for x in Ds)
    prod = math.prod(Ds)
    harmonic = sum(Fraction(1, 2 * j) for j in range(1, m + 1))
    main = (_r(H_prev, bits) * inv_sum + _ln(n + 1, bits) * (n + n_i)) * prod
    tail = (_ln(n + 2, bits) + harmonic) * (D ** n_i * (d - i + 1))
    return main + tail + _ln(2, bits)


# ---------------------------------------------------------------------------
# tolerances


def _eps_core(ctx: BoundContext, H: LogBound, D: int, bits: int) -> LogBound:
    n, m, K = ctx.n, ctx.m, ctx.K_degree
    inner = (_r(H, bits) * K + _ln(max(m, 1), bits) + _ln(n + 1, bits) * ((n + 7) * D)
             + ctx.R_bound(bits) / (n + 1))
    return -(inner * (Fraction(4 * K, ctx.Nv) * (n + 1) ** 2 * D ** n))


def epsilon_main(ctx: BoundContext, H_full: LogBound, bits: int = DEFAULT_BITS) -> LogBound:
    """``log eps`` for the robust identity test."""
    return _eps_core(ctx, H_full, ctx.D, bits)


def epsilon_lojasiewicz_empty(ctx: BoundContext, H: LogBound, bits: int = DEFAULT_BITS) -> LogBound:
    """Lower bound on ``max_i log|f_i(P)|_v`` when the f_i have no common zero."""
    return _eps_core(ctx, H, ctx.D_f, bits)


def dichotomy_thresholds(ctx: BoundContext, H: LogBound, bits: int = DEFAULT_BITS) -> tuple[LogBound, LogBound]:
    n, m, K, Nv = ctx.n, ctx.m, ctx.K_degree, ctx.Nv
    Df, Dg = ctx.D_f, ctx.D_g
    Hb = _r(H, bits)
    block = Hb + _ln(n, bits) * 2 + _ln(max(m, 1), bits) + ctx.R_bound(bits) + 12
    eps_f = -(block * (Fraction(4 * K * K, Nv) * (n + 7) ** 3 * (Df ** n + 1) ** (n + 4) * Dg))
    eps_g = -((Hb + _ln(n + 1, bits) * 4) * (Fraction(K, Nv) * n * Df ** (2 * n) * Dg))
    return eps_f, eps_g


def dimension_thresholds(ctx: BoundContext, H: LogBound, bits: int = DEFAULT_BITS) -> tuple[LogBound, LogBound]:
    n, m, K, Nv = ctx.n, ctx.m, ctx.K_degree, ctx.Nv
    Df = ctx.D_f
    Hb = _r(H, bits)
    block = Hb + _ln(n, bits) * 2 + _ln(max(m, 1), bits) + ctx.R_bound(bits) + 12
    eps_f = -(block * (Fraction(4 * K * K, Nv) * (n + 7) ** 3 * (Df ** n + 1) ** (n + 5)))
    eps_det = -((Hb + _ln(n + 1, bits) * 4) * (Fraction(K, Nv) * n * Df ** (3 * n)))
    return eps_f, eps_det


def _lojasiewicz_shape(ctx, lead: LogBound, denom: int, D: int, H: LogBound, log_arg: int, bits: int) -> LogBound:
    n, K = ctx.n, ctx.K_degree
    const = (_r(H, bits) + _ln(log_arg, bits) + 21) * (Fraction(K * K, ctx.Nv) * (n + 7) ** 2 * (D ** n + 1))
    first = lead / denom
    return first + const + ctx.R_bound(bits) * 2


def epsilon_reducible(ctx: BoundContext, H_full: LogBound, worst_eval: LogBound,
                      bits: int = DEFAULT_BITS) -> LogBound:
    """``log eps'`` bounding the distance to a component on which g vanishes."""
    n, m, D = ctx.n, ctx.m, ctx.D
    return _lojasiewicz_shape(ctx, worst_eval, 4 * (n + 1) * (D ** n + 1) ** (n + 2), D, H_full,
                              (m + 1) * n * D ** (2 * n), bits)


def epsilon_pq(ctx: BoundContext, H: LogBound, log_eps_f: LogBound, bits: int = DEFAULT_BITS) -> LogBound:
    n, m, d, Df = ctx.n, ctx.m, ctx.d, ctx.D_f
    return _lojasiewicz_shape(ctx, log_eps_f, 4 * (n + 1) * (Df ** n + 1) ** (n + 2), Df, H,
                              (m + d) * n * Df ** (2 * n), bits)


def lojasiewicz_nonempty_bound(ctx: BoundContext, H: LogBound, worst_eval: LogBound,
                               bits: int = DEFAULT_BITS) -> LogBound:
    """Upper bound on ``log dist_v(P, X)``.

    When some ``|f_i(P)|_v > 1`` (``worst_eval > 0``) the larger-denominator
    variant ``4(n+1)D^(n+1)`` applies.
    """
    n, m, D = ctx.n, ctx.m, ctx.D_f
    if not worst_eval.is_neg_inf and worst_eval.hi > 0:
        denom = 4 * (n + 1) * D ** (n + 1)
    else:
        denom = 4 * (n + 1) * (D ** n + 1) ** (n + 2)
    return _lojasiewicz_shape(ctx, worst_eval, denom, D, H, m * n * D ** (2 * n), bits)


def lojasiewicz_zerodim_bound(ctx: BoundContext, H: LogBound, worst_eval: LogBound, degX: int,
                              bits: int = DEFAULT_BITS) -> LogBound:
    n, m, D, K = ctx.n, ctx.m, ctx.D_f, ctx.K_degree
    if D ** n > FACTORIAL_WARN_LIMIT:
        import warnings
        warnings.warn("factorial constant (D^n+2)! is astronomically large", RuntimeWarning, stacklevel=2)
    N = 4 * (n + 1) * D ** (n + 1)
    Hb = _r(H, bits)
    one = LogBound.exact(1)
    maxH = Hb if Hb.lo >= 1 else (one if Hb.hi <= 1 else LogBound(Fraction(1), Hb.hi))
    big = maxH * (K * K * (n + 3) ** 3 * math.factorial(D ** n + 2))
    return big + ctx.R_bound(bits) * 2 + _ln(max(m, 1), bits) + worst_eval / (N * degX)


# ---------------------------------------------------------------------------
# size bounds


class NssVariant(enum.Enum):
    BEZOUT = "BEZOUT"
    GENERAL = "GENERAL"


@dataclass(frozen=True)
class NssBounds:
    variant: NssVariant
    N: Optional[int]
    deg_lambda_max: int
    h_lambda_max: LogBound

    def to_json(self) -> dict:
        return {"variant": self.variant.value, "N": self.N, "deg_lambda_max": self.deg_lambda_max,
                "h_lambda_max": self.h_lambda_max.to_json()}


def nullstellensatz_size_bounds(ctx: BoundContext, H: LogBound, variant: NssVariant,
                                bits: int = DEFAULT_BITS) -> NssBounds:
    n, m = ctx.n, ctx.m
    Hb = _r(H, bits)
    if variant is NssVariant.BEZOUT:
        D = ctx.D_f
        deg = 4 * n * D ** n
        h = (Hb + _ln(max(m, 1), bits) + _ln(n + 1, bits) * ((n + 7) * D)) * (4 * n * (n + 1) * D ** n)
        return NssBounds(variant, None, deg, h)
    dg = ctx.deg_g or 0
    D = max([dg + 1] + list(ctx.degrees))
    N = 4 * (n + 1) * D ** (n + 1)
    h = (Hb + _ln(m + 1, bits) + _ln(n + 2, bits) * ((n + 8) * D)) * (N * (n + 3))
    return NssBounds(variant, N, N * (dg + 1), h)


def bezout_degree_bound(ctx: BoundContext) -> int:
    return ctx.D_f ** min(ctx.n, ctx.m)


def variety_height_bound(ctx: BoundContext, H: LogBound, bits: int = DEFAULT_BITS) -> LogBound:
    n0 = min(ctx.n, ctx.m)
    Ds = sorted(ctx.degrees, reverse=True)[:n0]
    Ds = [max(x, 1) for x in Ds]
    inv_sum = sum((Fraction(1, x) for x in Ds), Fraction(0))
    return (_r(H, bits) * inv_sum + _ln(ctx.n + 1, bits) * (ctx.n + n0)) * math.prod(Ds)


def generic_point_requirements(ctx: BoundContext, H_fg: LogBound, bits: int = DEFAULT_BITS) -> tuple[LogBound, int]:
    n, m, d, D = ctx.n, ctx.m, ctx.d, ctx.D
    D0 = d * D ** (m + 1)
    H0 = (_r(H_fg, bits) + _ln(n + 2, bits) * 3) * (n * D ** (m + 1))
    return H0, D0


def cauchy_threshold(g: MPoly) -> int:
    """Integers ``p`` at or above this exceed ``1 + e^h(g)`` for ``g`` over Z."""
    if any(c.denominator != 1 for c in g.coefficients()):
        raise ValueError("clear denominators first")
    return 2 + (height_arg(g.coefficients()) if not g.is_zero() else 1)


# ---------------------------------------------------------------------------
# report


@dataclass
class ThresholdReport:
    chain: str
    thresholds: list[LogBound]
    log_eps: Optional[LogBound]
    constants: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "chain": self.chain,
            "thresholds": [t.to_json() for t in self.thresholds],
            "log_eps": self.log_eps.to_json() if self.log_eps is not None else None,
            "constants": {},
        }
        for k in sorted(self.constants):
            v = self.constants[k]
            out["constants"][k] = v.to_json() if isinstance(v, LogBound) else v
        return out

    def text(self) -> str:
        ln10 = ln_enclosure(10)

        def fmt(x: LogBound) -> str:
            if x.is_neg_inf:
                return "-inf"
            mid = (x.lo + x.hi) / 2
            return f"{float(mid):.6g} nats (log10 {float(mid / ln10.lo):.6g})"

        lines = [f"chain: {self.chain}"]
        for i, t in enumerate(self.thresholds, 1):
            lines.append(f"genericity threshold h(p_{i}) >= {fmt(t)}")
        if self.log_eps is not None:
            lines.append(f"log eps = {fmt(self.log_eps)}")
        for k in sorted(self.constants):
            v = self.constants[k]
            lines.append(f"{k} = {fmt(v) if isinstance(v, LogBound) else v}")
        return "\n".join(lines)


__all__ = [
    "BoundContext", "NssBounds", "NssVariant", "ThresholdReport", "NEG_INFINITY",
    "bezout_degree_bound", "cauchy_threshold", "dichotomy_thresholds", "dimension_thresholds",
    "epsilon_lojasiewicz_empty", "epsilon_main", "epsilon_pq", "epsilon_reducible",
    "generic_point_requirements", "genericity_threshold_f_only", "genericity_threshold_main", "genericity_threshold_weak",
    "lojasiewicz_nonempty_bound", "lojasiewicz_zerodim_bound", "nullstellensatz_size_bounds",
    "variety_height_bound", "weak_degree_sequence",
]
