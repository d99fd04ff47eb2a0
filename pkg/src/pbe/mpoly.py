"""Sparse multivariate polynomials over the rationals.

Terms are stored as a mapping from exponent tuples to non-zero
:class:`~fractions.Fraction` coefficients; the zero polynomial has no terms.
The module also carries the height of finite rational sets (computed with the
lcm trick, so no factorisation is needed), formal derivatives, Kronecker
substitution and the textual expression parser.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .exactnum import DEFAULT_BITS, LogBound, ln_enclosure, to_rational

Number = Union[int, Fraction]


class PolySyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class MPoly:
    """Immutable sparse polynomial in the ordered variables ``vars``."""

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars: Sequence[str], terms: Optional[Mapping[tuple, Number]] = None):
        self.vars = tuple(vars)
        clean: dict[tuple, Fraction] = {}
        n = len(self.vars)
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != n:
                raise ValueError(f"exponent vector {exps} does not match {n} variables")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            c = to_rational(c)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if not clean[exps]:
                    del clean[exps]
        self.terms = clean
        self._hash = None

    # constructors ----------------------------------------------------------
    @classmethod
    def zero(cls, vars: Sequence[str]) -> "MPoly":
        return cls(vars)

    @classmethod
    def const(cls, vars: Sequence[str], c: Number) -> "MPoly":
        return cls(vars, {(0,) * len(vars): c})

    @classmethod
    def var(cls, vars: Sequence[str], name_or_index: Union[str, int]) -> "MPoly":
        i = name_or_index if isinstance(name_or_index, int) else list(vars).index(name_or_index)
        exps = [0] * len(vars)
        exps[i] = 1
        return cls(vars, {tuple(exps): 1})

    def _coerce(self, other) -> "MPoly":
        if isinstance(other, MPoly):
            if other.vars != self.vars:
                raise ValueError(f"variable mismatch: {self.vars} vs {other.vars}")
            return other
        return MPoly.const(self.vars, to_rational(other))

    # queries -------------------------------------------------------------
    @property
    def nvars(self) -> int:
        return len(self.vars)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def degree(self) -> int:
        """Total degree.  The zero polynomial raises; use :meth:`degree_or_none`."""
        if not self.terms:
            raise ValueError("degree of the zero polynomial is undefined")
        return max(sum(e) for e in self.terms)

    def degree_or_none(self) -> Optional[int]:
        return max(sum(e) for e in self.terms) if self.terms else None

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=0)

    def degrees(self) -> tuple[int, ...]:
        return tuple(self.degree_in(i) for i in range(self.nvars))

    def used_vars(self) -> set[int]:
        return {i for e in self.terms for i, k in enumerate(e) if k}

    def coefficients(self) -> list[Fraction]:
        return list(self.terms.values())

    # arithmetic ------------------------------------------------------------
    def __add__(self, other) -> "MPoly":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return MPoly(self.vars, out)

    __radd__ = __add__

    def __neg__(self) -> "MPoly":
        return MPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "MPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "MPoly":
        other = self._coerce(other)
        out: dict[tuple, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return MPoly(self.vars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MPoly":
        if k < 0:
            raise ValueError("negative power")
        result = MPoly.const(self.vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c: Number) -> "MPoly":
        c = to_rational(c)
        return MPoly(self.vars, {e: c * v for e, v in self.terms.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, MPoly):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == MPoly.const(self.vars, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    # calculus / substitution -------------------------------------------------
    def partial_derivative(self, i: int) -> "MPoly":
        if not 0 <= i < self.nvars:
            raise IndexError(f"variable index {i} out of range")
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = c * e[i]
        return MPoly(self.vars, out)

    def gradient(self) -> list["MPoly"]:
        return [self.partial_derivative(i) for i in range(self.nvars)]

    def eval_exact(self, point: Sequence[Number]) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {len(point)}")
        pt = [to_rational(x) for x in point]
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for x, k in zip(pt, e):
                if k:
                    term *= x ** k
            total += term
        return total

    def substitute(self, values: Mapping[int, Number]) -> "MPoly":
        """Exactly substitute rationals for some variables (variable list unchanged)."""
        vals = {i: to_rational(v) for i, v in values.items()}
        out: dict[tuple, Fraction] = {}
        for e, c in self.terms.items():
            e2 = list(e)
            for i, v in vals.items():
                if e2[i]:
                    c = c * v ** e2[i]
                    e2[i] = 0
            key = tuple(e2)
            out[key] = out.get(key, Fraction(0)) + c
        return MPoly(self.vars, out)

    def compose(self, images: Sequence["MPoly"]) -> "MPoly":
        """Substitute polynomials (over a common ring) for every variable."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        target_vars = images[0].vars if images else ()
        result = MPoly.zero(target_vars)
        powers: dict[tuple[int, int], MPoly] = {}
        for e, c in self.terms.items():
            term = MPoly.const(target_vars, c)
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    if key not in powers:
                        powers[key] = images[i] ** k
                    term = term * powers[key]
            result = result + term
        return result

    def with_vars(self, vars: Sequence[str]) -> "MPoly":
        """Re-express over a superset of variables, matched by name."""
        vars = tuple(vars)
        idx = [vars.index(v) for v in self.vars]
        out = {}
        for e, c in self.terms.items():
            e2 = [0] * len(vars)
            for i, k in zip(idx, e):
                e2[i] = k
            out[tuple(e2)] = c
        return MPoly(vars, out)

    def clear_denominators(self) -> tuple["MPoly", int]:
        """Return ``(b*self, b)`` with ``b`` the lcm of coefficient denominators."""
        b = 1
        for c in self.terms.values():
            b = b * c.denominator // math.gcd(b, c.denominator)
        return self.scale(b), b

    def univariate_coeffs(self, i: int) -> dict[int, "MPoly"]:
        """Split as ``sum_k c_k * x_i**k`` with ``c_k`` free of ``x_i``."""
        out: dict[int, dict] = {}
        for e, c in self.terms.items():
            k = e[i]
            e2 = list(e)
            e2[i] = 0
            out.setdefault(k, {})[tuple(e2)] = c
        return {k: MPoly(self.vars, t) for k, t in out.items()}

    # printing ------------------------------------------------------------
    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=lambda e: (-sum(e), tuple(-k for k in e))):
            c = self.terms[e]
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k
            )
            mag = abs(c)
            mag_s = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{mag_s}*{mono}"
            else:
                body = mag_s
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"MPoly({str(self)!r}, vars={list(self.vars)})"

    def to_json(self) -> str:
        return str(self)


# ---------------------------------------------------------------------------
# Heights


def height_arg(values: Iterable[Number]) -> int:
    """The integer ``M`` with ``h(A) = ln M`` for a finite rational set ``A``.

    ``b`` is the lcm of the reduced denominators and ``M = max(|b|, |b a|)``;
    over the rationals this is exactly the Weil height of the set.
    """
    vals = [to_rational(v) for v in values]
    if not vals:
        raise ValueError("height of the empty set is undefined")
    b = 1
    for v in vals:
        b = b * v.denominator // math.gcd(b, v.denominator)
    m = b
    for v in vals:
        m = max(m, abs(v.numerator) * (b // v.denominator))
    return m


def height_of_set(values: Iterable[Number], bits: int = DEFAULT_BITS) -> LogBound:
    return ln_enclosure(Fraction(height_arg(values)), bits)


def poly_coefficient_pool(fs: Sequence[MPoly]) -> list[Fraction]:
    pool: list[Fraction] = []
    for f in fs:
        pool.extend(f.coefficients())
    # h(0) := 0 convention: an all-zero family has height 0
    return pool or [Fraction(0)]


def height_of_polys(fs: Sequence[MPoly], bits: int = DEFAULT_BITS) -> LogBound:
    if not fs:
        raise ValueError("need at least one polynomial")
    return height_of_set(poly_coefficient_pool(fs), bits)


def kronecker_substitute(g: MPoly, var: str = "z") -> tuple[MPoly, int]:
    """``g(z, z^D, z^(D^2), ...)`` with ``D`` = 1 + the largest per-variable degree.

    Returns the univariate polynomial and ``D``.
    """
    D = 1 + max(g.degrees(), default=0)
    out: dict[tuple, Fraction] = {}
    for e, c in g.terms.items():
        k = sum(ei * D ** i for i, ei in enumerate(e))
        out[(k,)] = out.get((k,), Fraction(0)) + c
    return MPoly((var,), out), D


# ---------------------------------------------------------------------------
# Parser
#
#   expr     := term (('+'|'-') term)*
#   term     := factor ('*' factor)*
#   factor   := ('-'|'+')? base ('^' uint)?
#   base     := rational | var | '(' expr ')'
#   rational := int ('/' uint)?

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*)|(?P<op>[-+*/^(),]))"
)


def tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolySyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, vars: Sequence[str]):
        self.toks = tokenize(text)
        self.i = 0
        self.vars = tuple(vars)

    def peek(self):
        return self.toks[self.i]

    def take(self, value: Optional[str] = None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise PolySyntaxError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> MPoly:
        p = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise PolySyntaxError(f"unexpected token {tok[1]!r}", tok[2])
        return p

    def expr(self) -> MPoly:
        p = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> MPoly:
        p = self.factor()
        while self.peek()[1] == "*":
            self.take()
            p = p * self.factor()
        return p

    def factor(self) -> MPoly:
        tok = self.peek()
        if tok[1] in ("-", "+"):
            self.take()
            inner = self.factor()
            return -inner if tok[1] == "-" else inner
        base = self.base()
        if self.peek()[1] == "^":
            self.take()
            t = self.take()
            if t[0] != "num":
                raise PolySyntaxError("exponent must be a non-negative integer", t[2])
            base = base ** int(t[1])
        return base

    def base(self) -> MPoly:
        kind, val, pos = self.take()
        if kind == "num":
            q = Fraction(int(val))
            if self.peek()[1] == "/" and self.toks[self.i + 1][0] == "num":
                self.take()
                den = int(self.take()[1])
                if den == 0:
                    raise PolySyntaxError("zero denominator", pos)
                q = q / den
            return MPoly.const(self.vars, q)
        if kind == "name":
            if val not in self.vars:
                raise PolySyntaxError(f"unknown variable {val!r}", pos)
            return MPoly.var(self.vars, val)
        if val == "(":
            p = self.expr()
            self.take(")")
            return p
        raise PolySyntaxError(f"unexpected token {val or 'end of input'!r}", pos)


def parse_poly(text: str, vars: Sequence[str]) -> MPoly:
    """Parse and expand a polynomial expression over ``vars``."""
    return _Parser(text, vars).parse()
