"""Ruler-and-compass construction language compiled to polynomial systems.

Objects and their coordinates::

    point   P   ->  P.x, P.y
    line    l   ->  l.a, l.b          (y = a*x + b; vertical lines are not expressible)
    circle  k   ->  k.a, k.b, k.r     ((x-a)^2 + (y-b)^2 = r^2)
    conic   c   ->  c.a .. c.e        (x^2 + a*x*y + b*y^2 + c*x + d*y + e = 0)

A program is a list of lines::

    const A = point(-1, 0)
    free C : point
    require on_circle(C, unit)
    forbid distinct(A, C)
    goal dot(C - A, C - B) = 0
    assume irreducible
    assume dim 1

Each ``require`` yields one polynomial; each ``forbid`` yields a fresh
variable ``t`` and the polynomial ``1 + t*h``.  Free parameters come first in
the variable order, then coordinates solved by the requirements, then the
Rabinowitsch variables.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .exactnum import format_rational
from .mpoly import MPoly, height_arg, tokenize
from .system import PolySystem
from .witness import Linear, Quadratic, Rabinowitsch, Step

KIND_COORDS = {
    "point": ("x", "y"),
    "line": ("a", "b"),
    "circle": ("a", "b", "r"),
    "conic": ("a", "b", "c", "d", "e"),
}

BUILTINS = {
    "on_line": ("point", "line"),
    "on_circle": ("point", "circle"),
    "on_conic": ("point", "conic"),
    "parallel": ("line", "line"),
    "perpendicular": ("line", "line"),
    "tangent": ("line", "circle"),
    "angle_eq": ("line", "line", "line", "line"),
}


class GeoSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int = 0):
        super().__init__(f"line {line}, column {col + 1}: {message}")
        self.line = line
        self.col = col


class ConstraintKind(enum.Enum):
    BUILTIN = "BUILTIN"
    RAW = "RAW"
    DISTINCT = "DISTINCT"


@dataclass(frozen=True)
class Decl:
    name: str
    kind: str
    const: bool
    values: tuple = ()

    def pretty(self) -> str:
        if self.const:
            vals = ", ".join(format_rational(v) if v.denominator != 1 else str(v.numerator) for v in self.values)
            return f"const {self.name} = {self.kind}({vals})"
        return f"free {self.name} : {self.kind}"


@dataclass(frozen=True)
class Constraint:
    kind: ConstraintKind
    name: str = ""
    args: tuple = ()
    expr: str = ""
    line: int = 0

    def pretty(self) -> str:
        if self.kind is ConstraintKind.RAW:
            return f"{self.expr} = 0"
        return f"{self.name}({', '.join(self.args)})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, Constraint) and (self.kind, self.name, self.args, self.expr)
                == (other.kind, other.name, other.args, other.expr))

    def __hash__(self) -> int:
        return hash((self.kind, self.name, self.args, self.expr))


@dataclass
class GeoProgram:
    decls: list[Decl] = field(default_factory=list)
    requirements: list[Constraint] = field(default_factory=list)
    forbids: list[Constraint] = field(default_factory=list)
    goal: Optional[str] = None
    irreducible: bool = False
    dim: Optional[int] = None
    pragmas: list[str] = field(default_factory=list)

    def decl(self, name: str) -> Optional[Decl]:
        return next((d for d in self.decls if d.name == name), None)

    def pretty(self) -> str:
        lines = [d.pretty() for d in self.decls]
        lines += [f"require {c.pretty()}" for c in self.requirements]
        lines += [f"forbid {c.pretty()}" for c in self.forbids]
        if self.goal is not None:
            lines.append(f"goal {self.goal} = 0")
        lines += [f"assume {p}" for p in self.pragmas]
        return "\n".join(lines) + ("\n" if lines else "")

    def __eq__(self, other) -> bool:
        return isinstance(other, GeoProgram) and (
            self.decls, self.requirements, self.forbids, self.goal, self.irreducible, self.dim
        ) == (other.decls, other.requirements, other.forbids, other.goal, other.irreducible, other.dim)


_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_RAT = r"[-+]?\s*\d+(?:\s*/\s*\d+)?"
_CONST_RE = re.compile(rf"const\s+({_IDENT})\s*=\s*({_IDENT})\s*\((.*)\)\s*$")
_FREE_RE = re.compile(rf"free\s+({_IDENT})\s*:\s*({_IDENT})\s*$")
_CALL_RE = re.compile(rf"({_IDENT})\s*\((.*)\)\s*$")


def _split_eq(text: str, lineno: int, col: int) -> str:
    if text.count("=") != 1:
        raise GeoSyntaxError("expected '<expression> = 0'", lineno, col)
    lhs, rhs = text.split("=")
    if rhs.strip() != "0":
        raise GeoSyntaxError("right-hand side must be 0", lineno, col + len(lhs) + 1)
    if not lhs.strip():
        raise GeoSyntaxError("empty expression", lineno, col)
    return lhs.strip()


def parse_geo(text: str) -> GeoProgram:
    prog = GeoProgram()
    names: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        col = len(line) - len(line.lstrip())
        keyword = stripped.split(None, 1)[0]
        rest = stripped[len(keyword):].strip()
        rest_col = col + stripped.index(rest) if rest else col + len(keyword)
        if keyword in ("const", "free"):
            m = (_CONST_RE if keyword == "const" else _FREE_RE).match(stripped)
            if not m:
                raise GeoSyntaxError(f"malformed {keyword} declaration", lineno, col)
            name, kind = m.group(1), m.group(2)
            if kind not in KIND_COORDS:
                raise GeoSyntaxError(f"unknown object kind {kind!r}", lineno, col + stripped.index(kind, len(keyword)))
            if name in names:
                raise GeoSyntaxError(f"duplicate name {name!r}", lineno, col + stripped.index(name))
            values: tuple = ()
            if keyword == "const":
                if kind == "conic":
                    raise GeoSyntaxError("const conics are not supported; use raw requirements", lineno, col)
                parts = [p.strip() for p in m.group(3).split(",")]
                if len(parts) != len(KIND_COORDS[kind]) or not all(re.fullmatch(_RAT, p) for p in parts):
                    raise GeoSyntaxError(f"{kind} needs {len(KIND_COORDS[kind])} rational values", lineno, col)
                values = tuple(Fraction(p.replace(" ", "")) for p in parts)
            names.add(name)
            prog.decls.append(Decl(name, kind, keyword == "const", values))
        elif keyword == "require":
            prog.requirements.append(_parse_constraint(rest, lineno, rest_col, prog, allow_distinct=False))
        elif keyword == "forbid":
            prog.forbids.append(_parse_constraint(rest, lineno, rest_col, prog, allow_distinct=True))
        elif keyword == "goal":
            if prog.goal is not None:
                raise GeoSyntaxError("only one goal is allowed", lineno, col)
            prog.goal = _split_eq(rest, lineno, rest_col)
        elif keyword == "assume":
            if rest == "irreducible":
                prog.irreducible = True
            elif re.fullmatch(r"dim\s+\d+", rest):
                prog.dim = int(rest.split()[1])
            else:
                raise GeoSyntaxError(f"unknown assumption {rest!r}", lineno, rest_col)
            prog.pragmas.append(" ".join(rest.split()))
        else:
            raise GeoSyntaxError(f"unknown statement {keyword!r}", lineno, col)
    return prog


def _parse_constraint(text: str, lineno: int, col: int, prog: GeoProgram, allow_distinct: bool) -> Constraint:
    m = _CALL_RE.match(text)
    if m and "=" not in text and (m.group(1) in BUILTINS or m.group(1) == "distinct"):
        name = m.group(1)
        args = tuple(a.strip() for a in m.group(2).split(",")) if m.group(2).strip() else ()
        if name == "distinct":
            if not allow_distinct:
                raise GeoSyntaxError("distinct(...) is only allowed in forbid", lineno, col)
            expected = ("point", "point")
            kind = ConstraintKind.DISTINCT
        else:
            if allow_distinct:
                raise GeoSyntaxError("forbid takes '<expression> = 0' or distinct(P, Q)", lineno, col)
            expected = BUILTINS[name]
            kind = ConstraintKind.BUILTIN
        if len(args) != len(expected):
            raise GeoSyntaxError(f"{name} takes {len(expected)} arguments", lineno, col)
        for a, k in zip(args, expected):
            d = prog.decl(a)
            if d is None:
                raise GeoSyntaxError(f"undeclared object {a!r}", lineno, col + text.index(a))
            if d.kind != k:
                raise GeoSyntaxError(f"{a!r} is a {d.kind}, {name} expects a {k}", lineno, col + text.index(a))
        return Constraint(kind, name, args, line=lineno)
    if m and m.group(1) not in ("dot",) and "=" not in text:
        raise GeoSyntaxError(f"unknown constraint {m.group(1)!r}", lineno, col)
    return Constraint(ConstraintKind.RAW, expr=_split_eq(text, lineno, col), line=lineno)


# ---------------------------------------------------------------------------
# expressions over object coordinates (with 2-vector sugar for points)

Value = Union[MPoly, tuple]


class _ExprParser:
    def __init__(self, text: str, prog: GeoProgram, vars: tuple, lineno: int):
        self.text = text
        try:
            self.toks = tokenize(text)
        except ValueError as exc:
            raise GeoSyntaxError(str(exc), lineno) from exc
        self.i = 0
        self.prog = prog
        self.vars = vars
        self.lineno = lineno

    def err(self, msg: str, pos: Optional[int] = None):
        if pos is None:
            pos = self.toks[self.i][2]
        return GeoSyntaxError(msg, self.lineno, pos)

    def peek(self):
        return self.toks[self.i]

    def take(self, value: Optional[str] = None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise self.err(f"expected {value!r}")
        self.i += 1
        return tok

    def const(self, q) -> MPoly:
        return MPoly.const(self.vars, q)

    def coord(self, name: str, pos: int) -> MPoly:
        obj, _, c = name.partition(".")
        d = self.prog.decl(obj)
        if d is None:
            raise self.err(f"undeclared object {obj!r}", pos)
        coords = KIND_COORDS[d.kind]
        if c not in coords:
            raise self.err(f"{d.kind} {obj!r} has no coordinate {c!r}", pos)
        if d.const:
            return self.const(d.values[coords.index(c)])
        return MPoly.var(self.vars, name)

    def parse_terms(self) -> list[Value]:
        """Top-level additive terms, a bare ``dot(U, V)`` term contributing its two products."""
        terms = []
        sign = 1
        while True:
            if self.peek()[1] in ("+", "-"):
                sign = -1 if self.take()[1] == "-" else 1
            start = self.i
            t = self.term()
            tok = self.toks[start]
            is_dot = (tok[1] == "dot" and self.toks[start + 1][1] == "(" and self._matching(start + 1) == self.i - 1)
            if is_dot:
                u, v = self._dot_args(start)
                terms += [u[0] * v[0] * sign, u[1] * v[1] * sign]
            else:
                terms.append(self._neg(t) if sign < 0 else t)
            sign = 1
            if self.peek()[1] not in ("+", "-"):
                break
        if self.peek()[0] != "end":
            raise self.err(f"unexpected token {self.peek()[1]!r}")
        return terms

    def _matching(self, open_idx: int) -> int:
        depth = 0
        for j in range(open_idx, len(self.toks)):
            if self.toks[j][1] == "(":
                depth += 1
            elif self.toks[j][1] == ")":
                depth -= 1
                if depth == 0:
                    return j
        return -1

    def _dot_args(self, start: int):
        save = self.i
        self.i = start + 2
        u = self.expr()
        self.take(",")
        v = self.expr()
        self.i = save
        return u, v

    def parse(self) -> Value:
        v = self.expr()
        if self.peek()[0] != "end":
            raise self.err(f"unexpected token {self.peek()[1]!r}")
        return v

    @staticmethod
    def _neg(v: Value) -> Value:
        return (-v[0], -v[1]) if isinstance(v, tuple) else -v

    def _add(self, a: Value, b: Value, op: str, pos: int) -> Value:
        if isinstance(a, tuple) != isinstance(b, tuple):
            raise self.err("cannot add a point to a scalar", pos)
        if isinstance(a, tuple):
            return (a[0] + b[0], a[1] + b[1]) if op == "+" else (a[0] - b[0], a[1] - b[1])
        return a + b if op == "+" else a - b

    def _mul(self, a: Value, b: Value, pos: int) -> Value:
        if isinstance(a, tuple) and isinstance(b, tuple):
            raise self.err("use dot(U, V) to multiply two points", pos)
        if isinstance(a, tuple):
            return (a[0] * b, a[1] * b)
        if isinstance(b, tuple):
            return (a * b[0], a * b[1])
        return a * b

    def expr(self) -> Value:
        v = self.term()
        while self.peek()[1] in ("+", "-"):
            op, pos = self.take()[1], self.peek()[2]
            v = self._add(v, self.term(), op, pos)
        return v

    def term(self) -> Value:
        v = self.factor()
        while self.peek()[1] == "*":
            pos = self.take()[2]
            v = self._mul(v, self.factor(), pos)
        return v

    def factor(self) -> Value:
        if self.peek()[1] in ("-", "+"):
            neg = self.take()[1] == "-"
            v = self.factor()
            return self._neg(v) if neg else v
        v = self.base()
        if self.peek()[1] == "^":
            pos = self.take()[2]
            t = self.take()
            if t[0] != "num":
                raise self.err("exponent must be a non-negative integer", t[2])
            if isinstance(v, tuple):
                raise self.err("cannot raise a point to a power", pos)
            v = v ** int(t[1])
        return v

    def base(self) -> Value:
        kind, val, pos = self.take()
        if kind == "num":
            q = Fraction(int(val))
            if self.peek()[1] == "/" and self.toks[self.i + 1][0] == "num":
                self.take()
                den = int(self.take()[1])
                if den == 0:
                    raise self.err("zero denominator", pos)
                q /= den
            return self.const(q)
        if kind == "name":
            if val == "dot" and self.peek()[1] == "(":
                self.take("(")
                u = self.expr()
                self.take(",")
                v = self.expr()
                self.take(")")
                if not (isinstance(u, tuple) and isinstance(v, tuple)):
                    raise self.err("dot(U, V) needs two points", pos)
                return u[0] * v[0] + u[1] * v[1]
            if "." in val:
                return self.coord(val, pos)
            d = self.prog.decl(val)
            if d is None:
                raise self.err(f"undeclared object {val!r}", pos)
            if d.kind != "point":
                raise self.err(f"{val!r} is a {d.kind}; use its coordinates", pos)
            return (self.coord(val + ".x", pos), self.coord(val + ".y", pos))
        if val == "(":
            v = self.expr()
            self.take(")")
            return v
        raise self.err(f"unexpected token {val or 'end of input'!r}", pos)


def _scalar(v: Value, lineno: int) -> MPoly:
    if isinstance(v, tuple):
        raise GeoSyntaxError("expression must be a scalar, not a point", lineno)
    return v


# ---------------------------------------------------------------------------
# compilation


@dataclass
class CompiledSystem:
    system: PolySystem
    n_f: int
    n_e: int
    n_i: int
    d_guess: int
    recipe: Optional[list[Step]]
    free_vars: tuple
    solved_vars: tuple
    dummy_vars: tuple
    assumptions: list[str]

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def m(self) -> int:
        return self.system.m

    def to_json(self) -> dict:
        return {"system": self.system.to_json(), "n_f": self.n_f, "n_e": self.n_e, "n_i": self.n_i,
                "d_guess": self.d_guess, "assumptions": list(self.assumptions)}


def _builtin_poly(c: Constraint, P) -> MPoly:
    """Constraint polynomial; ``P(obj, coord)`` returns the coordinate polynomial."""
    a = c.args
    if c.name == "on_line":
        return P(a[0], "y") - P(a[1], "a") * P(a[0], "x") - P(a[1], "b")
    if c.name == "on_circle":
        return (P(a[0], "x") - P(a[1], "a")) ** 2 + (P(a[0], "y") - P(a[1], "b")) ** 2 - P(a[1], "r") ** 2
    if c.name == "on_conic":
        x, y = P(a[0], "x"), P(a[0], "y")
        k = a[1]
        return x * x + P(k, "a") * x * y + P(k, "b") * y * y + P(k, "c") * x + P(k, "d") * y + P(k, "e")
    if c.name == "parallel":
        return P(a[0], "a") - P(a[1], "a")
    if c.name == "perpendicular":
        return P(a[0], "a") * P(a[1], "a") + 1
    if c.name == "tangent":
        la, lb = P(a[0], "a"), P(a[0], "b")
        ka, kb, kr = P(a[1], "a"), P(a[1], "b"), P(a[1], "r")
        return (la * ka - kb + lb) ** 2 - kr ** 2 * (la * la + 1)
    if c.name == "angle_eq":
        b1, b2, b3, b4 = (P(x, "a") for x in a)
        return (b2 - b1) * (b3 * b4 + 1) - (b4 - b3) * (b1 * b2 + 1)
    if c.name == "distinct":
        return (P(a[0], "x") - P(a[1], "x")) ** 2 + (P(a[0], "y") - P(a[1], "y")) ** 2
    raise ValueError(f"unknown constraint {c.name!r}")


def _constraint_poly(c: Constraint, prog: GeoProgram, vars: tuple) -> MPoly:
    if c.kind is ConstraintKind.RAW:
        return _scalar(_ExprParser(c.expr, prog, vars, c.line).parse(), c.line)
    parser = _ExprParser("0", prog, vars, c.line)
    return _builtin_poly(c, lambda obj, co: parser.coord(f"{obj}.{co}", 0))


def compile_program(prog: GeoProgram) -> CompiledSystem:
    obj_vars = [f"{d.name}.{c}" for d in prog.decls if not d.const for c in KIND_COORDS[d.kind]]
    dummies = [f"t{i + 1}" for i in range(len(prog.forbids))]
    base_vars = tuple(obj_vars + dummies)

    reqs = [_constraint_poly(c, prog, base_vars) for c in prog.requirements]
    forbid_h = [_constraint_poly(c, prog, base_vars) for c in prog.forbids]

    # choose the variable each requirement solves for
    solved: list[Optional[int]] = []
    referenced: set[int] = set()
    taken: set[int] = set()
    for f in reqs:
        cands = [i for i in f.used_vars() if i < len(obj_vars) and i not in referenced and i not in taken
                 and f.degree_in(i) in (1, 2)]
        choice = max(cands) if cands else None
        solved.append(choice)
        if choice is not None:
            taken.add(choice)
        referenced |= f.used_vars()
    solved_set = [s for s in solved if s is not None]
    free_idx = [i for i in range(len(obj_vars)) if i not in taken]
    order = free_idx + solved_set
    order_names = tuple(obj_vars[i] for i in order) + tuple(dummies)
    vars = order_names

    reqs_r = [MPoly(base_vars, p.terms).with_vars(vars) for p in reqs]
    forbid_r = [MPoly(base_vars, p.terms).with_vars(vars) for p in forbid_h]
    rab = [MPoly.const(vars, 1) + MPoly.var(vars, t) * h for t, h in zip(dummies, forbid_r)]

    n_f = len(obj_vars)
    n_e = len(reqs)
    n_i = len(prog.forbids)
    n = len(vars)
    m = n_e + n_i
    d_guess = n - m

    recipe: Optional[list[Step]] = None
    if all(s is not None for s in solved) and d_guess >= 0:
        recipe = []
        pos = {name: k for k, name in enumerate(vars)}
        ok = True
        for f, s in zip(reqs_r, solved):
            var = pos[obj_vars[s]]
            if any(pos_i > var for pos_i in f.used_vars() if pos_i != var):
                ok = False
                break
            coeffs = f.univariate_coeffs(var)
            zero = MPoly.zero(vars)
            c0, c1, c2 = coeffs.get(0, zero), coeffs.get(1, zero), coeffs.get(2, zero)
            recipe.append(Linear(var, c1, c0) if f.degree_in(var) == 1 else Quadratic(var, c2, c1, c0))
        for t, h in zip(dummies, forbid_r):
            recipe.append(Rabinowitsch(pos[t], h))
        if not ok:
            recipe = None

    g = MPoly.zero(vars)
    g_bound = None
    if prog.goal is not None:
        terms = _ExprParser(prog.goal, prog, base_vars, 0).parse_terms()
        terms = [_scalar(t, 0) for t in terms]
        g = MPoly.zero(base_vars)
        pool = []
        for t in terms:
            g = g + t
            pool += t.coefficients()
        g = MPoly(base_vars, g.terms).with_vars(vars)
        g_bound = len(terms) * height_arg(pool or [Fraction(0)])

    dim = prog.dim if prog.dim is not None else max(d_guess, 0)
    system = PolySystem(vars, reqs_r + rab, g, min(dim, n), prog.irreducible, recipe=recipe,
                        g_height_bound=g_bound)
    return CompiledSystem(system, n_f, n_e, n_i, d_guess, recipe, tuple(obj_vars[i] for i in free_idx),
                          tuple(obj_vars[i] for i in solved_set), tuple(dummies), list(prog.pragmas))


def compile_source(text: str) -> CompiledSystem:
    return compile_program(parse_geo(text))


def dimension_guess_check(cs: CompiledSystem, witness, ctx) -> tuple[str, Optional[int], object]:
    """Certify the guessed dimension ``n - m`` with the determinant criterion.

    Returns ``("CONFIRMED", d, certificate)`` or ``("INCONCLUSIVE", None, certificate)``.
    """
    from .pipeline import dimension_by_example

    d = cs.d_guess
    if d < 0 or d > cs.n:
        return "INCONCLUSIVE", None, None
    sys_d = PolySystem(cs.system.vars, cs.system.f, cs.system.g, d, cs.system.irreducible,
                       recipe=cs.recipe, g_height_bound=cs.system.g_height_bound)
    selection = list(range(cs.n - d))
    cert = dimension_by_example(sys_d, d, ctx.place, ctx.logR.arg if ctx.logR.arg else 1, witness, selection)
    if cert.verdict == "DIM_CONFIRMED":
        return "CONFIRMED", d, cert
    return "INCONCLUSIVE", None, cert
