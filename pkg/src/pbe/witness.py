"""Witness points: generic free coordinates plus certified fiber solutions.

The first ``d`` variables are free.  Each one is picked so that its height
clears the genericity threshold computed from everything chosen before it;
the remaining coordinates are produced by a triangular :class:`Step` list
(linear, quadratic, Rabinowitsch inverse, verified Newton, or given exactly).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from . import bounds
from .exactnum import LogBound, certainly_ge, format_rational, ln_enclosure, parse_rational, to_rational
from .mpoly import MPoly, height_arg, parse_poly
from .system import PolySystem
from .valuations import (
    NotVerified,
    PadicApprox,
    Place,
    RealBall,
    eval_certified,
    interval_newton_refine,
    lift,
    sqrt_certified,
    value_from_json,
    value_to_json,
)

MAX_PATTERN_DIGITS = 400
REAL_PRECISION_CAP = 1 << 18
PADIC_GUARD_DIGITS = 2
REAL_GUARD_BITS = 32


class GenericityError(ValueError):
    def __init__(self, message: str, index: int, threshold: LogBound, height: Optional[LogBound] = None):
        super().__init__(message)
        self.index = index
        self.threshold = threshold
        self.height = height


class WitnessFailure(RuntimeError):
    def __init__(self, step: str, reason: str):
        super().__init__(f"{step}: {reason}")
        self.step = step
        self.reason = reason


def pattern_integer(k: int) -> int:
    """The first ``k`` digits of 1234567890 repeated."""
    return int("".join(str((j + 1) % 10) for j in range(k)))


class StyleKind(enum.Enum):
    DECIMAL_PATTERN = "DECIMAL_PATTERN"
    PADIC_PATTERN = "PADIC_PATTERN"
    USER = "USER"
    PARAMETRIC = "PARAMETRIC"
    EXACT_POINT = "EXACT_POINT"


@dataclass(frozen=True)
class Style:
    kind: StyleKind
    values: tuple = ()

    @classmethod
    def decimal(cls) -> "Style":
        return cls(StyleKind.DECIMAL_PATTERN)

    @classmethod
    def padic(cls) -> "Style":
        return cls(StyleKind.PADIC_PATTERN)

    @classmethod
    def user(cls, values: Sequence) -> "Style":
        return cls(StyleKind.USER, tuple(to_rational(v) for v in values))

    @classmethod
    def parametric(cls) -> "Style":
        return cls(StyleKind.PARAMETRIC)

    @classmethod
    def exact_point(cls, values: Sequence) -> "Style":
        """A complete exact point; dependent coordinates become given values."""
        return cls(StyleKind.EXACT_POINT, tuple(to_rational(v) for v in values))

    @classmethod
    def default_for(cls, place: Place) -> "Style":
        return cls.decimal() if place.is_archimedean else cls.padic()


@dataclass(frozen=True)
class FreeCoordinate:
    value: Fraction
    height: LogBound
    threshold: LogBound

    def to_json(self) -> dict:
        return {"value": format_rational(self.value), "height": self.height.to_json(),
                "threshold": self.threshold.to_json()}


def choose_free_coordinate(threshold: LogBound, place: Place, style: Style, index: int = 0) -> FreeCoordinate:
    """Pick (or vet) a coordinate whose height certainly clears ``threshold``."""
    if threshold.is_neg_inf:
        raise ValueError("threshold must be finite")
    kind = style.kind
    if kind in (StyleKind.USER, StyleKind.EXACT_POINT):
        if index >= len(style.values):
            raise ValueError(f"no user value for free coordinate {index + 1}")
        v = style.values[index]
        h = ln_enclosure(height_arg([v]))
        if not certainly_ge(h, threshold):
            raise GenericityError(
                f"h(p_{index + 1}) = {float(h.lo):.6g} does not clear the threshold {float(threshold.hi):.6g}",
                index, threshold, h)
        return FreeCoordinate(v, h, threshold)
    for k in range(1, MAX_PATTERN_DIGITS + 1):
        num = pattern_integer(k)
        if kind is StyleKind.DECIMAL_PATTERN:
            if math.gcd(num, 10) != 1:
                continue
            v, arg = Fraction(num, 10 ** k), 10 ** k
        elif kind is StyleKind.PADIC_PATTERN:
            if place.is_archimedean:
                raise ValueError("PADIC_PATTERN needs a prime place")
            v = Fraction(place.p * num)
            arg = place.p * num
        else:
            raise ValueError(f"style {kind.value} does not choose single coordinates")
        h = ln_enclosure(arg)
        if certainly_ge(h, threshold):
            return FreeCoordinate(v, h, threshold)
    raise GenericityError("pattern length limit reached", index, threshold)


# ---------------------------------------------------------------------------
# recipe steps


@dataclass
class Step:
    var: int

    kind = "STEP"

    def to_json(self) -> dict:  # pragma: no cover - overridden
        raise NotImplementedError

    def inputs(self) -> set[int]:
        return set()


@dataclass
class Linear(Step):
    """Solve ``a*x + b = 0`` for ``x``."""

    a: MPoly = None
    b: MPoly = None
    kind = "LINEAR"

    def inputs(self) -> set[int]:
        return self.a.used_vars() | self.b.used_vars()

    def to_json(self) -> dict:
        return {"type": self.kind, "var": self.a.vars[self.var], "a": str(self.a), "b": str(self.b)}


@dataclass
class Quadratic(Step):
    """Solve ``a*x^2 + b*x + c = 0``.

    ``branch`` is the sign in front of the square root at the real place, and
    the residue class of the root mod p at a p-adic place.
    """

    a: MPoly = None
    b: MPoly = None
    c: MPoly = None
    branch: Optional[int] = None
    kind = "QUADRATIC"

    def inputs(self) -> set[int]:
        return self.a.used_vars() | self.b.used_vars() | self.c.used_vars()

    def to_json(self) -> dict:
        return {"type": self.kind, "var": self.a.vars[self.var], "a": str(self.a), "b": str(self.b),
                "c": str(self.c), "branch": self.branch}


@dataclass
class Rabinowitsch(Step):
    """``x = -1/h`` so that ``1 + x*h = 0``."""

    h: MPoly = None
    kind = "RABINOWITSCH_INVERSE"

    def inputs(self) -> set[int]:
        return self.h.used_vars()

    def to_json(self) -> dict:
        return {"type": self.kind, "var": self.h.vars[self.var], "h": str(self.h)}


@dataclass
class Newton(Step):
    """Square subsystem solved by verified interval Newton from a rational box."""

    vars_: tuple = ()
    polys: list = field(default_factory=list)
    box: list = field(default_factory=list)
    kind = "NEWTON"

    def inputs(self) -> set[int]:
        out = set()
        for p in self.polys:
            out |= p.used_vars()
        return out - set(self.vars_)

    def to_json(self) -> dict:
        names = self.polys[0].vars
        return {"type": self.kind, "vars": [names[i] for i in self.vars_], "polys": [str(p) for p in self.polys],
                "box": [[format_rational(lo), format_rational(hi)] for lo, hi in self.box]}


@dataclass
class Given(Step):
    """An exactly known coordinate (used by exact witnesses)."""

    value: Fraction = Fraction(0)
    name: str = ""
    kind = "GIVEN"

    def to_json(self) -> dict:
        return {"type": self.kind, "var": self.name, "value": format_rational(self.value)}


def step_from_json(obj: dict, vars: Sequence[str]) -> Step:
    vars = tuple(vars)
    t = obj["type"]
    if t == "NEWTON":
        idx = tuple(vars.index(v) for v in obj["vars"])
        return Newton(idx[0], vars_=idx, polys=[parse_poly(s, vars) for s in obj["polys"]],
                      box=[(parse_rational(a), parse_rational(b)) for a, b in obj["box"]])
    i = vars.index(obj["var"])
    if t == "LINEAR":
        return Linear(i, parse_poly(obj["a"], vars), parse_poly(obj["b"], vars))
    if t == "QUADRATIC":
        return Quadratic(i, parse_poly(obj["a"], vars), parse_poly(obj["b"], vars), parse_poly(obj["c"], vars),
                         None if obj.get("branch") is None else int(obj["branch"]))
    if t == "RABINOWITSCH_INVERSE":
        return Rabinowitsch(i, parse_poly(obj["h"], vars))
    if t == "GIVEN":
        return Given(i, parse_rational(obj["value"]), obj["var"])
    raise ValueError(f"unknown recipe step {t!r}")


def infer_recipe(system: PolySystem, d: Optional[int] = None, place: Optional[Place] = None) -> Optional[list[Step]]:
    """Greedy triangular recipe solving variables ``d..n-1`` in order.

    Each variable takes the first unused polynomial of degree 1 or 2 in it
    whose other variables are already solved.  Returns ``None`` when the
    system is not triangular in this order.
    """
    d = system.dim if d is None else d
    solved = set(range(d))
    used: set[int] = set()
    steps: list[Step] = []
    for var in range(d, system.n):
        best = None
        for j, f in enumerate(system.f):
            if j in used:
                continue
            k = f.degree_in(var)
            if k not in (1, 2) or not f.used_vars() <= solved | {var}:
                continue
            if best is None or k < best[1]:
                best = (j, k)
        if best is None:
            return None
        j, k = best
        used.add(j)
        coeffs = system.f[j].univariate_coeffs(var)
        zero = MPoly.zero(system.vars)
        c0, c1, c2 = coeffs.get(0, zero), coeffs.get(1, zero), coeffs.get(2, zero)
        if k == 1:
            if c0 == 1 and not c1.is_constant():
                steps.append(Rabinowitsch(var, c1))
            else:
                steps.append(Linear(var, c1, c0))
        else:
            steps.append(Quadratic(var, c2, c1, c0))
        solved.add(var)
    return steps


# ---------------------------------------------------------------------------
# fiber solving


def _mod_p(x, p: int) -> int:
    if isinstance(x, PadicApprox):
        return x.residue % p
    q = to_rational(x)
    if q.denominator % p == 0:
        raise WitnessFailure("reduction mod p", f"{q} is not {p}-integral")
    return q.numerator * pow(q.denominator, -1, p) % p


def _is_zero(x) -> bool:
    if isinstance(x, RealBall):
        return x.contains_zero()
    if isinstance(x, PadicApprox):
        return x.residue % x.p == 0
    return to_rational(x) == 0


def _divide(num, den, place: Place, precision: int):
    if _is_zero(den):
        raise WitnessFailure("divide", "divisor not certified non-zero" if not place.is_archimedean or
                             isinstance(den, RealBall) else "division by zero")
    if isinstance(num, Fraction) and isinstance(den, Fraction):
        return num / den
    if isinstance(den, Fraction):
        den = lift(den, place, precision)
    return num * den.reciprocal()


def resolve_branch(step: Step, point: list, place: Place, precision: int) -> Step:
    """Fix an unset quadratic branch: ``+1`` at the real place, else the least root class mod p."""
    if not isinstance(step, Quadratic) or step.branch is not None:
        return step
    if place.is_archimedean:
        branch = 1
    else:
        p = place.p
        A, B, C = (_mod_p(eval_certified(q, point, place, precision), p) for q in (step.a, step.b, step.c))
        roots = [r for r in range(1, p) if (A * r * r + B * r + C) % p == 0 and (2 * A * r + B) % p]
        if not roots:
            raise WitnessFailure(f"QUADRATIC step for variable #{step.var}", f"no simple non-zero root mod {p}")
        branch = roots[0]
    return Quadratic(step.var, step.a, step.b, step.c, branch)


def run_step(step: Step, point: list, place: Place, precision: int):
    name = f"{step.kind} step for variable #{step.var}"
    ev = lambda p: eval_certified(p, point, place, precision)  # noqa: E731
    if isinstance(step, Given):
        return {step.var: step.value}
    if isinstance(step, Linear):
        return {step.var: _divide(-ev(step.b), ev(step.a), place, precision)}
    if isinstance(step, Rabinowitsch):
        return {step.var: _divide(Fraction(-1), ev(step.h), place, precision)}
    if isinstance(step, Quadratic):
        A, B, C = ev(step.a), ev(step.b), ev(step.c)
        if _is_zero(A):
            raise WitnessFailure(name, "leading coefficient not certified non-zero")
        disc = B * B - 4 * A * C
        if place.is_archimedean:
            s_branch = step.branch
        else:
            p = place.p
            s_branch = (2 * _mod_p(A, p) * step.branch + _mod_p(B, p)) % p
            if s_branch == 0:
                raise WitnessFailure(name, "double root mod p: Hensel lifting does not apply")
        try:
            s = sqrt_certified(disc, place, s_branch, precision)
        except ValueError as exc:
            raise WitnessFailure(name, str(exc)) from exc
        return {step.var: _divide(s - B, 2 * A, place, precision)}
    if isinstance(step, Newton):
        if not place.is_archimedean:
            raise WitnessFailure(name, "Newton steps are real only")
        exact = {}
        for i in step.inputs():
            x = point[i]
            if not isinstance(x, Fraction):
                raise WitnessFailure(name, "Newton steps need exact values for earlier coordinates")
            exact[i] = x
        sub_vars = [step.polys[0].vars[i] for i in step.vars_]
        F = []
        for p in step.polys:
            q = p.substitute(exact)
            terms = {tuple(e[i] for i in step.vars_): c for e, c in q.terms.items()}
            F.append(MPoly(sub_vars, terms))
        box = [RealBall.from_interval(lo, hi, precision) for lo, hi in step.box]
        try:
            out = interval_newton_refine(F, box, precision)
        except NotVerified as exc:
            raise WitnessFailure(name, str(exc)) from exc
        return dict(zip(step.vars_, out))
    raise TypeError(f"unknown step {step!r}")


@dataclass
class Witness:
    vars: tuple
    place: Place
    precision: int
    free: list[FreeCoordinate]
    recipe: list[Step]
    values: list
    residuals: list = field(default_factory=list)

    @property
    def free_values(self) -> list[Fraction]:
        return [c.value for c in self.free]

    def is_exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.values)

    def to_json(self) -> dict:
        return {
            "place": str(self.place),
            "precision": self.precision,
            "free": [c.to_json() for c in self.free],
            "recipe": [s.to_json() for s in self.recipe],
            "values": [value_to_json(v) for v in self.values],
        }

    @staticmethod
    def values_from_json(obj: dict) -> list:
        return [value_from_json(v) for v in obj["values"]]


def solve_fiber(system: PolySystem, free: Sequence[FreeCoordinate], recipe: Sequence[Step],
                place: Place, precision: int) -> Witness:
    """Run ``recipe`` after the free coordinates and attach residual enclosures of the f_i."""
    point: list = [None] * system.n
    for i, c in enumerate(free):
        point[i] = c.value
    solved_steps: list[Step] = []
    for step in recipe:
        missing = [i for i in step.inputs() if point[i] is None]
        if missing:
            raise WitnessFailure(f"{step.kind} step", f"uses unsolved variables {missing}")
        step = resolve_branch(step, point, place, precision)
        solved_steps.append(step)
        for i, v in run_step(step, point, place, precision).items():
            point[i] = v
    unsolved = [system.vars[i] for i, v in enumerate(point) if v is None]
    if unsolved:
        raise WitnessFailure("recipe", f"does not cover {unsolved}")
    residuals = [eval_certified(f, point, place, precision) for f in system.f]
    return Witness(system.vars, place, precision, list(free), solved_steps, point, residuals)


# ---------------------------------------------------------------------------
# precision policy and autopilot


def precision_for(log_eps: LogBound, place: Place) -> int:
    """Working precision that can resolve ``eps``: bits at the real place, digits at a prime."""
    if log_eps.is_neg_inf:
        raise ValueError("eps = 0 cannot be resolved")
    need = max(-log_eps.lo, Fraction(0))
    if place.is_archimedean:
        ln2 = ln_enclosure(2)
        return max(64, math.ceil(need / ln2.lo) + REAL_GUARD_BITS)
    lnp = place.ln_p()
    return max(1, math.ceil(need / lnp.lo) + PADIC_GUARD_DIGITS)


def precision_cap(place: Place) -> int:
    if place.is_archimedean:
        return REAL_PRECISION_CAP
    return math.ceil(REAL_PRECISION_CAP * 0.6931471805599453 / math.log(place.p))


ThresholdFn = Callable[[int, list], LogBound]


def chain_threshold_fn(system: PolySystem, ctx: "bounds.BoundContext", chain: str) -> ThresholdFn:
    """Threshold for coordinate ``i`` (1-based) given the earlier chosen values."""

    def fn(i: int, prev: list, bits: int = 128) -> LogBound:
        if chain == "weak":
            return bounds.genericity_threshold_weak(ctx, system.height_with(prev, True, bits), i, bits)
        if chain == "main":
            return bounds.genericity_threshold_main(ctx, system.height_with(prev, True, bits), bits)
        if chain == "f_only":
            return bounds.genericity_threshold_f_only(ctx, system.height_with(prev, False, bits), bits)
        raise ValueError(f"unknown chain {chain!r}")

    return fn


def choose_free_coordinates(system: PolySystem, threshold_fn: ThresholdFn, place: Place, style: Style) -> list[FreeCoordinate]:
    chosen: list[FreeCoordinate] = []
    for i in range(1, system.dim + 1):
        t = threshold_fn(i, [c.value for c in chosen])
        chosen.append(choose_free_coordinate(t, place, style, i - 1))
    return chosen


def parametric_point(system: PolySystem, threshold_fn: ThresholdFn, max_digits: int = 200) -> tuple[list[FreeCoordinate], list[Fraction]]:
    """Exact point ``rho(t)`` with pattern parameters long enough for the chain."""
    rho = system.parametrization
    if rho is None:
        raise WitnessFailure("parametric", "system has no parametrization")
    r = len(rho.params)
    ks = [1 + 2 * j for j in range(r)]
    while ks[-1] <= max_digits:
        t = [Fraction(pattern_integer(k), 10 ** k) for k in ks]
        P = rho.evaluate(t)
        if P is None:
            ks[-1] += 1
            continue
        if any(f.eval_exact(P) != 0 for f in system.f):
            raise WitnessFailure("parametric", "parametrization does not land on X")
        free = []
        failed = None
        for i in range(1, system.dim + 1):
            thr = threshold_fn(i, P[: i - 1])
            h = ln_enclosure(height_arg([P[i - 1]]))
            if not certainly_ge(h, thr):
                failed = i
                break
            free.append(FreeCoordinate(P[i - 1], h, thr))
        if failed is None:
            return free, P
        # lengthen the parameter feeding the failing coordinate, keep later ones longer
        j = min(failed, r) - 1
        ks[j] += 1
        for q in range(j + 1, r):
            ks[q] = max(ks[q], ks[q - 1] + 2)
    raise WitnessFailure("parametric", "no parameter value met the genericity chain")


def exact_recipe(system: PolySystem, point: Sequence[Fraction]) -> list[Step]:
    return [Given(i, to_rational(point[i]), system.vars[i]) for i in range(system.dim, system.n)]


def build_witness(system: PolySystem, threshold_fn: ThresholdFn, place: Place, style: Style,
                  precision: int, recipe: Optional[list[Step]] = None) -> Witness:
    """Choose free coordinates by ``style`` and solve the fiber at ``precision``."""
    if style.kind is StyleKind.PARAMETRIC:
        free, P = parametric_point(system, threshold_fn)
        return solve_fiber(system, free, exact_recipe(system, P), place, precision)
    if style.kind is StyleKind.EXACT_POINT:
        if len(style.values) != system.n:
            raise ValueError("EXACT_POINT needs all n coordinates")
        free = choose_free_coordinates(system, threshold_fn, place, style)
        return solve_fiber(system, free, exact_recipe(system, style.values), place, precision)
    free = choose_free_coordinates(system, threshold_fn, place, style)
    recipe = recipe if recipe is not None else (system.recipe or infer_recipe(system))
    if recipe is None:
        raise WitnessFailure("recipe", "construction is not triangular; supply a witness or a NEWTON step")
    return solve_fiber(system, free, recipe, place, precision)


def autopilot(system: PolySystem, ctx: "bounds.BoundContext", style: Optional[Style] = None,
              chain: str = "weak", precision: Optional[int] = None) -> Witness:
    """Free coordinates along the chain, then the fiber at the precision ``eps`` requires."""
    place = ctx.place
    style = style or Style.default_for(place)
    fn = chain_threshold_fn(system, ctx, chain)
    if precision is None:
        probe_free = (parametric_point(system, fn)[0] if style.kind is StyleKind.PARAMETRIC
                      else choose_free_coordinates(system, fn, place, style))
        H_full = system.height_with([c.value for c in probe_free], True)
        precision = precision_for(bounds.epsilon_main(ctx, H_full), place)
    if precision > precision_cap(place):
        raise WitnessFailure("precision", f"required precision {precision} exceeds the cap {precision_cap(place)}")
    return build_witness(system, fn, place, style, precision)
