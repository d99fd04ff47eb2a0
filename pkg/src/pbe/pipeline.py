"""Certification procedures and self-contained certificates.

* :func:`certify_identity` -- one generic example proves ``g`` vanishes on X;
* :func:`dichotomy_decide` -- decides ``g|_X = 0`` or ``g|_X != 0``;
* :func:`dimension_by_example` -- certifies ``dim X = d`` via a determinant;
* :func:`prove_zero_ambient` -- exact Kronecker/Cauchy test in affine space.

Every procedure returns a :class:`Certificate` that records all inputs needed
to recompute it; :func:`verify_certificate` re-runs the procedure from the
certificate alone and demands an identical result.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from . import __version__
from .bounds import (
    BoundContext,
    ThresholdReport,
    cauchy_threshold,
    dichotomy_thresholds,
    dimension_thresholds,
    epsilon_main,
    epsilon_pq,
    epsilon_reducible,
)
from .exactnum import (
    NEG_INFINITY,
    Cmp,
    LogBound,
    compare_certain,
    format_rational,
    ln_enclosure,
    lb_max,
    parse_rational,
    to_rational,
)
from .mpoly import MPoly, height_arg, kronecker_substitute, parse_poly
from .system import PolySystem
from .valuations import (
    PadicApprox,
    Place,
    RealBall,
    Tri,
    det_certified,
    eval_certified,
    norm_geq,
    norm_leq,
    norm_upper_bound,
    rational_valuation,
    value_to_json,
)
from .witness import (
    FreeCoordinate,
    Style,
    StyleKind,
    Witness,
    WitnessFailure,
    chain_threshold_fn,
    choose_free_coordinates,
    infer_recipe,
    parametric_point,
    exact_recipe,
    precision_cap,
    precision_for,
    solve_fiber,
    step_from_json,
)

SCHEMA = "pbe-certificate/1"
DEFAULT_ESCALATIONS = 2

# verdicts that count as a definitive outcome (exit code 0 on the command line)
DEFINITIVE = {"PROVED", "CASE1", "CASE2", "DIM_CONFIRMED", "DISPROVED"}


class PipelineError(ValueError):
    pass


@dataclass
class Certificate:
    data: dict

    @property
    def verdict(self) -> str:
        return self.data["verdict"]

    @property
    def reason(self) -> Optional[str]:
        return self.data.get("reason")

    @property
    def definitive(self) -> bool:
        return self.verdict in DEFINITIVE

    def to_json(self) -> dict:
        return self.data

    def dumps(self) -> str:
        return json.dumps(self.data, indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Certificate":
        return cls(json.loads(text))


@dataclass
class ExplicitWitness:
    """Free values, a recipe and a precision: everything needed to rebuild a witness."""

    free_values: list
    recipe: list
    precision: int

    @classmethod
    def of(cls, w: Witness) -> "ExplicitWitness":
        return cls(w.free_values, w.recipe, w.precision)


WitnessArg = Union[None, Style, Witness, ExplicitWitness]


# ---------------------------------------------------------------------------
# shared pieces


def _header(procedure: str, system: PolySystem, place: Place, R: Fraction, chain: str) -> dict:
    return {
        "schema": SCHEMA,
        "tool": f"pbe {__version__}",
        "procedure": procedure,
        "system": system.to_json(),
        "place": str(place),
        "R": format_rational(R),
        "chain": chain,
    }


def _integral_at(system: PolySystem, place: Place) -> PolySystem:
    """At a prime place, clear denominators divisible by p from f_i and g.

    V(f) and the question ``g in I(X)`` are unchanged, and the p-adic backend
    only handles p-integral data.  The certificate records the rescaled system.
    """
    if place.is_archimedean:
        return system
    p = place.p

    def bad(q: MPoly) -> bool:
        return any(c.denominator % p == 0 for c in q.coefficients())

    if not any(bad(q) for q in list(system.f) + [system.g]):
        return system
    f = [q.clear_denominators()[0] if bad(q) else q for q in system.f]
    g = system.g.clear_denominators()[0] if bad(system.g) else system.g
    return PolySystem(system.vars, f, g, system.dim, system.irreducible, system.parametrization)


def _irreducible(system: PolySystem) -> bool:
    # with no equations X is affine space, which is irreducible
    return system.irreducible or not system.f


def _assumptions(system: PolySystem) -> list[str]:
    out = [f"dim {system.dim}"]
    if system.irreducible:
        out.append("irreducible (asserted)")
    elif not system.f:
        out.append("irreducible (affine space)")
    else:
        out.append("irreducibility not asserted")
    return out


def _chain_checks(system: PolySystem, ctx: BoundContext, chain: str, values: Sequence[Fraction]) -> list[dict]:
    fn = chain_threshold_fn(system, ctx, chain)
    checks = []
    for i, v in enumerate(values, 1):
        prev = list(values[: i - 1])
        arg = height_arg([v])
        thr = fn(i, prev)
        h = ln_enclosure(arg)
        res = compare_certain(h, thr, refiner=lambda b, i=i, prev=prev, arg=arg: (ln_enclosure(arg, b), fn(i, prev, b)))
        checks.append({
            "name": f"h(p_{i}) >= threshold",
            "value": format_rational(v),
            "height": h.to_json(),
            "threshold": thr.to_json(),
            "result": "GE" if res in (Cmp.GE, Cmp.EQ) else res.value,
        })
    return checks


def _radius_ok(values: Sequence, place: Place, R: Fraction) -> bool:
    for x in values:
        if place.is_archimedean:
            mag = x.abs_max() if isinstance(x, RealBall) else abs(to_rational(x))
            if mag > R:
                return False
        else:
            if isinstance(x, PadicApprox):
                continue
            q = to_rational(x)
            v = rational_valuation(q, place.p)
            if v is not None and v < 0 and Fraction(place.p) ** (-v) > R:
                return False
    return True


def _resolve_witness(system: PolySystem, ctx: BoundContext, chain: str, witness: WitnessArg,
                     default_style: Style):
    """Free values, recipe and fixed precision (or ``None``) from the witness argument."""
    place = ctx.place
    if isinstance(witness, Witness):
        return witness.free_values, witness.recipe, witness.precision
    if isinstance(witness, ExplicitWitness):
        return list(witness.free_values), list(witness.recipe), witness.precision
    style = witness or default_style
    fn = chain_threshold_fn(system, ctx, chain)
    if style.kind is StyleKind.PARAMETRIC:
        free, P = parametric_point(system, fn)
        return [c.value for c in free], exact_recipe(system, P), None
    if style.kind is StyleKind.EXACT_POINT:
        if len(style.values) != system.n:
            raise PipelineError("EXACT_POINT needs all n coordinates")
        return list(style.values[: system.dim]), exact_recipe(system, style.values), None
    if style.kind is StyleKind.USER:
        values = list(style.values)
        if len(values) != system.dim:
            raise PipelineError(f"expected {system.dim} free values, got {len(values)}")
    else:
        values = [c.value for c in choose_free_coordinates(system, fn, place, style)]
    recipe = system.recipe if system.recipe is not None else infer_recipe(system)
    return values, recipe, None


def _free_coords(checks: list[dict]) -> list[FreeCoordinate]:
    return [FreeCoordinate(parse_rational(c["value"]), LogBound.from_json(c["height"]),
                           LogBound.from_json(c["threshold"])) for c in checks]


def _solve(system, checks, recipe, place, precision):
    if recipe is None:
        raise WitnessFailure("recipe", "construction is not triangular; supply an exact witness")
    return solve_fiber(system, _free_coords(checks), recipe, place, precision)


def _witness_json(checks, recipe, precision, place, values=None) -> dict:
    out = {
        "place": str(place),
        "precision": precision,
        "free": [c["value"] for c in checks],
        "recipe": [s.to_json() for s in recipe] if recipe is not None else None,
    }
    if values is not None:
        out["values"] = [value_to_json(v) for v in values]
    return out


def _tri_json(name: str, t: Tri) -> dict:
    return {"name": name, "result": t.value}


def _lb(x: LogBound) -> dict:
    return x.to_json()


# ---------------------------------------------------------------------------
# identity


def certify_identity(system: PolySystem, place: Place = Place(), R=1, witness: WitnessArg = None,
                     chain: str = "weak", escalations: int = DEFAULT_ESCALATIONS,
                     precision: Optional[int] = None) -> Certificate:
    """Prove ``g`` vanishes on X from one witness, or report INCONCLUSIVE.

    Never disproves.  Without asserted irreducibility the strongest available
    conclusion is COMPONENT_PROVED (g vanishes on a d-dimensional component
    near the witness).
    """
    R = to_rational(R)
    if R < 1:
        raise PipelineError("R must be >= 1")
    system = _integral_at(system, place)
    ctx = BoundContext.for_system(system.f, system.g, system.dim, R, place, nvars=system.n)
    data = _header("certify_identity", system, place, R, chain)
    data["context"] = ctx.to_json()
    values, recipe, fixed_prec = _resolve_witness(system, ctx, chain, witness, Style.default_for(place))
    checks = _chain_checks(system, ctx, chain, values)
    H_full = system.height_with(values, True)
    log_eps = epsilon_main(ctx, H_full)
    report = ThresholdReport(chain, [LogBound.from_json(c["threshold"]) for c in checks], log_eps,
                             {"H_full": H_full})
    data["thresholds"] = report.to_json()
    precision = fixed_prec or precision or precision_for(log_eps, place)
    cap = precision_cap(place)
    allowed = escalations if fixed_prec is None else 0

    def finish(verdict: str, reason: Optional[str], wjson: dict, evaluations: Optional[dict], extra=None):
        data["witness"] = wjson
        data["genericity"] = checks
        data["evaluations"] = evaluations
        if extra:
            data["constants"] = extra
        data["verdict"] = verdict
        data["reason"] = reason
        data["assumptions"] = _assumptions(system)
        return Certificate(data)

    failed = next((c for c in checks if c["result"] != "GE"), None)
    if failed is not None:
        return finish("INCONCLUSIVE", f"genericity check failed: {failed['name']} ({failed['result']})",
                      _witness_json(checks, recipe, precision, place), None)

    attempt = 0
    while True:
        try:
            w = _solve(system, checks, recipe, place, min(precision, cap))
        except WitnessFailure as exc:
            return finish("INCONCLUSIVE", f"witness construction failed: {exc}",
                          _witness_json(checks, recipe, precision, place), None)
        if not _radius_ok(w.values, place, R):
            raise PipelineError(f"witness lies outside the ball |P|_v <= {R}")
        if precision > cap and not w.is_exact():
            return finish("INCONCLUSIVE", f"precision {precision} exceeds the cap {cap}",
                          _witness_json(checks, recipe, precision, place), None)
        f_vals = w.residuals
        g_val = eval_certified(system.g, w.values, place, w.precision)
        evaluations = {"f": [value_to_json(v) for v in f_vals], "g": value_to_json(g_val)}
        wjson = _witness_json(checks, w.recipe, w.precision, place, w.values)
        exact = all(isinstance(v, Fraction) and v == 0 for v in f_vals + [g_val])
        if exact:
            evaluations["checks"] = [{"name": "f_i(P) = g(P) = 0 exactly", "result": "YES"}]
            if _irreducible(system):
                return finish("PROVED", None, wjson, evaluations)
            break_vals = (f_vals, g_val)
            break
        results = [norm_leq(v, log_eps, place) for v in f_vals] + [norm_leq(g_val, log_eps, place)]
        names = [f"|f_{i + 1}(P)|_v <= eps" for i in range(len(f_vals))] + ["|g(P)|_v <= eps"]
        evaluations["checks"] = [_tri_json(n, t) for n, t in zip(names, results)]
        if all(t is Tri.YES for t in results):
            if _irreducible(system):
                return finish("PROVED", None, wjson, evaluations)
            break_vals = (f_vals, g_val)
            break
        if any(t is Tri.UNKNOWN for t in results) and attempt < allowed and precision * 2 <= cap:
            attempt += 1
            precision *= 2
            continue
        bad = next(n for n, t in zip(names, results) if t is not Tri.YES)
        return finish("INCONCLUSIVE", f"tolerance check not certified: {bad}", wjson, evaluations)

    f_vals, g_val = break_vals
    worst = NEG_INFINITY
    for v in list(f_vals) + [g_val]:
        worst = lb_max(worst, norm_upper_bound(v, place))
    eps_prime = epsilon_reducible(ctx, H_full, worst)
    return finish("COMPONENT_PROVED", "irreducibility not asserted: g vanishes on a component near P",
                  wjson, evaluations, {"log_eps_prime": _lb(eps_prime)})


# ---------------------------------------------------------------------------
# dichotomy


def _default_exact_style(system: PolySystem, place: Place) -> Style:
    return Style.parametric() if system.parametrization is not None else Style.default_for(place)


def dichotomy_decide(system: PolySystem, place: Place = Place(), R=1, witness: WitnessArg = None,
                     escalations: int = DEFAULT_ESCALATIONS, precision: Optional[int] = None) -> Certificate:
    """Decide between ``g|_X = 0`` (CASE1) and ``g|_X != 0`` (CASE2)."""
    R = to_rational(R)
    if R < 1:
        raise PipelineError("R must be >= 1")
    system = _integral_at(system, place)
    chain = "f_only"
    data = _header("dichotomy", system, place, R, chain)
    if system.g.is_zero():
        data.update({"witness": None, "verdict": "CASE1", "reason": "g is the zero polynomial",
                     "assumptions": _assumptions(system)})
        return Certificate(data)
    deg_g = max(system.g.degree(), 1)
    ctx = BoundContext(system.n, system.m, system.dim, tuple(f.degree_or_none() or 0 for f in system.f), deg_g,
                       ln_enclosure(R) if R != 1 else LogBound.exact(0), place)
    data["context"] = ctx.to_json()

    def finish(verdict, reason, wjson, evaluations):
        data["witness"] = wjson
        data["genericity"] = checks
        data["evaluations"] = evaluations
        data["verdict"] = verdict
        data["reason"] = reason
        data["assumptions"] = _assumptions(system)
        return Certificate(data)

    values, recipe, fixed_prec = _resolve_witness(system, ctx, chain, witness, _default_exact_style(system, place))
    checks = _chain_checks(system, ctx, chain, values)
    H = ln_enclosure(system.height_arg_with(values, include_g=False) * system.g_height_arg())
    eps_f, eps_g = dichotomy_thresholds(ctx, H)
    log_2eps_g = eps_g + ln_enclosure(2)
    data["thresholds"] = ThresholdReport(chain, [LogBound.from_json(c["threshold"]) for c in checks], None,
                                         {"H": H, "log_eps_f": eps_f, "log_eps_g": eps_g}).to_json()
    precision = fixed_prec or precision or precision_for(eps_f, place)
    cap = precision_cap(place)
    if not _irreducible(system):
        return finish("INCONCLUSIVE", "irreducibility not asserted", _witness_json(checks, recipe, precision, place), None)
    failed = next((c for c in checks if c["result"] != "GE"), None)
    if failed is not None:
        return finish("INCONCLUSIVE", f"genericity check failed: {failed['name']} ({failed['result']})",
                      _witness_json(checks, recipe, precision, place), None)
    allowed = escalations if fixed_prec is None else 0
    attempt = 0
    while True:
        try:
            w = _solve(system, checks, recipe, place, min(precision, cap))
        except WitnessFailure as exc:
            return finish("INCONCLUSIVE", f"witness construction failed: {exc}",
                          _witness_json(checks, recipe, precision, place), None)
        if not _radius_ok(w.values, place, R):
            raise PipelineError(f"witness lies outside the ball |P|_v <= {R}")
        wjson = _witness_json(checks, w.recipe, w.precision, place, w.values)
        if precision > cap and not w.is_exact():
            return finish("INCONCLUSIVE", f"precision for eps_f ({precision}) exceeds the cap {cap}", wjson, None)
        g_val = eval_certified(system.g, w.values, place, w.precision)
        f_res = [norm_leq(v, eps_f, place) for v in w.residuals]
        evaluations = {"f": [value_to_json(v) for v in w.residuals], "g": value_to_json(g_val)}
        checks_out = [_tri_json(f"|f_{i + 1}(P)|_v <= eps_f", t) for i, t in enumerate(f_res)]
        le = norm_leq(g_val, eps_g, place)
        ge = norm_geq(g_val, log_2eps_g, place)
        checks_out += [_tri_json("|g(P)|_v <= eps_g", le), _tri_json("|g(P)|_v >= 2 eps_g", ge)]
        evaluations["checks"] = checks_out
        unknown = any(t is Tri.UNKNOWN for t in f_res) or (le is not Tri.YES and ge is not Tri.YES)
        if unknown and attempt < allowed and precision * 2 <= cap:
            attempt += 1
            precision *= 2
            continue
        if not all(t is Tri.YES for t in f_res):
            return finish("INCONCLUSIVE", "eps_f precondition not certified", wjson, evaluations)
        if le is Tri.YES:
            return finish("CASE1", None, wjson, evaluations)
        if ge is Tri.YES:
            return finish("CASE2", None, wjson, evaluations)
        return finish("INCONCLUSIVE", "|g(P)|_v not separated from [eps_g, 2 eps_g]", wjson, evaluations)


# ---------------------------------------------------------------------------
# dimension


def dimension_by_example(system: PolySystem, d: Optional[int] = None, place: Place = Place(), R=1,
                         witness: WitnessArg = None, selection: Optional[Sequence[int]] = None,
                         all_permutations: bool = False, escalations: int = DEFAULT_ESCALATIONS,
                         precision: Optional[int] = None) -> Certificate:
    """Certify ``dim X = d`` through ``|det(e_1..e_d, grad f_sel(P))|_v > eps_det``."""
    R = to_rational(R)
    if R < 1:
        raise PipelineError("R must be >= 1")
    system = _integral_at(system, place)
    d = system.dim if d is None else d
    n, m = system.n, system.m
    if d != system.dim:
        system = PolySystem(system.vars, system.f, system.g, d, system.irreducible, system.parametrization,
                            system.recipe, system.g_height_bound)
    if m < n - d:
        raise PipelineError(f"need at least n - d = {n - d} polynomials")
    if selection is None:
        selection = list(range(n - d))
    selection = list(selection)
    if len(selection) != n - d:
        raise PipelineError(f"selection must name n - d = {n - d} polynomials")
    chain = "f_only"
    data = _header("dimension", system, place, R, chain)
    data["d"] = d
    data["selection"] = selection
    data["all_permutations"] = all_permutations
    ctx = BoundContext(n, m, d, tuple(f.degree_or_none() or 0 for f in system.f), None,
                       ln_enclosure(R) if R != 1 else LogBound.exact(0), place)
    data["context"] = ctx.to_json()

    def finish(verdict, reason, wjson, evaluations, extra=None):
        data["witness"] = wjson
        data["genericity"] = checks
        data["evaluations"] = evaluations
        if extra:
            data["constants"] = extra
        data["verdict"] = verdict
        data["reason"] = reason
        data["assumptions"] = _assumptions(system)
        return Certificate(data)

    values, recipe, fixed_prec = _resolve_witness(system, ctx, chain, witness, _default_exact_style(system, place))
    checks = _chain_checks(system, ctx, chain, values)
    H = system.height_with(values, include_g=False)
    eps_f, eps_det = dimension_thresholds(ctx, H)
    data["thresholds"] = ThresholdReport(chain, [LogBound.from_json(c["threshold"]) for c in checks], None,
                                         {"H": H, "log_eps_f_prime": eps_f, "log_eps_det": eps_det}).to_json()
    precision = fixed_prec or precision or precision_for(eps_f if m else eps_det, place)
    cap = precision_cap(place)
    failed = next((c for c in checks if c["result"] != "GE"), None)
    if failed is not None:
        return finish("INCONCLUSIVE", f"genericity check failed: {failed['name']} ({failed['result']})",
                      _witness_json(checks, recipe, precision, place), None)
    allowed = escalations if fixed_prec is None else 0
    attempt = 0
    grads = [[f.partial_derivative(j) for j in range(n)] for f in system.f]
    if all_permutations:
        selections = [list(s) for s in itertools.combinations(range(m), n - d)]
    else:
        selections = [selection]
    while True:
        try:
            w = _solve(system, checks, recipe, place, min(precision, cap))
        except WitnessFailure as exc:
            return finish("INCONCLUSIVE", f"witness construction failed: {exc}",
                          _witness_json(checks, recipe, precision, place), None)
        if not _radius_ok(w.values, place, R):
            raise PipelineError(f"witness lies outside the ball |P|_v <= {R}")
        wjson = _witness_json(checks, w.recipe, w.precision, place, w.values)
        if precision > cap and not w.is_exact():
            return finish("INCONCLUSIVE", f"precision for eps_f' ({precision}) exceeds the cap {cap}", wjson, None)
        f_res = [norm_leq(v, eps_f, place) for v in w.residuals]
        evaluations = {"f": [value_to_json(v) for v in w.residuals]}
        checks_out = [_tri_json(f"|f_{i + 1}(P)|_v <= eps_f'", t) for i, t in enumerate(f_res)]
        dets = []
        for sel in selections:
            rows = [[Fraction(int(i == j)) for j in range(n)] for i in range(d)]
            for k in sel:
                rows.append([eval_certified(grads[k][j], w.values, place, w.precision) for j in range(n)])
            det = det_certified(rows)
            res = norm_geq(det, eps_det, place, strict=True)
            dets.append({"selection": sel, "det": value_to_json(det), "result": res.value})
        evaluations["determinants"] = dets
        evaluations["checks"] = checks_out
        unknown = any(t is Tri.UNKNOWN for t in f_res) or all(x["result"] == "UNKNOWN" for x in dets)
        if unknown and attempt < allowed and precision * 2 <= cap:
            attempt += 1
            precision *= 2
            continue
        if not all(t is Tri.YES for t in f_res):
            return finish("INCONCLUSIVE", "eps_f' precondition not certified", wjson, evaluations)
        good = [x for x in dets if x["result"] == "YES"]
        extra = {"all_selections_hold": len(good) == len(dets)} if all_permutations else None
        if not good:
            return finish("INCONCLUSIVE", "determinant not certified above eps_det", wjson, evaluations, extra)
        if _irreducible(system):
            return finish("DIM_CONFIRMED", None, wjson, evaluations, extra)
        eps_comp = epsilon_pq(ctx, H, eps_f)
        extra = dict(extra or {})
        extra["log_eps_pq"] = _lb(eps_comp)
        return finish("DIM_COMPONENT", "irreducibility not asserted: X has a d-dimensional component near P",
                      wjson, evaluations, extra)


# ---------------------------------------------------------------------------
# ambient space


def prove_zero_ambient(g: MPoly) -> Certificate:
    """Decide ``g = 0`` exactly: Kronecker substitution, then one integer evaluation.

    After clearing denominators, ``g_kr(z) = g(z, z^D, z^(D^2), ...)`` is
    evaluated at the least power of ten ``p`` above the Cauchy bound
    ``1 + e^h(g)``; a non-zero polynomial cannot vanish there.
    """
    g_int, b = g.clear_denominators()
    g_kr, D = kronecker_substitute(g_int)
    threshold = cauchy_threshold(g_kr)
    p = 10
    while p < threshold:
        p *= 10
    value = g_kr.eval_exact([p])
    data = {
        "schema": SCHEMA,
        "tool": f"pbe {__version__}",
        "procedure": "kronecker",
        "vars": list(g.vars),
        "g": str(g),
        "denominator_factor": str(b),
        "D": D,
        "g_kr": str(g_kr),
        "threshold": str(threshold),
        "p": str(p),
        "value": format_rational(value),
        "verdict": "PROVED" if value == 0 else "DISPROVED",
        "reason": None if value == 0 else f"g_kr({p}) = {value} != 0",
    }
    return Certificate(data)


# ---------------------------------------------------------------------------
# verification


def _explicit_from_json(wjson: dict, vars) -> ExplicitWitness:
    recipe = wjson.get("recipe")
    steps = [step_from_json(s, vars) for s in recipe] if recipe is not None else None
    return ExplicitWitness([parse_rational(v) for v in wjson["free"]], steps, int(wjson["precision"]))


def _first_difference(a, b, path: str = "") -> Optional[str]:
    if type(a) is not type(b):
        return path or "/"
    if isinstance(a, dict):
        for k in list(a) + [k for k in b if k not in a]:
            if k not in a or k not in b:
                return f"{path}/{k}"
            diff = _first_difference(a[k], b[k], f"{path}/{k}")
            if diff:
                return diff
        if list(a) != list(b):
            return f"{path} (key order)"
        return None
    if isinstance(a, list):
        if len(a) != len(b):
            return f"{path} (length)"
        for i, (x, y) in enumerate(zip(a, b)):
            diff = _first_difference(x, y, f"{path}/{i}")
            if diff:
                return diff
        return None
    return None if a == b else (path or "/")


def rerun(data: dict) -> Certificate:
    """Recompute a certificate from its embedded inputs only."""
    proc = data.get("procedure")
    if proc == "kronecker":
        vars = tuple(data["vars"])
        return prove_zero_ambient(parse_poly(data["g"], vars))
    system = PolySystem.from_json(data["system"])
    place = Place.parse(data["place"])
    R = parse_rational(data["R"])
    wjson = data.get("witness")
    if proc == "dichotomy" and wjson is None:
        return dichotomy_decide(system, place, R)
    if wjson is None:
        raise PipelineError("certificate has no witness")
    w = _explicit_from_json(wjson, system.vars)
    if proc == "certify_identity":
        return certify_identity(system, place, R, w, data["chain"], escalations=0)
    if proc == "dichotomy":
        return dichotomy_decide(system, place, R, w, escalations=0)
    if proc == "dimension":
        return dimension_by_example(system, int(data["d"]), place, R, w, data["selection"],
                                    bool(data.get("all_permutations")), escalations=0)
    raise PipelineError(f"unknown procedure {proc!r}")


def verify_certificate(cert: Union[Certificate, dict, str]) -> tuple[str, Optional[str]]:
    """``("VALID", None)`` iff recomputation reproduces the certificate exactly."""
    try:
        if isinstance(cert, str):
            data = json.loads(cert)
        elif isinstance(cert, Certificate):
            data = cert.data
        else:
            data = cert
        if data.get("schema") != SCHEMA:
            return "INVALID", f"unknown schema {data.get('schema')!r}"
        fresh = rerun(data).data
    except (ValueError, KeyError, TypeError, ArithmeticError, RuntimeError) as exc:
        return "INVALID", f"recomputation failed: {exc}"
    diff = _first_difference(data, fresh)
    if diff is not None:
        return "INVALID", f"mismatch at {diff}"
    return "VALID", None


# ---------------------------------------------------------------------------
# oracle


def membership_oracle(system: PolySystem, g: Optional[MPoly] = None) -> str:
    """MEMBER iff ``g(rho(t))`` is the zero rational function (exact)."""
    rho = system.parametrization
    if rho is None:
        raise PipelineError("membership oracle needs a parametrization")
    g = system.g if g is None else g
    if g.is_zero():
        return "MEMBER"
    tv = rho.params
    degs = g.degrees()
    total = MPoly.zero(tv)
    num_pows: dict = {}
    den_pows: dict = {}

    def pw(cache, base, k):
        key = (id(base), k)
        if key not in cache:
            cache[key] = base ** k
        return cache[key]

    for e, c in g.terms.items():
        term = MPoly.const(tv, c)
        for i, k in enumerate(e):
            term = term * pw(num_pows, rho.nums[i], k) * pw(den_pows, rho.dens[i], degs[i] - k)
        total = total + term
    return "MEMBER" if total.is_zero() else "NON_MEMBER"
