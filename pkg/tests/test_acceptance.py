"""Acceptance criteria 1-9.

Each test records one PASS/FAIL line; the lines are printed together in the
terminal summary (see ``conftest.pytest_terminal_summary``).
"""
import json
import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import mpmath
import sympy

from conftest import ACCEPTANCE, DATA, P1, V2, circle_system, pythagorean_point
from pbe.exactnum import LogBound, ln_enclosure
from pbe.geometry import compile_source
from pbe.mpoly import MPoly, height_arg, parse_poly
from pbe.pipeline import (
    PipelineError,
    certify_identity,
    dichotomy_decide,
    dimension_by_example,
    membership_oracle,
    prove_zero_ambient,
    verify_certificate,
)
from pbe.bounds import BoundContext, dichotomy_thresholds, dimension_thresholds
from pbe.system import Parametrization, PolySystem
from pbe.valuations import Place, RealBall, Tri, eval_certified, norm_geq, sqrt_certified, value_from_json
from pbe.witness import GenericityError, Style, WitnessFailure

mpmath.mp.dps = 60

LN10 = ln_enclosure(10)
H13 = ln_enclosure(10 ** 13)
# mpmath references at H = 13 ln 10 for the circle instance
EPS_G_CIRCLE = mpmath.mpf("-1098.49777163504104505007583547477880055693701067088148785191")
EPS_DET_CIRCLE = mpmath.mpf("-4393.99108654016418020030334189911520222774804268352595140762")
TWO_SQRT = mpmath.mpf("1.98469989796621135614142435138730438381468396203932986077596")


@contextmanager
def criterion(n: int, title: str):
    rec = {"detail": ""}
    t0 = time.perf_counter()
    try:
        yield rec
    except BaseException:
        ACCEPTANCE.append((n, "FAIL", title, rec["detail"], time.perf_counter() - t0))
        print(f"criterion {n}: FAIL  {title} {rec['detail']}")
        raise
    secs = time.perf_counter() - t0
    ACCEPTANCE.append((n, "PASS", title, rec["detail"], secs))
    print(f"criterion {n}: PASS  {title} [{secs:.2f}s] {rec['detail']}")


def _thales():
    with open(f"{DATA}/thales.geo") as fh:
        return compile_source(fh.read())


def _inside(b: LogBound, x) -> bool:
    return mpmath.mpf(b.lo.numerator) / b.lo.denominator <= x <= mpmath.mpf(b.hi.numerator) / b.hi.denominator


def test_criterion_1_thales_real():
    with criterion(1, "Thales real golden run") as rec:
        t0 = time.perf_counter()
        cs = _thales()
        s = cs.system
        assert s.f == [parse_poly("C.x^2 + C.y^2 - 1", s.vars)]
        assert s.g == parse_poly("(C.x - 1)*(C.x + 1) + C.y^2", s.vars)
        assert height_arg(s.f[0].coefficients()) == 1          # h(f) = 0
        assert height_arg(s.g.coefficients()) <= 2 and s.g_height_arg() == 2   # h(g) <= ln 2
        cert = certify_identity(s, R=2)
        thr = LogBound.from_json(cert.data["genericity"][0]["threshold"])
        assert thr.hi <= 13 * LN10.lo
        assert 27 <= thr.lo and thr.hi <= 30
        assert cert.data["witness"]["free"] == ["1234567890123/10000000000000"]
        assert cert.data["genericity"][0]["result"] == "GE"
        assert cert.verdict == "PROVED"
        secs = time.perf_counter() - t0
        assert secs <= 60
        rec["detail"] = f"H = {float(thr.lo):.4f} nats, verdict {cert.verdict}"


def test_criterion_2_epsilon_conservative():
    with criterion(2, "eps conservativity") as rec:
        cert = certify_identity(_thales().system, R=2)
        eps = LogBound.from_json(cert.data["thresholds"]["log_eps"])
        assert eps.hi <= -1300 * LN10.hi
        assert eps.lo >= -3500 * LN10.lo
        rec["detail"] = f"log10 eps = {float(eps.lo / LN10.lo):.2f}"


def test_criterion_3_thales_seven_adic():
    with criterion(3, "Thales 7-adic golden run") as rec:
        t0 = time.perf_counter()
        cs = _thales()
        seven = Place.parse("7")
        cert = certify_identity(cs.system, seven)
        w = cert.data["witness"]
        assert w["free"] == [str(7 * 1234567890123)]
        p2 = value_from_json(w["values"][1])
        assert p2.digits(4) == [1, 0, 3, 5]
        N = int(w["precision"])
        assert 1525 <= N <= 4000
        ev = cert.data["evaluations"]
        for v in ev["f"] + [ev["g"]]:
            x = value_from_json(v)
            assert x == 0 or (x.N == N and x.residue == 0)
        assert cert.verdict == "PROVED"
        assert time.perf_counter() - t0 <= 60
        rec["detail"] = f"N = {N} digits, verdict {cert.verdict}"


def test_criterion_4_evaluation_interval():
    with criterion(4, "evaluation interval at 4330 bits") as rec:
        inf = Place()
        g = parse_poly("(x1 - 1)*(x1 + 1) + x2^2", V2)
        p2 = sqrt_certified(RealBall.from_rational(1 - P1 * P1, 4330), inf, 1, 4330)
        out = eval_certified(g, [P1, p2], inf, 4330)
        bound = Fraction(11, 10) / 10 ** 1303
        assert -bound <= out.lo_q and out.hi_q <= bound
        w = out.hi_q - out.lo_q
        rec["detail"] = f"width 10^{float(mpmath.log10(w.numerator) - mpmath.log10(w.denominator)):.1f}"


def _random_poly_text(rng, nvars, deg, nterms):
    terms = []
    for _ in range(nterms):
        e = [0] * nvars
        for _ in range(rng.randint(0, deg)):
            e[rng.randrange(nvars)] += 1
        mono = "*".join(f"x{i + 1}^{k}" for i, k in enumerate(e) if k)
        c = rng.randint(-50, 50)
        terms.append(f"({c})" + (f"*{mono}" if mono else ""))
    return " + ".join(terms) or "0"


def test_criterion_5_kronecker():
    with criterion(5, "Kronecker/Cauchy zero test") as rec:
        t0 = time.perf_counter()
        c = prove_zero_ambient(parse_poly("14*x^2 + 4*x + 4", ("x",)))
        assert (c.data["p"], c.data["value"]) == ("100", "140404")
        rng = random.Random(5)
        agree = zeros = 0
        for _ in range(500):
            nvars = rng.randint(1, 4)
            vars = tuple(f"x{i + 1}" for i in range(nvars))
            a = _random_poly_text(rng, nvars, 2, rng.randint(1, 3))
            b = _random_poly_text(rng, nvars, 3, rng.randint(1, 3))
            expanded = str(sympy.expand(sympy.sympify(f"({a})*({b})".replace("^", "**"))))
            text = f"({a})*({b}) - ({expanded.replace('**', '^')})"
            if rng.random() < 0.5:
                text += " + " + _random_poly_text(rng, nvars, 5, 1)
            truth = sympy.expand(sympy.sympify(text.replace("^", "**"))) == 0
            zeros += truth
            verdict = prove_zero_ambient(parse_poly(text, vars)).verdict
            agree += (verdict == "PROVED") == truth
        secs = time.perf_counter() - t0
        assert agree == 500
        assert secs <= 30
        rec["detail"] = f"{agree}/500 agree ({zeros} zero)"


# ---------------------------------------------------------------------------
# criterion 6: random parametrized varieties


def _rpoly(rng, vars, deg, nterms, c=5):
    p = MPoly.zero(vars)
    for _ in range(nterms):
        e = [0] * len(vars)
        for _ in range(rng.randint(0, deg)):
            e[rng.randrange(len(vars))] += 1
        p = p + MPoly(vars, {tuple(e): rng.randint(-c, c)})
    return p


def _variety(rng):
    t = ("t",)
    T = MPoly.var(t, 0)
    one = MPoly.const(t, 1)
    xy = ("x", "y")
    kind = rng.choice(["graph", "circle", "ellipse", "hyperbola", "cubic", "surface"])
    if kind == "graph":
        phi = _rpoly(rng, ("x",), 3, 3)
        return kind, xy, [MPoly.var(xy, 1) - phi.with_vars(xy)], 1, Parametrization(t, [T, phi.compose([T])], [one, one])
    if kind in ("circle", "ellipse"):
        a = Fraction(rng.randint(1, 5), rng.randint(1, 3))
        b = a if kind == "circle" else Fraction(rng.randint(1, 5), rng.randint(1, 3))
        f = MPoly.var(xy, 0) ** 2 * (1 / a ** 2) + MPoly.var(xy, 1) ** 2 * (1 / b ** 2) - 1
        den = one + T * T
        return kind, xy, [f], 1, Parametrization(t, [(one - T * T) * a, T * (2 * b)], [den, den])
    if kind == "hyperbola":
        c = rng.choice([-3, -2, -1, 1, 2, 3])
        return kind, xy, [MPoly.var(xy, 0) * MPoly.var(xy, 1) - c], 1, Parametrization(t, [T, MPoly.const(t, c)], [one, T])
    xyz = ("x", "y", "z")
    x, y, z = (MPoly.var(xyz, i) for i in range(3))
    if kind == "cubic":
        return kind, xyz, [y - x ** 2, z - x ** 3], 1, Parametrization(t, [T, T ** 2, T ** 3], [one] * 3)
    st = ("s", "t")
    S, T2, o = MPoly.var(st, 0), MPoly.var(st, 1), MPoly.const(st, 1)
    phi = _rpoly(rng, ("x", "y"), 2, 3)
    return kind, xyz, [z - phi.with_vars(xyz)], 2, Parametrization(st, [S, T2, phi.compose([S, T2])], [o, o, o])


def _with_radius(fn, *args, **kw):
    for R in (1, 100, 10 ** 6, 10 ** 12):
        try:
            return fn(*args, R=R, **kw)
        except PipelineError:
            continue
    return None


def test_criterion_6_soundness_fuzz():
    with criterion(6, "soundness fuzz") as rec:
        t0 = time.perf_counter()
        counts = {"varieties": 0, "PROVED": 0, "no_witness": 0, "CASE1": 0, "CASE2": 0, "members": 0}
        false_proved, contradictions = [], []
        for seed in range(150):
            rng = random.Random(seed)
            kind, vars, f, d, rho = _variety(rng)
            if rng.random() < 0.5:
                g = MPoly.zero(vars)
                for fi in f:
                    g = g + fi * _rpoly(rng, vars, 1, 2)
            else:
                g = _rpoly(rng, vars, 2, 3)
            s = PolySystem(vars, f, g, d, True, rho)
            truth = membership_oracle(s)
            counts["varieties"] += 1
            counts["members"] += truth == "MEMBER"
            place = Place.parse(rng.choice(["inf", "inf", "5", "7"]))
            styles = [None, Style.parametric()]
            for style in styles:
                try:
                    c = _with_radius(certify_identity, s, place, witness=style)
                except (GenericityError, WitnessFailure):
                    counts["no_witness"] += 1
                    continue
                if c is not None and c.verdict == "PROVED":
                    counts["PROVED"] += 1
                    if truth != "MEMBER":
                        false_proved.append((seed, kind, str(g)))
            try:
                dch = _with_radius(dichotomy_decide, s, place)
            except (GenericityError, WitnessFailure):
                counts["no_witness"] += 1
                continue
            if dch is None:
                continue
            if dch.verdict in ("CASE1", "CASE2"):
                counts[dch.verdict] += 1
            if (dch.verdict == "CASE1" and truth != "MEMBER") or (dch.verdict == "CASE2" and truth != "NON_MEMBER"):
                contradictions.append((seed, kind, str(g), dch.verdict))
        secs = time.perf_counter() - t0
        rec["detail"] = ", ".join(f"{k} {v}" for k, v in counts.items())
        assert counts["varieties"] >= 100
        assert not false_proved, false_proved
        assert not contradictions, contradictions
        assert secs <= 600


def test_criterion_7_dichotomy_circle():
    with criterion(7, "dichotomy on the circle") as rec:
        _, eps_g_ref = dichotomy_thresholds(BoundContext(2, 1, 1, (2,), 1), H13)
        assert _inside(eps_g_ref, EPS_G_CIRCLE)
        P = pythagorean_point(P1, 7)
        w = Style.exact_point(P)
        c2 = dichotomy_decide(circle_system(g="x1"), witness=w)
        assert c2.verdict == "CASE2"
        gP = Fraction(c2.data["evaluations"]["g"]["value"])
        assert abs(gP - Fraction(1234567890123, 10 ** 13)) < Fraction(1, 10 ** 8)
        eps_g = LogBound.from_json(c2.data["thresholds"]["constants"]["log_eps_g"])
        assert -1100 <= eps_g.lo and eps_g.hi <= -1080
        assert norm_geq(gP, eps_g + ln_enclosure(2)) is Tri.YES
        c1 = dichotomy_decide(circle_system(), witness=w)
        assert c1.verdict == "CASE1"
        assert verify_certificate(c1)[0] == verify_certificate(c2)[0] == "VALID"
        rec["detail"] = f"|g(P)| = {float(gP):.6f}, log eps_g = {float(eps_g.lo):.1f}"


def test_criterion_8_dimension_circle():
    with criterion(8, "dimension by example on the circle") as rec:
        _, eps_det_ref = dimension_thresholds(BoundContext(2, 1, 1, (2,), None), H13)
        assert _inside(eps_det_ref, EPS_DET_CIRCLE)
        P = pythagorean_point(P1, 7)
        cert = dimension_by_example(circle_system(), 1, witness=Style.exact_point(P))
        assert cert.verdict == "DIM_CONFIRMED" and cert.data["d"] == 1
        det_entry = cert.data["evaluations"]["determinants"][0]
        det = Fraction(det_entry["det"]["value"])
        assert abs(mpmath.mpf(det.numerator) / det.denominator - TWO_SQRT) < 1e-8
        assert det_entry["result"] == "YES"
        f = parse_poly("x1^2 + x2^2 - 1", V2)
        dup = PolySystem(V2, [f, f], MPoly.zero(V2), 0, True)
        bad = dimension_by_example(dup, 0, witness=Style.exact_point([Fraction(3, 5), Fraction(4, 5)]))
        assert bad.verdict == "INCONCLUSIVE"
        rec["detail"] = f"det = {float(det):.6f}"


def test_criterion_9_kernel_invariants():
    with criterion(9, "numerical-kernel invariants") as rec:
        rng = random.Random(9)
        inf = Place()
        # 1000-case interval containment
        for _ in range(1000):
            g = _rpoly(rng, V2, 4, 4, 20)
            pt = [Fraction(rng.randint(-999, 999), rng.randint(1, 999)) for _ in V2]
            bits = rng.choice([16, 53, 128])
            exact = g.eval_exact(pt)
            out = eval_certified(g, [RealBall.from_rational(x, bits) for x in pt], inf, bits)
            assert out == exact if isinstance(out, Fraction) else out.lo_q <= exact <= out.hi_q
        # 200-case height: lcm route vs factorization
        for _ in range(200):
            vals = [Fraction(rng.randint(-10 ** 6, 10 ** 6), rng.randint(1, 10 ** 6)) for _ in range(rng.randint(1, 4))]
            vals = [v for v in vals if v] or [Fraction(1)]
            ref = mpmath.mpf(0)
            arch = max(abs(v) for v in vals)
            if arch > 1:
                ref += mpmath.log(mpmath.mpf(arch.numerator) / arch.denominator)
            primes = set()
            for v in vals:
                primes |= set(sympy.factorint(v.numerator)) | set(sympy.factorint(v.denominator))
            primes.discard(-1)
            for p in primes:
                low = min(sympy.multiplicity(p, v.numerator) - sympy.multiplicity(p, v.denominator) for v in vals)
                if low < 0:
                    ref += -low * mpmath.log(p)
            assert _inside(ln_enclosure(height_arg(vals), 128), ref)
        # ln-enclosure widths and monotone refinement
        for _ in range(200):
            q = Fraction(rng.randint(1, 10 ** 9), rng.randint(1, 10 ** 9))
            prev = None
            for bits in (32, 64, 128, 256):
                b = ln_enclosure(q, bits)
                e = abs(math.frexp(float(q))[1]) + 1
                assert b.width() <= Fraction(1 + e, 2 ** bits)
                if prev is not None:
                    assert prev.lo <= b.lo and b.hi <= prev.hi
                prev = b
        # certificate round trip plus two tamper rejections
        cert = certify_identity(_thales().system, R=2)
        assert verify_certificate(cert.dumps()) == ("VALID", None)
        data = json.loads(cert.dumps())
        v = data["witness"]["values"][0]["value"]
        data["witness"]["values"][0]["value"] = v.replace("3", "4", 1)
        assert verify_certificate(data)[0] == "INVALID"
        weak = json.loads(certify_identity(circle_system(g="x1")).dumps())
        assert weak["verdict"] == "INCONCLUSIVE"
        weak["verdict"] = "PROVED"
        assert verify_certificate(weak)[0] == "INVALID"
        rec["detail"] = "1000 containment, 200 height, 200 ln refinement, verify + 2 tampers"
