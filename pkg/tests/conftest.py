import os
from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from pbe.mpoly import parse_poly
from pbe.system import Parametrization, PolySystem

settings.register_profile("pbe", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pbe")

DATA = os.path.join(os.path.dirname(__file__), "data")
V2 = ("x1", "x2")
P1 = Fraction(1234567890123, 10 ** 13)


def circle_rho():
    t = ("t",)
    den = parse_poly("1 + t^2", t)
    return Parametrization(t, [parse_poly("1 - t^2", t), parse_poly("2*t", t)], [den, den])


def circle_system(g="x1^2 + x2^2 - 1", dim=1, irreducible=True, **kw):
    f = parse_poly("x1^2 + x2^2 - 1", V2)
    return PolySystem(V2, [f], parse_poly(g, V2), dim, irreducible, circle_rho(), **kw)


def thales_system(**kw):
    f = parse_poly("x1^2 + x2^2 - 1", V2)
    g = parse_poly("(x1-1)*(x1+1) + x2*x2", V2)
    return PolySystem(V2, [f], g, 1, True, **kw)


def pythagorean_point(q: Fraction, k: int):
    """Exact point on the unit circle with first coordinate close to ``q``.

    Uses ``t = tan(theta/2)`` truncated to ``k`` decimals, then the rational
    parametrization; the height of the result is about ``2k`` digits.
    """
    getcontext().prec = 60
    qd = Decimal(q.numerator) / Decimal(q.denominator)
    t = ((1 - qd) / (1 + qd)).sqrt()
    t = Fraction(int(t * 10 ** k), 10 ** k)
    return [(1 - t * t) / (1 + t * t), 2 * t / (1 + t * t)]


@pytest.fixture
def thales_source():
    with open(os.path.join(DATA, "thales.geo")) as fh:
        return fh.read()


# acceptance criteria report, filled by test_acceptance and printed at the end of the run
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, status, title, detail, secs in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n}: {status}  {title}  [{secs:.2f}s] {detail}")
