"""Proof by example: certify polynomial identities on varieties from one generic point."""

import sys as _sys

__version__ = "0.1.0"

# certificates carry integers with tens of thousands of digits
if hasattr(_sys, "set_int_max_str_digits"):
    _sys.set_int_max_str_digits(0)

from .exactnum import Cmp, Dyadic, LogBound, compare_certain, ln_enclosure  # noqa: E402
from .mpoly import MPoly, height_arg, kronecker_substitute, parse_poly  # noqa: E402
from .valuations import PadicApprox, Place, RealBall, eval_certified, sqrt_certified  # noqa: E402
from .system import Parametrization, PolySystem  # noqa: E402
from .pipeline import (  # noqa: E402
    Certificate,
    certify_identity,
    dichotomy_decide,
    dimension_by_example,
    membership_oracle,
    prove_zero_ambient,
    verify_certificate,
)

__all__ = [
    "Certificate", "Cmp", "Dyadic", "LogBound", "MPoly", "PadicApprox", "Parametrization", "Place",
    "PolySystem", "RealBall", "certify_identity", "compare_certain", "dichotomy_decide",
    "dimension_by_example", "eval_certified", "height_arg", "kronecker_substitute", "ln_enclosure",
    "membership_oracle", "parse_poly", "prove_zero_ambient", "sqrt_certified", "verify_certificate",
]
