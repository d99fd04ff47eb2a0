"""Command-line front end: ``pbe <subcommand> ...``.

Exit codes: 0 for a definitive verdict, 2 for INCONCLUSIVE/INVALID, 1 for
usage or runtime errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .bounds import (
    BoundContext,
    NssVariant,
    ThresholdReport,
    dichotomy_thresholds,
    dimension_thresholds,
    epsilon_main,
    nullstellensatz_size_bounds,
)
from .exactnum import LogBound, ln_enclosure, parse_rational
from .geometry import GeoSyntaxError, compile_source
from .mpoly import PolySyntaxError, parse_poly, tokenize
from .pipeline import (
    DEFINITIVE,
    Certificate,
    ExplicitWitness,
    PipelineError,
    certify_identity,
    dichotomy_decide,
    dimension_by_example,
    prove_zero_ambient,
    verify_certificate,
)
from .system import PolySystem
from .valuations import Place
from .witness import (
    GenericityError,
    Style,
    WitnessFailure,
    chain_threshold_fn,
    choose_free_coordinates,
    step_from_json,
)


class UsageError(Exception):
    pass


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pbe-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _place(text: str) -> Place:
    try:
        return Place.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _radius(text: str) -> Fraction:
    R = parse_rational(text)
    if R < 1:
        raise UsageError("--radius must be >= 1")
    return R


def _load_witness(path: Optional[str], system: PolySystem, precision: Optional[int]):
    """Witness file: ``{"point": [...]}``, ``{"free": [...]}`` or a certificate witness block."""
    if path is None:
        return None
    with open(path) as fh:
        obj = json.load(fh)
    if "witness" in obj and isinstance(obj["witness"], dict):
        obj = obj["witness"]
    if "point" in obj:
        return Style.exact_point([parse_rational(v) for v in obj["point"]])
    if "free" not in obj:
        raise UsageError("witness file needs a 'point' or 'free' entry")
    values = [parse_rational(v) for v in obj["free"]]
    if obj.get("recipe") is not None and obj.get("precision") is not None:
        recipe = [step_from_json(s, system.vars) for s in obj["recipe"]]
        return ExplicitWitness(values, recipe, int(precision or obj["precision"]))
    return Style.user(values)


def _witness_arg(args, system: PolySystem, place: Place):
    if args.witness:
        return _load_witness(args.witness, system, args.precision)
    if args.parametric:
        return Style.parametric()
    return None


def _chain(args) -> str:
    return "main" if args.main_chain else "weak"


def _emit(cert: Certificate, args) -> int:
    if args.out:
        _write_atomic(args.out, cert.dumps())
    elif args.json:
        sys.stdout.write(cert.dumps())
    th = cert.data.get("thresholds")
    if th and not args.json:
        report = ThresholdReport(
            th["chain"], [LogBound.from_json(t) for t in th["thresholds"]],
            LogBound.from_json(th["log_eps"]) if th.get("log_eps") else None,
            {k: (LogBound.from_json(v) if isinstance(v, dict) and "lo" in v else v)
             for k, v in th.get("constants", {}).items()},
        )
        print(report.text())
    w = cert.data.get("witness") or {}
    if w.get("free") and not args.json:
        print("witness free coordinates: " + ", ".join(w["free"]))
        print(f"precision: {w.get('precision')}")
    line = f"verdict: {cert.verdict}"
    if cert.reason:
        line += f" ({cert.reason})"
    print(line, file=sys.stderr if args.json else sys.stdout)
    return 0 if cert.verdict in DEFINITIVE else 2


def _run_system(kind: str, system: PolySystem, args) -> int:
    place = _place(args.place)
    R = _radius(args.radius)
    witness = _witness_arg(args, system, place)
    if kind == "certify":
        cert = certify_identity(system, place, R, witness, _chain(args), args.escalations, args.precision)
    elif kind == "dichotomy":
        cert = dichotomy_decide(system, place, R, witness, args.escalations, args.precision)
    elif kind == "dimension":
        d = args.d if args.d is not None else system.dim
        sel = [int(s) for s in args.selection.split(",")] if args.selection else None
        cert = dimension_by_example(system, d, place, R, witness, sel, args.all_permutations,
                                    args.escalations, args.precision)
    else:
        raise UsageError(f"unknown procedure {kind}")
    return _emit(cert, args)


def cmd_system(args) -> int:
    return _run_system(args.command, PolySystem.load(args.system), args)


def cmd_geom(args) -> int:
    with open(args.program) as fh:
        cs = compile_source(fh.read())
    if args.compile_only:
        sys.stdout.write(json.dumps(cs.to_json(), indent=2) + "\n")
        return 0
    return _run_system(args.procedure, cs.system, args)


def cmd_bounds(args) -> int:
    system = PolySystem.load(args.system)
    place = _place(args.place)
    R = _radius(args.radius)
    ctx = BoundContext.for_system(system.f, system.g, system.dim, R, place, nvars=system.n)
    chain = _chain(args)
    fn = chain_threshold_fn(system, ctx, chain)
    witness = _witness_arg(args, system, place)
    if isinstance(witness, Style) and witness.kind.name == "USER":
        values = list(witness.values)
        thresholds = [fn(i, values[: i - 1]) for i in range(1, len(values) + 1)]
    else:
        free = choose_free_coordinates(system, fn, place, Style.default_for(place))
        values = [c.value for c in free]
        thresholds = [c.threshold for c in free]
    H_full = system.height_with(values, True)
    constants = {"H_full": H_full, "h(f)": system.height_with([], False)}
    if system.g.degree_or_none():
        H = ln_enclosure(system.height_arg_with(values, False) * system.g_height_arg())
        eps_f, eps_g = dichotomy_thresholds(ctx, H)
        constants.update({"log_eps_f (dichotomy)": eps_f, "log_eps_g (dichotomy)": eps_g})
    if system.f:
        eps_fp, eps_det = dimension_thresholds(ctx, system.height_with(values, False))
        constants.update({"log_eps_f' (dimension)": eps_fp, "log_eps_det (dimension)": eps_det})
    report = ThresholdReport(chain, thresholds, epsilon_main(ctx, H_full), constants)
    print(report.text())
    print("witness free coordinates: " + ", ".join(str(v) for v in values))
    return 0


def cmd_nss(args) -> int:
    system = PolySystem.load(args.system)
    ctx = BoundContext.for_system(system.f, system.g, system.dim, 1, Place(), nvars=system.n)
    H = system.height_with([], True)
    variant = NssVariant[args.variant.upper()]
    b = nullstellensatz_size_bounds(ctx, H, variant)
    print(f"variant: {variant.value}")
    if b.N is not None:
        print(f"N = {b.N}")
    print(f"deg lambda_i <= {b.deg_lambda_max}")
    print(ThresholdReport("nss", [], None, {"h(lambda_i) upper bound": b.h_lambda_max}).text().split("\n", 1)[1])
    return 0


def cmd_kronecker(args) -> int:
    if args.vars:
        vars = tuple(v.strip() for v in args.vars.split(","))
    else:
        vars = tuple(sorted({v for k, v, _ in tokenize(args.poly) if k == "name"})) or ("x",)
    g = parse_poly(args.poly, vars)
    cert = prove_zero_ambient(g)
    print(f"g_kr(z) = {cert.data['g_kr']}   (D = {cert.data['D']})")
    print(f"Cauchy threshold {cert.data['threshold']}, evaluation point p = {cert.data['p']}")
    print(f"g_kr({cert.data['p']}) = {cert.data['value']}")
    if args.out:
        _write_atomic(args.out, cert.dumps())
    print(f"verdict: {cert.verdict}")
    return 0 if cert.verdict in DEFINITIVE else 2


def cmd_verify(args) -> int:
    with open(args.certificate) as fh:
        text = fh.read()
    status, reason = verify_certificate(text)
    print(status if reason is None else f"{status}: {reason}")
    return 0 if status == "VALID" else 2


def _common(p: argparse.ArgumentParser, witness: bool = True) -> None:
    p.add_argument("--place", default="inf", help="'inf' or an odd prime (default inf)")
    p.add_argument("--radius", "-R", default="1", help="radius R >= 1 of the ball containing the witness")
    chain = p.add_mutually_exclusive_group()
    chain.add_argument("--weak-chain", action="store_true", help="weak degree-sequence chain (default)")
    chain.add_argument("--main-chain", action="store_true", help="uniform main-theorem chain")
    if witness:
        src = p.add_mutually_exclusive_group()
        src.add_argument("--auto-witness", action="store_true", help="choose the witness automatically (default)")
        src.add_argument("--witness", metavar="FILE", help="JSON witness file")
        src.add_argument("--parametric", action="store_true", help="exact witness from the parametrization")
        p.add_argument("--precision", type=int, default=None, help="starting precision (bits or p-adic digits)")
        p.add_argument("--escalations", type=int, default=2, help="precision doublings allowed (default 2)")
        p.add_argument("--out", "-o", metavar="FILE", help="write the certificate here")
        p.add_argument("--json", action="store_true", help="print the certificate to stdout")
        p.add_argument("--d", type=int, default=None, help="dimension to certify (dimension only)")
        p.add_argument("--selection", default=None, help="comma-separated 0-based indices of f (dimension only)")
        p.add_argument("--all-permutations", action="store_true", help="check every selection (dimension only)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pbe", description="Certified proofs of polynomial identities by example.")
    parser.add_argument("--version", action="version", version=f"pbe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="print genericity thresholds and tolerances")
    p.add_argument("system")
    _common(p, witness=False)
    p.add_argument("--witness", metavar="FILE")
    p.add_argument("--parametric", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--precision", type=int, default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_bounds)

    for name, text in (("certify", "prove g vanishes on X"), ("dichotomy", "decide g|X = 0 or g|X != 0"),
                       ("dimension", "certify dim X = d")):
        p = sub.add_parser(name, help=text)
        p.add_argument("system", help="system JSON file")
        _common(p)
        p.set_defaults(func=cmd_system)

    p = sub.add_parser("geom", help="compile a .geo construction and run a procedure on it")
    p.add_argument("program")
    p.add_argument("--procedure", choices=["certify", "dichotomy", "dimension"], default="certify")
    p.add_argument("--compile-only", action="store_true", help="print the compiled system and stop")
    _common(p)
    p.set_defaults(func=cmd_geom)

    p = sub.add_parser("kronecker", help="exact zero test of a polynomial in affine space")
    p.add_argument("poly")
    p.add_argument("--vars", default=None, help="comma-separated variable order")
    p.add_argument("--out", "-o", metavar="FILE")
    p.set_defaults(func=cmd_kronecker)

    p = sub.add_parser("verify", help="re-check a certificate")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("nss-bounds", help="Nullstellensatz degree and height bounds")
    p.add_argument("system")
    p.add_argument("--variant", choices=["bezout", "general"], default="general")
    p.set_defaults(func=cmd_nss)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except (UsageError, PipelineError, GeoSyntaxError, PolySyntaxError, GenericityError, WitnessFailure,
            OSError, ValueError, KeyError) as exc:
        print(f"pbe: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
