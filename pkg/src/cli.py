"""
FormLab Command Line
Subcommands: validate, modulus, disintegrate, check-form, check-z2, angle,
semigroup, verify, report-csv.

Exit codes: 0 every check passes, 1 a check reported 'violated',
2 invalid input (bad flags, malformed files, DSL syntax errors),
3 numeric failure (non-finite values, expressions that cannot be evaluated).
"""

import argparse
import math
import sys
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src import __version__
from src.bilinear import DISINTEGRATION_MODES, disintegrate, disintegration_residual
from src.config import RunConfig, get_formlab_config
from src.errors import ExpressionError, InvalidInputError, NumericFailure
from src.file_formats import load_functions, load_operator, operator_to_dict
from src.forms import (
    DEFAULT_LAMBDA_COUNT,
    Z2_MODES,
    FormFamily,
    family_analyticity,
    family_from_text,
    full_check,
    reduction_crosscheck,
    z2_criterion_check,
    zero_operator_check,
)
from src.log_utils import get_logger, set_console_level
from src.operators import classify, modulus, modulus_oracle
from src.reports import render_report, write_report
from src.sampling import parse_sampler
from src.semigroup import (
    angle_profile,
    contraction_norms,
    exp_semigroup,
    exp_semigroup_spectral,
    first_order_ratios,
    generator_approx_check,
    make_generator,
    phi_p,
    resolvent_defect,
    scalar_angle,
    semigroup_law_defect,
)
from src.space import CFunction
from src.verify_suite import MODULES, VERIFY_GRID, VERIFY_LAMBDAS, run_suites, summary, summary_table

logger = get_logger(__name__)

EXIT_PASS = 0
EXIT_VIOLATED = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3

SEMIGROUP_CHECKS = ("resolvent", "generator", "contraction", "law", "spectral")
GENERATOR_EPS = (0.1, 0.05, 0.025, 0.0125)
ANGLE_GAP_TARGET = 1e-3

ANCHORS = {
    "validate": "symmetric absolute contractions",
    "modulus": "linear modulus",
    "disintegrate": "Thm Disintegration",
    "check-form": "Thm symmetric contraction semigroups",
    "check-z2": "Z2 extreme-point criterion",
    "angle": "optimal angle arccos|1 - 2/p|",
    "semigroup": "Prop reduction to bounded operators",
    "verify": "property suites",
}


def _emit(kind: str, payload: Dict, run: RunConfig, anchor: str, tolerances: Optional[Dict[str, float]] = None) -> None:
    run.tolerances.update(tolerances or {})
    text = render_report(kind, payload, run.seed, run.tolerances, anchor)
    write_report(text, run.output)


def _phi(args: argparse.Namespace) -> float:
    if args.phi == "auto":
        return phi_p(args.p)
    try:
        return float(args.phi)
    except ValueError:
        raise InvalidInputError(f"--phi must be 'auto' or an angle in radians, got {args.phi!r}")


def _signs(text: str) -> List[int]:
    choices = {"both": [1, -1], "plus": [1], "minus": [-1], "+1": [1], "-1": [-1]}
    if text not in choices:
        raise InvalidInputError(f"--sign must be one of {sorted(choices)}")
    return choices[text]


def _families(args: argparse.Namespace) -> List[FormFamily]:
    if args.family == "analyticity":
        if args.p is None:
            raise InvalidInputError("--family analyticity needs --p")
        phi = _phi(args)
        return [family_analyticity(args.p, phi, sign) for sign in _signs(args.sign)]
    if not args.pairs:
        raise InvalidInputError("--family custom needs --pairs 'F1:G1,F2:G2'")
    return [family_from_text(args.d, args.pairs)]


def _verdict(checks: Sequence[Dict]) -> str:
    return "violated" if any(c["verdict"] == "violated" for c in checks) else "pass"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_validate(args: argparse.Namespace, run: RunConfig) -> int:
    T = load_operator(args.operator)
    found = classify(T, run.tolerance)
    _emit("operator_class", {"n": T.n, **found.to_dict()}, run, ANCHORS["validate"])
    return EXIT_PASS


def cmd_modulus(args: argparse.Namespace, run: RunConfig) -> int:
    T = load_operator(args.operator)
    rng = np.random.default_rng(run.seed)
    oracle = modulus_oracle(T, rng.uniform(0.5, 2.0, T.n), samples=args.samples, seed=run.seed)
    scale = 1.0 + float(oracle.modulus_values.max())
    ok = oracle.overshoot() <= 1e-12 * scale and oracle.attainment_gap() <= 1e-12 * scale
    payload = {
        "operator": operator_to_dict(modulus(T)),
        "oracle": {"samples": args.samples, "overshoot": oracle.overshoot(),
                   "attainment_gap": oracle.attainment_gap(), "ok": ok},
    }
    _emit("modulus", payload, run, ANCHORS["modulus"], {"oracle": 1e-12})
    return EXIT_PASS if ok else EXIT_VIOLATED


def cmd_disintegrate(args: argparse.Namespace, run: RunConfig) -> int:
    T = load_operator(args.operator)
    D = disintegrate(T, args.mode, run.tolerance, mass_cutoff=args.mass_cutoff,
                     allow_noncontractive=args.allow_noncontractive)
    payload = {**D.to_dict(), "residual": disintegration_residual(T, D, probes=20, seed=run.seed)}
    _emit("disintegration", payload, run, ANCHORS["disintegrate"])
    return EXIT_PASS


def cmd_check_form(args: argparse.Namespace, run: RunConfig) -> int:
    T = load_operator(args.operator)
    families = _families(args)
    extra: List[CFunction] = load_functions(args.functions, T.space) if args.functions else []
    checks, crosschecks = [], []
    for family in families:
        report = full_check(family, T, samples=args.samples, seed=run.seed, tol=run.tolerance, threads=run.threads)
        checks.append(report.to_dict())
        witness = [CFunction(T.space, [complex(*c) for c in row]) for row in report.witness["f"]]
        crosschecks.append(reduction_crosscheck(family, T, witness, run.tolerance, args.mode).to_dict())
        if extra:
            if len(extra) != family.d:
                raise InvalidInputError(f"function file holds {len(extra)} functions, the family needs d={family.d}")
            crosschecks.append(reduction_crosscheck(family, T, extra, run.tolerance, args.mode).to_dict())
    verdict = _verdict(checks)
    _emit("check_report", {"verdict": verdict, "checks": checks, "crosscheck": crosschecks}, run,
          ANCHORS["check-form"])
    if not all(c["ok"] for c in crosschecks):
        logger.warning("⚠️ reduction crosscheck disagreed on at least one instance")
    return EXIT_VIOLATED if verdict == "violated" else EXIT_PASS


def cmd_check_z2(args: argparse.Namespace, run: RunConfig) -> int:
    sampler = parse_sampler(run.sampler) if run.sampler else None
    checks = []
    for family in _families(args):
        report = z2_criterion_check(family, args.lambda_grid, sampler, run.tolerance, args.mode,
                                    refine=not args.no_refine, threads=run.threads)
        checks.append(report.to_dict())
        if args.zero_operator:
            checks.append(zero_operator_check(family, sampler, run.tolerance).to_dict())
    verdict = _verdict(checks)
    _emit("check_report", {"verdict": verdict, "checks": checks}, run, ANCHORS["check-z2"])
    return EXIT_VIOLATED if verdict == "violated" else EXIT_PASS


def cmd_angle(args: argparse.Namespace, run: RunConfig) -> int:
    report = scalar_angle(args.p, radial=args.radial, angular=args.angular, approach=args.approach, seed=run.seed)
    _emit("angle_report", report.to_dict(), run, ANCHORS["angle"], {"gap": ANGLE_GAP_TARGET})
    if args.csv:
        phis = np.arange(0.0, math.pi / 2 + 1e-12, args.phi_step)
        pd.DataFrame(angle_profile(args.p, phis)).to_csv(args.csv, index=False)
        logger.info(f"✅ Wrote {phis.size} angle rows to {args.csv}")
    return EXIT_PASS if report.gap <= ANGLE_GAP_TARGET else EXIT_VIOLATED


def cmd_semigroup(args: argparse.Namespace, run: RunConfig) -> int:
    T = load_operator(args.operator)
    G = make_generator(T, run.tolerance)
    wanted = [name.strip() for name in args.check.split(",") if name.strip()]
    unknown = sorted(set(wanted) - set(SEMIGROUP_CHECKS))
    if unknown or not wanted:
        raise InvalidInputError(f"unknown semigroup checks {unknown}; choose from {SEMIGROUP_CHECKS}")
    rng = np.random.default_rng(run.seed)
    f = CFunction(T.space, rng.standard_normal(T.n) + 1j * rng.standard_normal(T.n))

    checks: Dict[str, Dict] = {}
    for name in wanted:
        if name == "resolvent":
            defect = resolvent_defect(G, f)
            checks[name] = {"ok": defect <= 1e-10, "defect": defect}
        elif name == "generator":
            errors = generator_approx_check(G, f, GENERATOR_EPS)
            ratios = first_order_ratios(errors)
            ok = errors[0] <= 1e-12 or all(0.3 <= r <= 0.7 for r in ratios)
            checks[name] = {"ok": ok, "eps": list(GENERATOR_EPS), "errors": errors, "ratios": ratios}
        elif name == "contraction":
            l1, linf = contraction_norms(G, args.t)
            checks[name] = {"ok": max(l1, linf) <= 1.0 + 1e-11, "l1_norm": l1, "linf_norm": linf}
        elif name == "law":
            defect = semigroup_law_defect(G, args.t, args.t)
            checks[name] = {"ok": defect <= 1e-11, "defect": defect}
        else:
            gap = float(np.abs(exp_semigroup(G, args.t).entries - exp_semigroup_spectral(G, args.t).entries).max())
            checks[name] = {"ok": gap <= 1e-11, "defect": gap}
    ok = all(c["ok"] for c in checks.values())
    _emit("semigroup", {"n": T.n, "t": args.t, "ok": ok, "checks": checks}, run, ANCHORS["semigroup"])
    return EXIT_PASS if ok else EXIT_VIOLATED


def cmd_verify(args: argparse.Namespace, run: RunConfig) -> int:
    results = run_suites(run.seed, args.scope, args.suite)
    print(summary_table(results), file=sys.stderr)
    document = summary(results, args.scope, run.seed)
    _emit("verify_summary", document, run, ANCHORS["verify"])
    return EXIT_PASS if document["ok"] else EXIT_VIOLATED


def phi_sweep(phi_min: float, phi_max: float, step: float) -> np.ndarray:
    """Equispaced angles phi_min, phi_min + step, ... <= phi_max"""
    if not (math.isfinite(phi_min) and math.isfinite(phi_max) and math.isfinite(step)):
        raise InvalidInputError("angle range must be finite")
    if step <= 0 or phi_max < phi_min:
        raise InvalidInputError(f"empty angle range [{phi_min}, {phi_max}] with step {step}")
    count = int(math.floor((phi_max - phi_min) / step + 1e-9)) + 1
    return phi_min + step * np.arange(count)


def cmd_report_csv(args: argparse.Namespace, run: RunConfig) -> int:
    phis = phi_sweep(args.phi_min, args.phi_max, args.step)
    sampler = parse_sampler(run.sampler) if run.sampler else VERIFY_GRID
    rows = []
    for phi in phis:
        values = [
            z2_criterion_check(family_analyticity(args.p, float(phi), sign), args.lambda_grid, sampler,
                               run.tolerance, threads=run.threads).min_value
            for sign in _signs(args.sign)
        ]
        rows.append({"phi": float(phi), "min_value": min(values)})
    frame = pd.DataFrame(rows, columns=["phi", "min_value"])
    if run.output:
        frame.to_csv(run.output, index=False)
        logger.info(f"✅ Wrote {len(frame)} rows to {run.output}")
    else:
        sys.stdout.write(frame.to_csv(index=False))
    return EXIT_PASS


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _common_flags() -> argparse.ArgumentParser:
    # built once per subcommand: set_defaults mutates the shared action objects
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (drawn from entropy when omitted)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default FORMLAB_THREADS or 1)")
    common.add_argument("--tol", type=float, default=None, help="verdict tolerance (default FORMLAB_TOL or 1e-9)")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--log-level", default=None, help="console log level (default FORMLAB_LOG_LEVEL)")
    return common


def _family_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=["analyticity", "custom"], default="analyticity")
    parser.add_argument("--p", type=float, default=None)
    parser.add_argument("--phi", default="auto", help="'auto' (phi_p) or an angle in radians")
    parser.add_argument("--sign", default="both", help="both, plus or minus")
    parser.add_argument("--d", type=int, default=1, help="arity of a custom family")
    parser.add_argument("--pairs", default=None, help="custom family 'F1:G1,F2:G2' in the expression language")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="formlab", description="Form inequalities of symmetric contraction semigroups")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[_common_flags()], help="classify an operator file")
    p.add_argument("operator")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("modulus", parents=[_common_flags()], help="linear modulus with the brute-force oracle")
    p.add_argument("--operator", required=True)
    p.add_argument("--samples", type=int, default=256)
    p.set_defaults(handler=cmd_modulus)

    p = sub.add_parser("disintegrate", parents=[_common_flags()], help="disintegrate the form of Id - T")
    p.add_argument("--operator", required=True)
    p.add_argument("--mode", choices=DISINTEGRATION_MODES, default="general")
    p.add_argument("--mass-cutoff", type=float, default=None)
    p.add_argument("--allow-noncontractive", action="store_true")
    p.set_defaults(handler=cmd_disintegrate)

    p = sub.add_parser("check-form", parents=[_common_flags()], help="sample the full form inequality for an operator")
    _family_flags(p)
    p.add_argument("--operator", required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--functions", default=None, help="function file for an extra reduction crosscheck")
    p.add_argument("--mode", choices=DISINTEGRATION_MODES, default="general",
                   help="disintegration used by the reduction crosscheck")
    p.set_defaults(handler=cmd_check_form)

    p = sub.add_parser("check-z2", parents=[_common_flags()], help="two-point criterion over lambda and (z, w)")
    _family_flags(p)
    p.add_argument("--lambda-grid", type=int, default=DEFAULT_LAMBDA_COUNT)
    p.add_argument("--grid-spec", default=None, help="e.g. 'grid:radial=9' or 'random:count=5000,seed=7'")
    p.add_argument("--mode", choices=Z2_MODES, default="general")
    p.add_argument("--zero-operator", action="store_true", help="add the T = 0 check")
    p.add_argument("--no-refine", action="store_true")
    p.set_defaults(handler=cmd_check_z2)

    p = sub.add_parser("angle", parents=[_common_flags()], help="numeric optimal angle against arccos|1 - 2/p|")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--radial", type=int, default=60)
    p.add_argument("--angular", type=int, default=91)
    p.add_argument("--approach", type=int, default=40)
    p.add_argument("--csv", default=None, help="also write (phi, min form value) rows here")
    p.add_argument("--phi-step", type=float, default=0.01)
    p.set_defaults(handler=cmd_angle)

    p = sub.add_parser("semigroup", parents=[_common_flags()], help="semigroup, resolvent and generator checks")
    p.add_argument("--operator", required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--check", default="resolvent,generator,contraction")
    p.set_defaults(handler=cmd_semigroup)

    p = sub.add_parser("verify", parents=[_common_flags()], help="run the property suites")
    p.add_argument("--scope", choices=("all",) + MODULES, default="all")
    p.add_argument("--suite", action="append", default=None, help="run only this suite (repeatable)")
    p.set_defaults(handler=cmd_verify, seed=0)

    p = sub.add_parser("report-csv", parents=[_common_flags()], help="min Z2 value of the analyticity family per angle")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--phi-min", type=float, required=True)
    p.add_argument("--phi-max", type=float, required=True)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--sign", default="both")
    p.add_argument("--lambda-grid", type=int, default=VERIFY_LAMBDAS)
    p.add_argument("--grid-spec", default=None)
    p.set_defaults(handler=cmd_report_csv)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config = get_formlab_config()
    set_console_level(args.log_level or config["log_level"])
    inputs = [v for v in (getattr(args, "operator", None), getattr(args, "functions", None)) if v]
    run = RunConfig.from_args(args.command, args.seed, args.threads, args.tol, args.out, inputs,
                              getattr(args, "grid_spec", None))
    handler: Callable[[argparse.Namespace, RunConfig], int] = args.handler
    logger.debug(f"running {args.command} with seed {run.seed} on {run.threads} threads")
    try:
        return handler(args, run)
    except InvalidInputError as e:
        logger.error(f"❌ Invalid input: {e}")
        print(f"formlab: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericFailure, ExpressionError) as e:
        logger.error(f"❌ Numeric failure: {e}")
        print(f"formlab: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
