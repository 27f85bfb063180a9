import os
from dotenv import load_dotenv

_backend_dir = os.path.dirname(os.path.abspath(__file__))
_project_root = os.path.dirname(_backend_dir)
load_dotenv(os.path.join(_project_root, ".env"))

import argparse
import logging
import sys
from typing import Optional, Sequence

from models.errors import (
    BoundViolation,
    BudgetExceeded,
    CertificationFailed,
    CocycleToolkitError,
    ConeEscape,
    DescriptionParseError,
    HashMismatch,
    HypothesisViolated,
    IllegalWord,
    NoGap,
    NotPrimitive,
    RecomputationMismatch,
    Singular,
)
from services import experiments

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_NO_GAP = 3
EXIT_CERTIFICATION = 4
EXIT_BUDGET = 5
EXIT_MISMATCH = 6
EXIT_BOUNDS = 7

_EXIT_CODES: list[tuple[type[BaseException], int]] = [
    (DescriptionParseError, EXIT_CONFIG),
    (NotPrimitive, EXIT_CONFIG),
    (IllegalWord, EXIT_CONFIG),
    (Singular, EXIT_CONFIG),
    (NoGap, EXIT_NO_GAP),
    (CertificationFailed, EXIT_CERTIFICATION),
    (BudgetExceeded, EXIT_BUDGET),
    (HashMismatch, EXIT_MISMATCH),
    (RecomputationMismatch, EXIT_MISMATCH),
    (BoundViolation, EXIT_BOUNDS),
    (ConeEscape, EXIT_BOUNDS),
    (HypothesisViolated, EXIT_BOUNDS),
]


def _format_exception_detail(exc: BaseException) -> str:
    message = str(exc).strip()
    if message:
        return f"{type(exc).__name__}: {message}"
    return type(exc).__name__


def exit_code_for(exc: BaseException) -> int:
    for kind, code in _EXIT_CODES:
        if isinstance(exc, kind):
            return code
    if isinstance(exc, CocycleToolkitError):
        return EXIT_ERROR
    # plain ValueError here comes from argument or window sanity checks
    return EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lyapunov-irregular",
        description="Spectra, Lyapunov-norm checks and certified Lyapunov-irregular points for matrix cocycles over SFTs.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON experiment config")
    common.add_argument("--out", default=None, help="output directory (default: <config dir>/out)")
    common.add_argument("--levels", type=int, default=None)
    common.add_argument("--tau", type=float, default=None)
    common.add_argument("--epsilon", type=float, default=None)
    common.add_argument("--window", type=int, default=None)
    common.add_argument("--horizon", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--cap", type=int, default=None, help="largest block length the planner may use")
    sub.add_parser("spectrum", parents=[common], help="Lyapunov spectra of the configured measures")
    sub.add_parser("irregular", parents=[common], help="build and certify an irregular point")
    verify = sub.add_parser("verify", parents=[common], help="re-certify a witness file")
    verify.add_argument("--witness", default=None, help="witness file (default: <out>/witness.json)")
    sub.add_parser("scan", parents=[common], help="density scan over all cylinders of a window")
    sub.add_parser("bounds", parents=[common], help="Lyapunov-norm and shadowing instance checks")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    return {
        "levels": args.levels,
        "tau": args.tau,
        "epsilon": args.epsilon,
        "window": args.window,
        "horizon": args.horizon,
        "seed": args.seed,
        "max_block_length": args.cap,
    }


def _run(args: argparse.Namespace) -> int:
    config = experiments.load_config(args.config, _overrides(args))
    ctx = experiments.load_context(config, args.out)

    if args.verb == "spectrum":
        table = experiments.cmd_spectrum(ctx)
        print(f"{'measure':<12} {'exponent':>20} {'mult':>5}")
        for row in table.rows:
            print(f"{row.measure:<12} {row.exponent:>20.12f} {row.multiplicity:>5}")
        for label, sums in table.top_sums.items():
            print(f"{label}: top sums " + " ".join(f"{s:.12f}" for s in sums))
        return EXIT_OK

    if args.verb == "irregular":
        result = experiments.cmd_irregular(ctx)
        witness = result.witness
        via = f" via exterior power i={witness.exterior_index}" if witness.exterior_index > 1 else ""
        print(f"certified {2 * len(witness.levels)} comparisons{via}")
        for record in witness.levels:
            print(
                f"  level {record.level}: n1={record.high_time} avg={record.high_average:.9f} "
                f"> {record.high_threshold:.9f}; n2={record.low_time} avg={record.low_average:.9f} "
                f"< {record.low_threshold:.9f}"
            )
        print(f"oscillation gap {witness.oscillation_gap:.9f}")
        return EXIT_OK

    if args.verb == "verify":
        path = args.witness or str(ctx.output(config.witness_path, "witness.json"))
        checked = experiments.cmd_verify(ctx, path)
        print(f"pass: {len(checked)} levels re-certified")
        return EXIT_OK

    if args.verb == "scan":
        report = experiments.cmd_scan(ctx)
        for row in report.rows:
            status = "certified" if row.certified else f"FAILED ({row.error})"
            print(f"  {row.cylinder}: {status}")
        print(f"{report.certified}/{len(report.rows)} cylinders certified for O_{report.index}")
        return EXIT_OK if report.certified == len(report.rows) else EXIT_CERTIFICATION

    instances, controls = experiments.cmd_bounds(ctx)
    for record in instances:
        if hasattr(record, "checks"):
            worst = record.worst()
            detail = "vacuous" if record.vacuous else f"worst margin {worst.margin:.3e}" if worst else "no checks"
            print(f"  {record.suite} {record.word}: {'pass' if record.passed else 'FAIL'} ({detail})")
        else:
            print(f"  shadowing {record.word} n={record.steps} delta={record.delta:.3e} "
                  f"c={record.measured_c:.6g} growth ratio={record.growth_ratio:.3e}")
    for control in controls:
        print(f"  {control.suite} {control.word}: {'violation reported' if not control.passed else 'NOT DETECTED'}")
    return EXIT_OK if experiments.bounds_passed(instances, controls) else EXIT_BOUNDS


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=os.getenv("LOG_LEVEL", "WARNING").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (CocycleToolkitError, ValueError) as exc:
        code = exit_code_for(exc)
        if isinstance(exc, NoGap):
            print("all ergodic measures have the same Lyapunov spectrum (among the supplied measures)")
        print(_format_exception_detail(exc), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
