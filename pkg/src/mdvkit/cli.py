"""Command-line front end.

Exit codes: 0 success, 1 at least one applicable check failed, 2 invalid
input (bad scenario, bad flags, bad report file), 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import scenario as scn_mod
from . import verify
from .displacement import DEFAULT_MAX_ITER, DEFAULT_TOL, minimal_displacement
from .errors import NumericalError, ValidationError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdvkit",
        description="Estimate minimal displacement vectors and verify their calculus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate the minimal displacement vector "
                                          "of each operator in a scenario")
    est.add_argument("scenario", help="path to a scenario JSON file")
    est.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    est.add_argument("--tol", type=float, default=None,
                     help="iterative stopping tolerance (default from scenario)")
    est.add_argument("--max-iter", type=int, default=None,
                     help="iteration cap (default from scenario)")
    est.add_argument("--out", default=None, help="write the report here instead of stdout")
    est.add_argument("--format", choices=("json", "csv"), default="json")

    ver = sub.add_parser("verify", help="run the checks of a scenario, or the built-in suite")
    ver.add_argument("scenario", nargs="?", default=None, help="path to a scenario JSON file")
    ver.add_argument("--builtin-suite", action="store_true",
                     help="run the bundled verification suite instead of a scenario")
    ver.add_argument("--seed", type=int, default=None, help="seed override (default 42 "
                                                            "for the built-in suite)")
    ver.add_argument("--tol", type=float, default=None,
                     help="override the default tolerance of scenario checks")
    ver.add_argument("--max-iter", type=int, default=None, help="iteration cap override")
    ver.add_argument("--out", default=None, help="write the report here instead of stdout")
    ver.add_argument("--format", choices=("json", "csv"), default="json")

    rep = sub.add_parser("report", help="re-render a saved report")
    rep.add_argument("report", help="path to a report JSON file")
    rep.add_argument("--format", choices=("json", "csv"), default="csv")
    rep.add_argument("--out", default=None, help="write here instead of stdout")
    return parser


def _emit(payload: dict, fmt: str, out: str | None) -> None:
    text = scn_mod.dumps_report(payload) if fmt == "json" \
        else scn_mod.report_to_csv(scn_mod.stringify_numbers(payload))
    if out is None:
        sys.stdout.write(text)
    else:
        scn_mod.write_atomic(out, text)


def cmd_estimate(args) -> int:
    scn = scn_mod.load_scenario(args.scenario)
    if not scn.operators:
        raise ValidationError(f"{args.scenario}: scenario defines no operators")
    seed = scn.seed if args.seed is None else args.seed
    tol = args.tol if args.tol is not None else float(scn.estimator.get("tol", DEFAULT_TOL))
    max_iter = args.max_iter if args.max_iter is not None \
        else int(scn.estimator.get("max_iter", DEFAULT_MAX_ITER))
    x0_node = scn.estimator.get("x0")
    entries = []
    for i, op in enumerate(scn.operators):
        x0 = None if x0_node is None else np.asarray(x0_node, dtype=float)
        est = minimal_displacement(op, x0=x0, max_iter=max_iter, tol=tol)
        entries.append(scn_mod.estimate_to_dict(f"op[{i}]", est))
    _emit(scn_mod.estimate_payload(scn.name, seed, entries), args.format, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.builtin_suite:
        if args.scenario is not None:
            raise ValidationError("pass either a scenario path or --builtin-suite, not both")
        seed = 42 if args.seed is None else args.seed
        reports = verify.builtin_suite(seed=seed)
        name = "builtin-suite"
    else:
        if args.scenario is None:
            raise ValidationError("a scenario path is required unless --builtin-suite is set")
        scn = scn_mod.load_scenario(args.scenario)
        if not scn.checks:
            raise ValidationError(f"{args.scenario}: scenario defines no checks")
        seed = scn.seed if args.seed is None else args.seed
        reports = scn_mod.run_scenario_checks(scn, seed=seed, tol=args.tol,
                                              max_iter=args.max_iter)
        name = scn.name
    _emit(scn_mod.verify_payload(name, seed, reports), args.format, args.out)
    return EXIT_OK if verify.suite_passed(reports) else EXIT_CHECK_FAILED


def cmd_report(args) -> int:
    payload = scn_mod.load_report(args.report)
    _emit(payload, args.format, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        if args.command == "estimate":
            return cmd_estimate(args)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_report(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BrokenPipeError:
        # stdout went away (e.g. piped into head); not our error
        try:
            sys.stdout.close()
        except OSError:
            pass
        return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
