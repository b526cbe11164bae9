"""Command line entry point.

Exit codes: 0 success, 1 axiom violation by an induced classifier,
2 invalid scenario, 3 runtime or IO error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import (AxiomViolationError, DomstabError, InvalidInputError, InvalidScenarioError,
                     PreconditionError, SchemaError)
from .precision import VARIANTS, estimate_machine_epsilon
from .report import FORMATS, emit_report, run_scenario
from .scenario import parse_scenario

EXIT_OK, EXIT_AXIOMS, EXIT_SCENARIO, EXIT_RUNTIME = 0, 1, 2, 3

SUBCOMMANDS = {
    "axioms": ("axioms",),
    "density": ("density",),
    "stability": ("stability",),
    "series": ("series",),
    "cross-check": ("cross-check",),
    "oracle": ("oracle",),
    "run": None,
}


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario JSON file")
    common.add_argument("--seed", type=int, help="override the scenario seed (unsigned 64-bit)")
    common.add_argument("--mode", choices=("strict", "resolution"), help="override the probe mode")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=FORMATS, default="json")
    common.add_argument("--workers", type=int, default=1, help="threads for per-probe work")

    p = argparse.ArgumentParser(prog="domstab", description="Finite-precision stability analysis of classifier domains.")
    sub = p.add_subparsers(dest="command", required=True)
    e = sub.add_parser("epsilon", parents=[common], help="machine-epsilon calibration")
    e.add_argument("--epsilon0", type=float, default=1.0)
    e.add_argument("--variant", choices=VARIANTS, default="halving")
    e.add_argument("--k", type=int, default=4)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=f"{name} analysis" if name != "run" else "full pipeline")
    return p


def _write(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _epsilon(args):
    if args.scenario:
        # calibration only, but still from the scenario's epsilon settings
        sc = parse_scenario(args.scenario).with_overrides(seed=args.seed, mode=args.mode, analyses=["epsilon"])
        try:
            r = run_scenario(sc)
        finally:
            sc.close()
        text = emit_report(r, args.format, args.out)
        if not args.out:
            _write(text, None)
        return EXIT_OK
    cal = estimate_machine_epsilon(args.epsilon0, args.variant, args.k)
    _write(json.dumps(cal.to_dict(), indent=1) + "\n", args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise SchemaError([("--seed", "seed must be an unsigned 64-bit integer")])
        if args.workers < 1:
            raise SchemaError([("--workers", "workers must be at least 1")])
        if args.command == "epsilon":
            return _epsilon(args)
        if not args.scenario:
            raise SchemaError([("--scenario", f"the {args.command} command needs a scenario file")])
        sc = parse_scenario(args.scenario)
        sc = sc.with_overrides(seed=args.seed, mode=args.mode, analyses=SUBCOMMANDS[args.command])
        try:
            report = run_scenario(sc, workers=args.workers)
        finally:
            sc.close()
        text = emit_report(report, args.format, args.out)
        if not args.out:
            _write(text, None)
        if report.status != "ok":
            print("domstab: internal inconsistency: a stable certificate contradicts a dense rival set",
                  file=sys.stderr)
            return EXIT_RUNTIME
        return EXIT_OK
    except AxiomViolationError as exc:
        print(f"domstab: {exc}", file=sys.stderr)
        print(json.dumps(exc.report.to_dict(), indent=1), file=sys.stderr)
        return EXIT_AXIOMS
    except (SchemaError, InvalidScenarioError, PreconditionError) as exc:
        print(f"domstab: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except InvalidInputError as exc:
        print(f"domstab: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except (OSError, DomstabError, ValueError) as exc:
        print(f"domstab: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
