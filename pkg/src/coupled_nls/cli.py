"""Command-line entry point: one subcommand per experiment kind plus ``reproduce``."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import CoupledNLSError
from .harness import EXAMPLES, KINDS, load_config, parse_config, reproduce_all, run

_HELP = {
    "soliton": "ground state of -Lap w + w = w^{p-1}",
    "ground": "ground state on the mass spheres and the Nehari-Pohozaev set",
    "multi": "several distinct solution orbits by deflation",
    "sweep": "ground energies along a list of off-diagonal couplings",
    "nonexist": "test sequence for negative couplings",
    "spectrum": "negative spectrum and Morse indices at the ground state",
    "check": "existence-condition arithmetic",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coupled-nls", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=_HELP[kind])
        p.add_argument("--config", metavar="PATH", help="JSON config (default: built-in example)")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="random seed (overrides the config)")
        p.add_argument("--no-plots", action="store_true", help="write CSV and JSON only")
        p.add_argument("--print-config", action="store_true",
                       help="print the effective config and exit")
    p = sub.add_parser("reproduce", help="run the acceptance suite")
    p.add_argument("--suite", choices=("quick", "full"), default="quick")
    p.add_argument("--out", metavar="DIR", help="write acceptance.csv/json here")
    p.add_argument("--criteria", metavar="IDS", help="comma-separated criterion ids, e.g. 1,2,9")
    return parser


def _run_kind(args) -> int:
    overrides = {"kind": args.command, "output": args.out, "seed": args.seed}
    if args.no_plots:
        overrides["plots"] = False
    if args.config:
        cfg = load_config(args.config, overrides)
    else:
        cfg = parse_config(json.dumps(EXAMPLES[args.command]), overrides)
    if args.print_config:
        print(json.dumps(cfg.normalized(), indent=2))
        return 0
    res = run(cfg)
    if cfg.kind == "check":
        print(res.result["table"])
    print(f"{cfg.kind}: {res.message} (status {res.status}); artifacts in {res.out}")
    return res.status


def _reproduce(args) -> int:
    ids = None
    if args.criteria:
        try:
            ids = [int(x) for x in args.criteria.split(",") if x.strip()]
        except ValueError:
            print("error: --criteria expects comma-separated integers", file=sys.stderr)
            return 2
    reproduce_all(args.suite, args.out, ids)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            return _reproduce(args)
        return _run_kind(args)
    except CoupledNLSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
