"""Command line entry point: ``specwig run`` and ``specwig selftest``."""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, SpecwigError
from .harness import ExperimentConfig, run
from .selftest import run_selftest


def _fmt(v):
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def _print_report(rep):
    print(f"experiment: {rep.experiment}")
    for s in rep.stats:
        flag = "" if s["pass"] is None else ("  ok" if s["pass"] else "  FAIL")
        print(f"  {s['name']}: theory={_fmt(s['theory'])} empirical={_fmt(s['empirical'])}{flag}")
    for entry in rep.per_N:
        print(f"  N={entry['N']} trials={entry['trials']}")
        for s in entry["stats"]:
            flag = "" if s["pass"] is None else ("  ok" if s["pass"] else "  FAIL")
            print(f"    {s['name']}: theory={_fmt(s['theory'])} empirical={_fmt(float(s['empirical']))}{flag}")
    print(f"passed: {rep.passed}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="specwig", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="output directory (default: config 'output' or ./specwig_out)")
    p_run.add_argument("--threads", type=int, default=1)
    sub.add_parser("selftest", help="run the built-in oracle checks")
    args = parser.parse_args(argv)

    if args.command == "selftest":
        return 0 if run_selftest() else 1

    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        cfg = ExperimentConfig.from_json(args.config)
    except (OSError, ConfigError) as exc:
        print(f"specwig: {exc}", file=sys.stderr)
        return 2
    out = args.out or cfg.output or "specwig_out"
    try:
        rep = run(cfg, threads=args.threads, out=out)
    except SpecwigError as exc:
        print(f"specwig: {exc}", file=sys.stderr)
        return 3
    _print_report(rep)
    print(f"report written to {out}")
    return 1 if rep.passed is False else 0


if __name__ == "__main__":
    sys.exit(main())
