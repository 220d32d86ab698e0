"""``tune`` command line: run campaigns, render reports, run the analytic suite."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from .bench import SUITES, run_suite
from .errors import TuneError
from .experiment import ExperimentConfig, load_campaign, render_report, run_experiment


def _cmd_run(args) -> int:
    config = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.subsample is not None:
        config = replace(config, subsample=args.subsample)
    campaign = run_experiment(config, args.out, threads=args.threads)
    print(render_report(campaign)["markdown"])
    print(f"results written to {args.out}")
    return 0


def _cmd_report(args) -> int:
    report = render_report(load_campaign(args.results))
    if args.format == "json":
        print(json.dumps({k: report[k] for k in ("per_class", "summary")}, indent=2, sort_keys=True))
    else:
        print(report["markdown"])
    return 0


def _cmd_bench(args) -> int:
    ok = True
    for row in run_suite(args.suite):
        ok &= row["passed"]
        print(f"{'PASS' if row['passed'] else 'FAIL'}  {row['name']}: {row['detail']}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tune", description="Hyperparameter tuning campaigns for random forests.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run or resume an experiment campaign")
    r.add_argument("--config", required=True, help="experiment file (YAML or JSON)")
    r.add_argument("--seed", type=int, help="override the root seed")
    r.add_argument("--subsample", type=int, help="override the stratified subsample size")
    r.add_argument("--out", default="results", help="results directory (default: results)")
    r.add_argument("--threads", type=int, help="evaluation threads (default: TUNE_THREADS or all cores)")
    r.set_defaults(func=_cmd_run)

    rep = sub.add_parser("report", help="render the report of a results directory")
    rep.add_argument("--results", required=True)
    rep.add_argument("--format", choices=("md", "json"), default="md")
    rep.set_defaults(func=_cmd_report)

    b = sub.add_parser("bench", help="run a benchmark suite of analytic objectives")
    b.add_argument("--suite", choices=sorted(SUITES), default="analytic")
    b.set_defaults(func=_cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        return args.func(args)
    except (TuneError, OSError) as exc:
        print(f"tune: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
