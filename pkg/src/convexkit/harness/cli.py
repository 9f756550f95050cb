"""Command-line front end.

Subcommands:
  list    catalog of runnable algorithms and their guarantee ids
  run     execute one experiment from a JSON config, write trace CSVs + summary
  suite   run the acceptance criteria (filterable), one pass/fail line each
  report  render result.json artifacts as a Markdown table

Exit codes: 0 success, 1 a guarantee failed, 2 bad config, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .core import BoundViolation
from ..interior_point import InvariantBroken
from . import registry, suites

EXIT_OK = 0
EXIT_BOUND = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _cmd_list(args) -> int:
    rows = registry.list_algorithms()
    widths = {
        "id": max(len(r["id"]) for r in rows),
        "bound": max(len(r["bound"]) for r in rows),
    }
    print(f"{'id':<{widths['id']}}  {'guarantee':<{widths['bound']}}  "
          f"stochastic  problems")
    for r in rows:
        accepts = ",".join(r["accepts"])
        flag = "yes" if r["stochastic"] else "no"
        print(f"{r['id']:<{widths['id']}}  {r['bound']:<{widths['bound']}}  "
              f"{flag:<10}  {accepts}")
    return EXIT_OK


def _cmd_run(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = registry.run_experiment(cfg)
    except registry.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BoundViolation, InvariantBroken, AssertionError) as exc:
        print(f"guarantee failed: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except Exception as exc:
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    summary = result.summary()
    if args.out:
        try:
            paths = registry.write_artifacts(result, args.out)
        except OSError as exc:
            print(f"runtime failure: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        summary["artifacts"] = [os.path.basename(p) for p in paths]
    print(json.dumps(summary, indent=2, sort_keys=True))
    if result.passed is False:
        return EXIT_BOUND
    return EXIT_OK


def _cmd_suite(args) -> int:
    outcomes = suites.run_suite(filter_str=args.filter, threads=args.threads)
    if not outcomes:
        print(f"no criteria match filter {args.filter!r}", file=sys.stderr)
        return EXIT_CONFIG
    for out in outcomes:
        print(out.line)
    failed = [o for o in outcomes if not o.passed]
    print(f"{len(outcomes) - len(failed)}/{len(outcomes)} criteria passed")
    return EXIT_OK if not failed else EXIT_BOUND


def _result_files(root: str) -> list:
    found = []
    direct = os.path.join(root, "result.json")
    if os.path.isfile(direct):
        found.append(direct)
    for entry in sorted(os.listdir(root)):
        sub = os.path.join(root, entry, "result.json")
        if os.path.isfile(sub):
            found.append(sub)
    return found


def _cmd_report(args) -> int:
    if not os.path.isdir(args.indir):
        print(f"config error: {args.indir} is not a directory", file=sys.stderr)
        return EXIT_CONFIG
    paths = _result_files(args.indir)
    if not paths:
        print(f"config error: no result.json under {args.indir}",
              file=sys.stderr)
        return EXIT_CONFIG
    rows = []
    for path in paths:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"runtime failure: {path}: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        bound = data.get("bound") or {}
        if bound.get("passed") is True:
            verified = bound.get("id", "")
        else:
            verified = ""
        calls = data.get("oracle_calls") or {}
        call_str = ", ".join(f"{k}={v}" for k, v in sorted(calls.items()))
        rows.append((data.get("algorithm", "?"), verified,
                     str(data.get("iterations", "")), call_str))
    print("| algorithm | rate verified | iterations | oracle calls |")
    print("|---|---|---|---|")
    for algo, verified, iters, calls in rows:
        print(f"| {algo} | {verified} | {iters} | {calls} |")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convexkit",
        description="Convex optimization methods with their guarantees "
                    "checked at runtime.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="catalog the runnable algorithms")

    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("--config", required=True, help="path to a JSON config")
    p_run.add_argument("--out", default=None,
                       help="directory for trace CSVs and result.json")

    p_suite = sub.add_parser("suite", help="run the acceptance criteria")
    p_suite.add_argument("--filter", default=None,
                         help="substring of a criterion name, tag, or index")
    p_suite.add_argument("--threads", type=int, default=None,
                         help="worker threads (default: CONVEXKIT_THREADS "
                              "or the CPU count)")

    p_rep = sub.add_parser("report", help="summarize result.json artifacts")
    p_rep.add_argument("--in", dest="indir", required=True,
                       help="directory holding result.json (or subdirs of them)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        return _cmd_list(args)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "suite":
        return _cmd_suite(args)
    if args.command == "report":
        return _cmd_report(args)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
