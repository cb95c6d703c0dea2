"""Command-line interface: run scenarios, sweep directories, inspect logs.

Exit codes: 0 success, 2 invalid scenario, 3 run diverged (metrics are still
written in that case).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_scenario
from .errors import ScenarioError
from .harness import compute_metrics, read_log, run_scenario, write_log

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DIVERGED = 3


def _parse_overrides(pairs):
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ScenarioError(f"override {pair!r} is not key=value")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _run_one(path: str, out_dir: Path, overrides: dict) -> int:
    scenario = load_scenario(path, overrides)
    log, metrics = run_scenario(scenario)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / f"{scenario.name}.csv"
    metrics_path = out_dir / f"{scenario.name}.metrics.json"
    write_log(log, log_path)
    metrics_path.write_text(json.dumps(metrics.as_dict(), indent=2) + "\n")
    print(f"{scenario.name}: {len(log)} records -> {log_path}")
    print(json.dumps(metrics.as_dict(), indent=2))
    return EXIT_DIVERGED if metrics.diverged else EXIT_OK


def cmd_run(args) -> int:
    return _run_one(args.scenario, Path(args.out), _parse_overrides(args.override))


def cmd_sweep(args) -> int:
    paths = sorted(Path(args.directory).glob("*.cfg"))
    if not paths:
        print(f"no *.cfg files in {args.directory}", file=sys.stderr)
        return EXIT_INVALID
    worst = EXIT_OK
    for path in paths:
        code = _run_one(str(path), Path(args.out), {})
        worst = max(worst, code)
    return worst


def cmd_metrics(args) -> int:
    log = read_log(args.log)
    print(json.dumps(compute_metrics(log).as_dict(), indent=2))
    return EXIT_OK


def cmd_compare(args) -> int:
    out = {}
    for label, path in (("a", args.log_a), ("b", args.log_b)):
        out[label] = {"path": path, **compute_metrics(read_log(path)).as_dict()}
    print(json.dumps(out, indent=2))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--override", action="append", metavar="KEY=VALUE")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run every *.cfg in a directory")
    p_sweep.add_argument("directory")
    p_sweep.add_argument("--out", default=".", help="output directory")
    p_sweep.set_defaults(func=cmd_sweep)

    p_metrics = sub.add_parser("metrics", help="metrics for an existing log")
    p_metrics.add_argument("log")
    p_metrics.set_defaults(func=cmd_metrics)

    p_cmp = sub.add_parser("compare", help="metrics for two logs side by side")
    p_cmp.add_argument("log_a")
    p_cmp.add_argument("log_b")
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
