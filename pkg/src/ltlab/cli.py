"""Command-line entry points for running suites and rendering reports."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, runner


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ltlab",
        description="Audit bench for spectral moment bounds of Schrodinger operators.",
    )
    parser.add_argument("--version", action="version", version=f"ltlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_cmd = sub.add_parser("run", help="execute a scenario suite")
    run_cmd.add_argument("--config", required=True, help="path to a suite config JSON")
    run_cmd.add_argument("--jobs", type=int, default=1, help="scenario-level parallelism")
    run_cmd.add_argument("--out", default="ltlab-out", help="output directory")

    report_cmd = sub.add_parser("report", help="render a manifest")
    report_cmd.add_argument("--manifest", required=True, help="path to manifest.json")
    report_cmd.add_argument(
        "--format", required=True, choices=("csv", "json", "md"), dest="fmt"
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        try:
            manifest = runner.run_config(args.config, jobs=args.jobs, out_dir=args.out)
        except runner.ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        failing = [s["name"] for s in manifest["scenarios"] if s["error"]]
        for name in failing:
            print(f"scenario error: {name}", file=sys.stderr)
        total = sum(len(s["reports"]) for s in manifest["scenarios"])
        print(
            f"{manifest['suite']}: {total} reports, "
            f"global pass = {manifest['global_pass']} -> {args.out}"
        )
        return 0 if manifest["global_pass"] else 1
    if args.command == "report":
        path = Path(args.manifest)
        try:
            manifest = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"manifest error: {exc}", file=sys.stderr)
            return 2
        if not isinstance(manifest, dict) or "scenarios" not in manifest:
            print("manifest error: missing scenarios", file=sys.stderr)
            return 2
        sys.stdout.write(runner.render_report(manifest, args.fmt))
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
