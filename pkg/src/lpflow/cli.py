"""Command-line entry point: run, verify, resume, report.

Exit codes: 0 success, 2 configuration error, 3 blowup detected (or a
mid-run CFL violation), 4 verification failure, 5 I/O error.  The output
directory is resolved as: --output-dir flag, then the LPFLOW_OUTPUT_DIR
environment variable, then the config's output_dir.
"""

import argparse
import os
import sys
from pathlib import Path

from .checkpoint import CheckpointError
from .config import ConfigError, load_config

ENV_OUTPUT_DIR = "LPFLOW_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_VERIFY = 4
EXIT_IO = 5


def _resolve_output_dir(flag_value, config_value) -> Path:
    if flag_value:
        return Path(flag_value)
    env = os.environ.get(ENV_OUTPUT_DIR)
    if env:
        return Path(env)
    return Path(config_value)


def _cmd_run(args) -> int:
    from .runner import run

    config = load_config(args.config)
    out_dir = _resolve_output_dir(args.output_dir, config.output_dir)
    outcome = run(config, out_dir)
    print(outcome.message)
    if outcome.samples_path is not None:
        print(f"samples: {outcome.samples_path}")
        print(f"report:  {outcome.report_path}")
        print(f"checkpoint: {outcome.checkpoint_path}")
    return outcome.status


def _cmd_verify(args) -> int:
    from .verify import format_line, run_checks

    config = load_config(args.config)
    checks = run_checks(config)
    for r in checks:
        print(format_line(r))
    failed = [r for r in checks if not r.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


def _cmd_resume(args) -> int:
    from .runner import resume

    outcome = resume(args.checkpoint, args.until, args.output_dir or None)
    print(outcome.message)
    print(f"samples: {outcome.samples_path}")
    print(f"report:  {outcome.report_path}")
    return outcome.status


def _cmd_report(args) -> int:
    from .report import build_report, read_samples_csv, render_figures, write_report_json

    csv_path = Path(args.csv)
    metadata, history = read_samples_csv(csv_path)
    report = build_report(history, metadata)
    out_dir = csv_path.parent
    if args.format == "json":
        report_path = write_report_json(out_dir / "report.json", report)
        print(f"report:  {report_path}")
    else:
        for section in ("integrals", "suprema", "verdicts"):
            print(f"[{section}]")
            for key, value in report[section].items():
                print(f"  {key} = {value}")
    figures = render_figures(history, metadata, out_dir)
    for p in figures:
        print(f"figure:  {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpflow",
        description=(
            "Pseudospectral viscoelastic/MHD simulator with a "
            "Littlewood-Paley blowup-criteria monitor"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="advance a configured system and write outputs")
    p_run.add_argument("config", help="YAML configuration file")
    p_run.add_argument("--output-dir", default=None, help="override the output directory")
    p_run.set_defaults(func=_cmd_run)

    p_verify = sub.add_parser("verify", help="run the self-verification suite")
    p_verify.add_argument("config", help="YAML configuration file (grid section used)")
    p_verify.set_defaults(func=_cmd_verify)

    p_resume = sub.add_parser("resume", help="continue a checkpointed run")
    p_resume.add_argument("checkpoint", help="checkpoint file written by a previous run")
    p_resume.add_argument("--until", type=float, required=True, help="new final time")
    p_resume.add_argument("--output-dir", default=None, help="override the output directory")
    p_resume.set_defaults(func=_cmd_resume)

    p_report = sub.add_parser("report", help="rebuild the report and figures from a CSV")
    p_report.add_argument("csv", help="samples CSV written by a previous run")
    p_report.add_argument(
        "--format", choices=("json", "text"), default="json", help="report output format"
    )
    p_report.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CheckpointError as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
