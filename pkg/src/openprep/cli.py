"""Command-line entry point: ``openprep run | list | validate``.

Exit codes: 0 success, 1 configuration/validation failure, 2 a scenario
procedure failed at runtime (the report is still written).
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import FORMATS, load_config, validate_config
from .errors import ConfigError
from .scenario import builtin_path, list_scenarios, run_scenario

OUTPUT_DIR_ENV = "OPENPREP_OUTPUT_DIR"
EXTENSIONS = {"table": "txt", "json": "json", "csv": "csv"}


def _tolerance(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("expected KEY=VALUE, e.g. cp=1e-8")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="openprep",
        description="Compare state-preparation procedures on correlated system-environment states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write its report")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("-c", "--config", type=Path, help="path to a YAML scenario config")
    src.add_argument("-s", "--scenario", help="name of a built-in scenario (see 'openprep list')")
    run.add_argument("-o", "--output", type=Path,
                     help=f"report path (default: ${OUTPUT_DIR_ENV}/<scenario>.<ext> if set, else stdout)")
    run.add_argument("-f", "--format", choices=FORMATS, help="report format (default: config value or table)")
    run.add_argument("--seed", type=int, help="override the config seed (only affects random states)")
    run.add_argument("--tolerance", type=_tolerance, action="append", default=[], metavar="KEY=VALUE",
                     help="override a tolerance (cp, probability); repeatable")

    sub.add_parser("list", help="list built-in scenarios")

    val = sub.add_parser("validate", help="check a config file without running it")
    val.add_argument("config", type=Path)
    return parser


def _cmd_run(args) -> int:
    path = args.config
    try:
        if path is None:
            path = builtin_path(args.scenario)
        cfg = load_config(path, args.seed, dict(args.tolerance))
    except ConfigError as exc:
        for f in exc.findings:
            print(f"error: {f}", file=sys.stderr)
        return 1
    report = run_scenario(cfg)
    fmt = args.format or cfg.format
    text = report.render(fmt)

    out = args.output
    if out is None and os.environ.get(OUTPUT_DIR_ENV):
        out = Path(os.environ[OUTPUT_DIR_ENV]) / f"{cfg.name}.{EXTENSIONS[fmt]}"
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        print(f"wrote {out}", file=sys.stderr)

    if report.failed:
        for p in report.data["procedures"]:
            if p["status"] != "ok":
                print(f"error: procedure {p['label']!r}: {p['error']}", file=sys.stderr)
        return 2
    return 0


def _cmd_list(args) -> int:
    for name, desc in list_scenarios():
        print(f"{name:<26} {desc}")
    return 0


def _cmd_validate(args) -> int:
    findings = validate_config(args.config)
    for f in findings:
        print(f"error: {f}", file=sys.stderr)
    if not findings:
        print(f"{args.config}: ok")
    return 1 if findings else 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return {"run": _cmd_run, "list": _cmd_list, "validate": _cmd_validate}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
