"""Command-line front end: one subcommand per registered experiment.

Exit codes: 0 all targets met, 2 ran but missed a target, 1 bad config
or I/O error.  Default report directory comes from $PRSBENCH_OUT_DIR
(falling back to ./reports), overridable per run with --out.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    EXPERIMENTS,
    OUT_DIR_ENV,
    REPORT_SCHEMA,
    ExperimentConfig,
    run_experiment,
    validate_config,
)


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="FILE", help="JSON config to start from")
    sub.add_argument("--seed", type=int, default=None, metavar="U64", help="master seed")
    sub.add_argument("--out", default=None, metavar="PATH", help="report file path")
    sub.add_argument("--threads", type=int, default=None, help="worker thread count")


def _add_param_flags(sub: argparse.ArgumentParser, name: str) -> None:
    for pspec in EXPERIMENTS[name].params:
        kw = {"type": pspec.kind, "default": None, "help": pspec.doc, "dest": pspec.name}
        if pspec.choices is not None:
            kw["choices"] = list(pspec.choices)
        sub.add_argument(_flag(pspec.name), **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prsbench",
        description="simulation experiments on pseudorandom-state distinguishers",
        epilog=f"reports land in $({OUT_DIR_ENV}) or ./reports unless --out is given",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name, spec in sorted(EXPERIMENTS.items()):
        sub = subs.add_parser(name, help=spec.doc)
        _add_common(sub)
        _add_param_flags(sub, name)
    val = subs.add_parser("validate", help="check a config without running it")
    val.add_argument("experiment", nargs="?", help="experiment name (or use --config)")
    _add_common(val)
    subs.add_parser("schema", help="print the report JSON schema")
    return parser


def _config_from_args(args: argparse.Namespace, experiment: str) -> ExperimentConfig:
    if args.config:
        config = ExperimentConfig.from_file(args.config)
        if experiment and config.experiment and config.experiment != experiment:
            raise ValueError(
                f"--config names {config.experiment!r} but subcommand is {experiment!r}"
            )
        if experiment:
            config.experiment = experiment
    else:
        config = ExperimentConfig(experiment=experiment)
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out = args.out
    if args.threads is not None:
        config.threads = args.threads
    if config.experiment in EXPERIMENTS:
        for pspec in EXPERIMENTS[config.experiment].params:
            value = getattr(args, pspec.name, None)
            if value is not None:
                config.params[pspec.name] = value
    return config


def _print_report(report) -> None:
    for name, t in report.targets.items():
        tag = "PASS" if t["pass"] else "FAIL"
        print(f"[{report.experiment}] {name}: {t['value']:.6g} {t['op']} {t['bound']:.6g} {tag}")
    verdict = "PASSED" if report.passed else "FAILED"
    print(f"[{report.experiment}] {verdict} in {report.wall_clock_s:.1f}s -> {report.path}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "schema":
        print(json.dumps(REPORT_SCHEMA, indent=2, sort_keys=True))
        return 0
    try:
        if args.command == "validate":
            config = _config_from_args(args, args.experiment or "")
            errs = validate_config(config)
            if errs:
                for e in errs:
                    print(e)
                return 1
            print(f"config ok: {config.experiment} seed={config.seed}")
            return 0
        config = _config_from_args(args, args.command)
        report = run_experiment(config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _print_report(report)
    return 0 if report.passed else 2


if __name__ == "__main__":
    sys.exit(main())
