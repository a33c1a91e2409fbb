"""Command line entry points: ``wdmring sweep`` and ``wdmring advise``.

Exit codes: 0 success, 1 configuration or runtime failure, 3 completed but
some simulation did not reach its convergence target.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .sweep import ConfigError, ExperimentConfig, advise_report, rows_to_csv, run_sweep

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FLAGGED = 3


def _apply_override(raw: dict, assignment: str) -> None:
    """Apply a --set key=value override; the key is a dotted JSON path."""
    if "=" not in assignment:
        raise ConfigError(f"--set {assignment!r}: expected key=value")
    path, _, text = assignment.partition("=")
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text  # bare strings are fine: --set traffic.fanout=mc
    node = raw
    keys = path.split(".")
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set {path}: {k} is not an object")
    node[keys[-1]] = value


def _load_config(args) -> ExperimentConfig:
    raw: dict = {}
    if args.config:
        raw = json.loads(Path(args.config).read_text())
    for assignment in args.set or []:
        _apply_override(raw, assignment)
    cfg = ExperimentConfig.from_dict(raw)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.engine is not None:
        cfg.engine = args.engine
    if args.strategy is not None:
        cfg.strategy = args.strategy
    if args.threads is not None:
        cfg.threads = args.threads
    if getattr(args, "out", None):
        cfg.output = args.out
    cfg.__post_init__()  # re-validate after overrides
    return cfg


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file (see README for schema)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config field, e.g. --set traffic.gamma=0.5")
    p.add_argument("--seed", type=int, help="run seed")
    p.add_argument("--engine", choices=("analytic", "simulate", "oracle"))
    p.add_argument("--strategy", choices=("sp", "oc", "both", "auto"))
    p.add_argument("--threads", type=int, help="simulation worker streams")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wdmring",
                                     description="WDM ring multicast capacity toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    p_sweep = sub.add_parser("sweep", help="run a sweep and emit CSV")
    _add_common(p_sweep)
    p_sweep.add_argument("--out", help="output CSV path (default: stdout)")
    p_adv = sub.add_parser("advise", help="routing advice for one scenario")
    _add_common(p_adv)

    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.command == "sweep":
            rows, flagged = run_sweep(cfg)
            csv_text = rows_to_csv(rows)
            if cfg.output:
                Path(cfg.output).write_text(csv_text)
            else:
                sys.stdout.write(csv_text)
            return EXIT_FLAGGED if flagged else EXIT_OK
        sys.stdout.write(advise_report(cfg))
        return EXIT_OK
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
