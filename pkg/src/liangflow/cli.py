"""``liangflow`` command line: run sweeps, validate configs, print critical fields."""

from __future__ import annotations

import argparse
import logging
import sys
import time

from .errors import ConfigError, LiangflowError
from .harness import emit_csv, load_config, run_experiment, to_csv
from .model import ModelError, critical_field


def _run(args) -> int:
    if args.workers is not None and args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    cfg = load_config(args.config)
    out = args.out or cfg.output
    workers = args.workers if args.workers is not None else cfg.workers
    start = time.perf_counter()
    table = run_experiment(cfg, workers=workers)
    if out:
        emit_csv(table, out)
        print(f"wrote {len(table)} rows to {out} in {time.perf_counter() - start:.1f}s", file=sys.stderr)
    else:
        sys.stdout.write(to_csv(table))
    return 0


def _validate(args) -> int:
    cfg = load_config(args.config)
    n = len(cfg.lambda_grid) if cfg.is_aah else len(cfg.kappa_grid) * len(cfg.B_grid)
    print(f"ok: {cfg.experiment}, L={cfg.L}, {n} grid points, {len(cfg.times)} time samples")
    return 0


def _critical(args) -> int:
    try:
        value = critical_field(args.kappa)
    except ModelError as exc:
        raise ConfigError(str(exc)) from None
    print(format(value, ".17g"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liangflow", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the sweep described by a config file")
    run.add_argument("config")
    run.add_argument("--out", help="CSV output path (default: config 'output', else stdout)")
    run.add_argument("--workers", type=int, help="parallel worker processes")
    run.add_argument("--seedless", action="store_true", help="accepted for compatibility; nothing is random")
    run.set_defaults(func=_run)

    val = sub.add_parser("validate", help="parse and check a config file")
    val.add_argument("config")
    val.set_defaults(func=_validate)

    crit = sub.add_parser("critical-field", help="critical transverse field of the ANNNI chain")
    crit.add_argument("--kappa", type=float, required=True)
    crit.set_defaults(func=_critical)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except LiangflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
