"""Command-line entry point.

    oddinls evolve      --config run.json [--out DIR] [--seed N] [--linear-only]
    oddinls convergence --config run.json
    oddinls hardy       --config run.json --seed 7
    oddinls scatter     --config run.json
    oddinls sweep       --config run.json --workers 4

Exit codes: 0 success, 2 configuration error, 3 numerical fault.  On
failure a JSON error record is printed to stdout and written to
``<out>/error.json``.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..domain import DomainError
from ..integrator import NumericalFault
from .config import EXPERIMENTS, ConfigError, load_config, validate
from .drivers import RUNNERS, run_sweep
from .io import save_checkpoint, write_json

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oddinls", description="Odd-data INLS split-step experiments")
    sub = ap.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides config output_dir)")
        p.add_argument("--workers", type=int, default=1, help="parallel runs for sweep")
        p.add_argument("--seed", type=int, help="seed for randomised suites (u64)")
        p.add_argument("--linear-only", action="store_true", help="switch the nonlinearity off (test hook)")
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def _fail(code: int, exc: BaseException, out: Path | None) -> int:
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(record, sort_keys=True))
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            write_json(record, out / "error.json")
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out) if args.out else None
    try:
        cfg = load_config(args.config)
        changes = {}
        if args.seed is not None:
            changes["seed"] = args.seed
        if args.linear_only:
            changes["linear_only"] = True
        if changes:
            cfg = validate(cfg.replace(**changes))
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        if out is None:
            out = Path(cfg.output_dir or f"runs/{args.experiment}")
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc, out)

    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.experiment == "sweep":
            report = run_sweep(cfg, out, workers=args.workers)
        else:
            report = RUNNERS[args.experiment](cfg, out)
    except NumericalFault as exc:
        save_checkpoint(exc.last_good, out / "last_good.inls", cfg.make_params())
        return _fail(EXIT_NUMERIC, exc, out)
    except DomainError as exc:
        return _fail(EXIT_CONFIG, exc, out)
    logging.getLogger(__name__).info("wrote %s", out)
    print(json.dumps({"experiment": args.experiment, "out": str(out), "status": "ok"}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
