"""Command-line entry point.

Exit codes: 0 success, 1 internal error, 2 configuration error, 3 oracle or
census cap exceeded, 4 failing verdicts.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import traceback
from pathlib import Path

from ..ga import Population, random_population
from ..gp import GpPopulation, random_gp_population
from ..oracle import enumerate_offspring_ga, enumerate_offspring_gp
from ..schema import CapExceeded, schema_census
from ..streams import KEY_INIT, substream
from .config import ConfigError, ExperimentConfig, load_config
from .experiment import fmt, run_experiment
from .plot import CSV_HEADER, PlotError, PlotSpec, emit_plot
from .verify import verify_theorem

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_CAP, EXIT_VERDICT = 0, 1, 2, 3, 4


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schemaforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run-ga", "run a bitstring GA experiment"),
        ("run-gp", "run a GP experiment"),
        ("verify", "run verification suites"),
        ("oracle", "print the exact one-offspring distribution of the configured population"),
        ("census", "write the schema census of the configured population"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--seed", type=_u64)
        p.add_argument("--out", type=Path)
        p.add_argument("--trials", type=_positive)
    p = sub.add_parser("plot", help="plot columns of a harness CSV as SVG")
    p.add_argument("--csv", required=True, type=Path)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True, action="append")
    p.add_argument("--where", action="append", default=[], metavar="COLUMN=VALUE")
    p.add_argument("--series")
    p.add_argument("--out", type=Path, default=Path("plot.svg"))
    return parser


def _load(args, mode: str | None = None) -> ExperimentConfig:
    cfg = load_config(args.config, seed=args.seed, trials=args.trials,
                      out=str(args.out) if args.out else None)
    if mode and cfg.mode != mode:
        raise ConfigError(f"this command needs mode: {mode}, config has mode: {cfg.mode}",
                          None, str(args.config))
    return cfg


def _population(cfg: ExperimentConfig):
    if cfg.mode == "ga":
        if cfg.population:
            return Population.parse(cfg.population)
        return random_population(cfg.engine.n, cfg.length, substream(cfg.seed, KEY_INIT, 0))
    if cfg.population:
        return GpPopulation.parse(cfg.population)
    return random_gp_population(cfg.pset, cfg.engine)


def cmd_run(args, mode: str) -> int:
    cfg = _load(args, mode)
    arts = run_experiment(cfg)
    for path in arts.files:
        print(path)
    print("verdicts: " + ", ".join(f"{k}={v}" for k, v in arts.verdicts.items()))
    return EXIT_VERDICT if arts.failures else EXIT_OK


def cmd_verify(args) -> int:
    report = verify_theorem(_load(args))
    for row in report.rows:
        if row.verdict in ("mismatch", "bound-violated", "coverage-failed"):
            print(f"FAIL {row.suite} #{row.instance}: {row.detail}")
    print(report.path)
    print("verdicts: " + ", ".join(f"{k}={v}" for k, v in report.verdicts.items()))
    return EXIT_VERDICT if report.failures else EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _load(args)
    pop = _population(cfg)
    try:
        if cfg.mode == "ga":
            dist = enumerate_offspring_ga(pop, cfg.fitness, cfg.engine)
        else:
            dist = enumerate_offspring_gp(pop, cfg.fitness, cfg.engine)
    except ValueError as exc:
        raise ConfigError(str(exc), None, str(args.config)) from None
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "oracle.csv"
    with path.open("w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("genotype", "probability"))
        for g, p in dist.support:
            w.writerow((str(g), str(p)))
            print(f"{g}\t{p}")
    return EXIT_OK


def cmd_census(args) -> int:
    cfg = _load(args, "ga")
    pop = _population(cfg)
    rows = schema_census(pop, cfg.fitness, cfg.census_order)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "census.csv"
    with path.open("w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("schema", "count", "fitness"))
        for r in rows:
            w.writerow((str(r.schema), r.count, fmt(r.fitness)))
    print(path)
    return EXIT_OK


def cmd_plot(args) -> int:
    where = []
    for item in args.where:
        if "=" not in item:
            raise PlotError(f"--where expects COLUMN=VALUE, got {item!r}")
        col, value = item.split("=", 1)
        where.append((col, value))
    spec = PlotSpec(x=args.x, y=tuple(args.y), out=args.out, where=tuple(where), series=args.series)
    print(emit_plot(args.csv, spec))
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("run-ga", "run-gp"):
            return cmd_run(args, args.command[-2:])
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "oracle":
            return cmd_oracle(args)
        if args.command == "census":
            return cmd_census(args)
        return cmd_plot(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (PlotError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
