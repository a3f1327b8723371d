"""``quantile-forge`` command line interface.

Exit codes: 0 success, 2 config/validation error, 3 invalid grid cell,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .distributions import DistributionSpec, parse_distribution
from .estimators import EstimatorId, expon_frac, optimal_weights, q7_exp_bias, type7_index
from .simulation import (
    CellError,
    CellMetrics,
    CellSpec,
    find_zero_bias_bracket,
    run_grid,
    zero_bias_quantile_search,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CELL = 3
EXIT_NUMERIC = 4

SEED_ENV = "QFORGE_SEED"

CSV_COLUMNS = (
    "distribution", "params", "estimator", "n", "q", "trials",
    "true_quantile", "bias", "variance", "mse", "se_bias", "seed",
)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    distributions: list[DistributionSpec]
    estimators: list[EstimatorId]
    sample_sizes: list[int]
    q_values: list[float]
    trials: int
    seed: int
    output_path: Optional[str] = None

    def cells(self) -> list[CellSpec]:
        return [
            CellSpec(dist, est, n, q, self.trials, self.seed)
            for dist in self.distributions
            for est in self.estimators
            for n in self.sample_sizes
            for q in self.q_values
        ]


def fmt_float(x: float) -> str:
    """Shortest repr that round-trips exactly."""
    return repr(float(x))


def grid_from_range(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic grid, snapped to 12 decimals so 0.05-steps print cleanly."""
    if not step > 0:
        raise ValueError("step must be > 0")
    if stop < start:
        raise ValueError("stop must be >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def parse_q_grid_text(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    return _check_q_values(grid_from_range(start, stop, step))


def _check_q_values(values: list[float]) -> list[float]:
    if not values:
        raise ValueError("q grid is empty")
    for q in values:
        if not 0.0 < q < 1.0:
            raise ValueError(f"q value {q!r} is outside (0, 1)")
    return values


def _parse_seed(value, source: str) -> int:
    try:
        seed = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{source}: seed must be an integer, got {value!r}") from None
    if isinstance(value, (bool, float)) or not 0 <= seed < 2**64:
        raise ConfigError(f"{source}: seed must be an unsigned 64-bit integer, got {value!r}")
    return seed


def _nonempty_list(doc: dict, key: str) -> list:
    value = doc.get(key)
    if not isinstance(value, list):
        raise ConfigError(f"field '{key}': expected a list")
    if not value:
        raise ConfigError(f"field '{key}': list is empty")
    return value


def _parse_estimator(obj) -> EstimatorId:
    if isinstance(obj, str):
        return EstimatorId.parse(obj)
    if isinstance(obj, dict) and "name" in obj:
        name = str(obj["name"]).upper()
        if name == "Q11":
            return EstimatorId("Q11", i=int(obj["i"]), m=int(obj["m"]))
        return EstimatorId.parse(name)
    raise ValueError("estimator must be a tag string or an object with a 'name' key")


def parse_config(text: str) -> RunConfig:
    """Parse a JSON run configuration, raising ConfigError with the offending
    line or field."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object")

    dists, ests = [], []
    for k, obj in enumerate(_nonempty_list(doc, "distributions")):
        try:
            dists.append(parse_distribution(obj))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"field 'distributions[{k}]': {exc}") from None
    for k, obj in enumerate(_nonempty_list(doc, "estimators")):
        try:
            ests.append(_parse_estimator(obj))
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"field 'estimators[{k}]': {exc}") from None

    sizes = _nonempty_list(doc, "sample_sizes")
    for k, n in enumerate(sizes):
        if not isinstance(n, int) or isinstance(n, bool) or n < 2:
            raise ConfigError(f"field 'sample_sizes[{k}]': expected an integer >= 2, got {n!r}")

    grid = doc.get("q_grid")
    try:
        if isinstance(grid, dict):
            missing = {"start", "stop", "step"} - grid.keys()
            if missing:
                raise ValueError(f"missing keys {sorted(missing)}")
            q_values = grid_from_range(float(grid["start"]), float(grid["stop"]), float(grid["step"]))
        elif isinstance(grid, list):
            q_values = [float(q) for q in grid]
        else:
            raise ValueError("expected {start, stop, step} or a list of values")
        _check_q_values(q_values)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"field 'q_grid': {exc}") from None

    trials = doc.get("trials")
    if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
        raise ConfigError(f"field 'trials': expected a positive integer, got {trials!r}")
    if "seed" not in doc:
        raise ConfigError("field 'seed': missing")
    seed = _parse_seed(doc["seed"], "field 'seed'")
    out = doc.get("output_path")
    if out is not None and not isinstance(out, str):
        raise ConfigError("field 'output_path': expected a string")

    return RunConfig(dists, ests, list(sizes), q_values, trials, seed, out)


def load_config(path: str | os.PathLike) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def write_results(rows: Sequence[tuple[CellSpec, CellMetrics]], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for cell, m in rows:
        writer.writerow([
            cell.dist.family, cell.dist.param_text, cell.estimator.tag, cell.n,
            fmt_float(cell.q), m.trials, fmt_float(m.true_quantile), fmt_float(m.bias),
            fmt_float(m.variance), fmt_float(m.mse), fmt_float(m.se_bias), cell.seed,
        ])


def results_csv(rows: Sequence[tuple[CellSpec, CellMetrics]]) -> str:
    buf = io.StringIO()
    write_results(rows, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = _parse_seed(args.seed, "--seed")
    elif os.environ.get(SEED_ENV):
        config.seed = _parse_seed(os.environ[SEED_ENV], SEED_ENV)

    rows = run_grid(config.cells(), threads=args.threads)
    text = results_csv(rows)
    out = args.out or config.output_path
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as fh:
            fh.write(text)
        print(f"wrote {len(rows)} rows to {out}", file=sys.stderr)
    return EXIT_OK


def cmd_analytic_bias(args) -> int:
    if args.n < 2:
        raise ConfigError("--n must be >= 2")
    try:
        grid = parse_q_grid_text(args.q_grid)
    except ValueError as exc:
        raise ConfigError(f"--q-grid: {exc}") from None
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(("q", "bias_q7", "frac_f"))
    for q in grid:
        writer.writerow((fmt_float(q), fmt_float(q7_exp_bias(q, args.n)), fmt_float(expon_frac(q, args.n))))
    return EXIT_OK


def cmd_zero_bias(args) -> int:
    if args.n < 2:
        raise ConfigError("--n must be >= 2")
    lo, hi = find_zero_bias_bracket(args.n)
    print(fmt_float(zero_bias_quantile_search(args.n, lo, hi)))
    return EXIT_OK


def cmd_weights(args) -> int:
    try:
        w = optimal_weights(args.n, args.i, args.m, args.q)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    i10, _ = type7_index(args.q, args.n)
    if args.i == i10 and args.m == 1:
        flag = "≡ Q10"
    elif args.i == 0 and args.m == args.n:
        flag = "≡ MLE"
    else:
        flag = "-"

    print(f"n={w.n} i={w.i} m={w.m} q={fmt_float(w.q)}")
    print(f"{'weight':<10} {'order stat':<12} value")
    if w.f is not None:
        print(f"{'f':<10} {'X(%d)' % w.i:<12} {fmt_float(w.f)}")
    for k, fk in enumerate(w.fs, start=1):
        print(f"{'f%d' % k:<10} {'X(%d)' % (w.i + k):<12} {fmt_float(fk)}")
    print(f"beta {fmt_float(w.beta)}")
    print(f"variance {fmt_float(w.analytic_variance)}")
    print(f"expectation {fmt_float(w.expectation())}")
    print(f"flag {flag}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quantile-forge",
        description="Quantile estimators, exponential-model bias formulas and Monte Carlo benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a Monte Carlo grid from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV output path ('-' for stdout); overrides output_path")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", help=f"overrides {SEED_ENV} and the config seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analytic-bias", help="type-7 exponential bias and Q10 weight over a q grid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q-grid", required=True, metavar="START:STOP:STEP")
    p.set_defaults(func=cmd_analytic_bias)

    p = sub.add_parser("zero-bias", help="q at which the type-7 estimator is unbiased for exponentials")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_zero_bias)

    p = sub.add_parser("weights", help="optimal Q11 weights and analytic variance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.set_defaults(func=cmd_weights)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CellError as exc:
        print(f"error: invalid cell: {exc}", file=sys.stderr)
        return EXIT_CELL
    except ArithmeticError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
