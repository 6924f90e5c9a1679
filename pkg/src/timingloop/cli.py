"""Command line entry point: ``timingloop {run,sweep,capacity,codec-bench,estimate}``."""
from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import fields

from .capacity import DiscretizedDist, capacity_exponential, capacity_numeric
from .channel import ChannelConfigError
from .codec import ResourceError, count_decode_errors
from .harness.config import (SEED_ENV, ConfigError, ExperimentConfig, coerce_field, default_seed,
                             load_config, save_config)
from .harness.episode import run_episode
from .harness.estimation import estimation_experiment
from .harness.output import sweep_chart, trajectory_chart, write_svg
from .harness.sweep import default_capacity_grid, episode_seed, sweep_capacity

CODEC_COLUMNS = ("n", "n_prime", "rate_nats", "capacity_nats", "trials", "errors",
                 "error_rate", "std_error")
CODEC_SCHEMA = "timingloop.codec/v1"
CAPACITY_COLUMNS = ("capacity_nats", "chi", "iterations", "converged")
CAPACITY_SCHEMA = "timingloop.capacity/v1"


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags below override its values")
    group = p.add_argument_group("config overrides")
    for f in fields(ExperimentConfig):
        flag = "--" + f.name.replace("_", "-")
        group.add_argument(flag, dest=f"cfg_{f.name}", default=None, metavar=f.name.upper(),
                           help=f"override '{f.name}'")
    p.add_argument("--save-config", help="write the effective config to this path")


def _resolve_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig(seed=default_seed())
    overrides = {}
    for f in fields(ExperimentConfig):
        value = getattr(args, f"cfg_{f.name}")
        if value is not None:
            overrides[f.name] = coerce_field(f.name, value)
    if overrides:
        config = config.replace(**overrides)
    if args.save_config:
        save_config(config, args.save_config)
    return config


def _write_rows(path, schema, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: {schema}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


def cmd_run(args) -> int:
    config = _resolve_config(args)
    trace = run_episode(config, episode_seed(config.seed, 0, args.run_index))
    trace.to_csv(args.out)
    if args.svg:
        write_svg(trajectory_chart([trace], [f"C = {config.capacity_bits:.4g} bits/step"]), args.svg)
    state = "diverged" if trace.diverged else f"|X[end]| = {trace.final_abs_state:.3g}"
    print(f"success={trace.success} {state} lqr_cost={trace.lqr_cost:.6g} -> {args.out}")
    return 0


def cmd_sweep(args) -> int:
    config = _resolve_config(args)
    if args.grid:
        grid = args.grid
    else:
        grid = [float(c) for c in default_capacity_grid(config.a, args.points)]
    result = sweep_capacity(config, grid)
    result.to_csv(args.out)
    if args.svg:
        write_svg(sweep_chart(result, config.a), args.svg)
    for row in result.rows:
        print(f"C={row.capacity_bits:.5f} success={row.success_fraction:.3f} "
              f"({row.successes}/{row.runs}) mean_lqr={row.mean_lqr_cost:.5g}")
    bad = result.monotonicity_violations()
    if bad:
        print(f"warning: success fraction drops beyond 2 SE at grid index {bad}", file=sys.stderr)
    return 0


def cmd_capacity(args) -> int:
    if args.delay == "exponential" and not args.numeric:
        row = (capacity_exponential(args.mean), (math.e - 1) * args.mean, 0, True)
    else:
        if args.delay == "exponential":
            dist = DiscretizedDist.exponential(args.mean, args.step, args.truncation)
            step = args.step
        else:
            dist = DiscretizedDist.geometric(args.mean, int(args.truncation) if args.truncation else None)
            step = 1.0
        result = capacity_numeric(dist, grid_step=step, tol=args.tol)
        row = (result.capacity_nats_per_sec, result.optimal_chi, result.iterations, result.converged)
    print(",".join(CAPACITY_COLUMNS))
    print(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    if args.out:
        _write_rows(args.out, CAPACITY_SCHEMA, CAPACITY_COLUMNS, [row])
    return 0 if row[3] else 1


def cmd_codec_bench(args) -> int:
    rows = []
    for n in args.n:
        for ratio in args.ratios:
            n_prime = max(1, round(n * ratio))
            r = count_decode_errors(n, n_prime, args.mean_s, args.trials, args.seed,
                                    max_bits=args.max_bits)
            rows.append((r.n, r.n_prime, r.rate_nats, r.capacity_nats, r.trials, r.errors,
                         r.error_rate, r.std_error))
            print(f"n={n} n'={n_prime} R/C={r.rate_nats / r.capacity_nats:.3f} "
                  f"error_rate={r.error_rate:.4f} +- {r.std_error:.4f}")
    if args.out:
        _write_rows(args.out, CODEC_SCHEMA, CODEC_COLUMNS, rows)
    return 0


def cmd_estimate(args) -> int:
    config = _resolve_config(args)
    result = estimation_experiment(config)
    result.to_csv(args.out)
    for row in result.rows:
        print(f"n={row.n} n'={row.n_prime} t_n={row.t_n:.3f} eps={row.epsilon:g} "
              f"P(err>eps)={row.p_exceed:.3f} MI={row.mi_plugin:.3f}+-{row.mi_se:.3f} "
              f"bound={row.mi_bound:.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="timingloop",
        description="Control and estimation of an unstable plant over a timing channel.",
        epilog=f"The default seed is read from ${SEED_ENV} when no config or flag sets it.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one episode and write its trace CSV")
    _add_config_flags(p)
    p.add_argument("--run-index", type=int, default=0, help="episode index within the seed")
    p.add_argument("--out", default="trace.csv")
    p.add_argument("--svg", help="also write a trajectory chart")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="success fraction over a capacity grid")
    _add_config_flags(p)
    p.add_argument("--grid", type=_float_list, help="capacities in bits/step, comma separated")
    p.add_argument("--points", type=int, default=13,
                   help="size of the default grid from 0.5 to 2 times log2(a)")
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--svg", help="also write the phase-transition chart")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("capacity", help="timing capacity of a delay law")
    p.add_argument("--delay", choices=("exponential", "geometric"), default="exponential")
    p.add_argument("--mean", type=float, default=1.0, help="mean service delay E(S)")
    p.add_argument("--numeric", action="store_true", help="run the numeric solver for exponential delays")
    p.add_argument("--step", type=float, default=0.05, help="lattice step of the discretization")
    p.add_argument("--truncation", type=float, default=25.0,
                   help="support cut-off (in steps for geometric delays)")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--out", help="also write the row to this CSV file")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("codec-bench", help="Monte Carlo decode-error rates of random timing codes")
    p.add_argument("--n", type=_int_list, default=[4, 8, 12], help="codeword lengths")
    p.add_argument("--ratios", type=_float_list, default=[0.5, 1.5],
                   help="source bits per symbol n'/n")
    p.add_argument("--mean-s", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-bits", type=int, default=18)
    p.add_argument("--out", help="CSV of the error rates")
    p.set_defaults(func=cmd_codec_bench)

    p = sub.add_parser("estimate", help="open-loop estimation error versus n")
    _add_config_flags(p)
    p.add_argument("--out", default="estimation.csv")
    p.set_defaults(func=cmd_estimate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = default_seed()
        return args.func(args)
    except (ConfigError, ChannelConfigError, ResourceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
