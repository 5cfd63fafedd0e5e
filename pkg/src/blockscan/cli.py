"""Command-line interface: detect, simulate, calibrate, baseline.

A flat key=value config file can supply any flag's value (``--config``);
flags given on the command line win. Exit status is 0 on success, 1 on a
runtime error (message on stderr), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from typing import Optional

import numpy as np

from .calibration import CutoffSpec, gumbel_reference_quantile, quantile_max_gcirc
from .baselines import bh_procedure, one_sided_pvalues, yao_l1
from .detect import (detect_multi_one_sided, detect_multi_two_sided, detect_one_sided,
                     detect_two_sided)
from .genome_io import emit_result, read_csv
from .simulate import SimConfig, run, table_row, write_tables
from .types import Panel, Series, WindowConfig
from .variance import sigma2_order_stat
from .windows import uniform_max_stat

_MODES = {
    "one": detect_one_sided,
    "two": detect_two_sided,
    "multi-one": detect_multi_one_sided,
    "multi-two": detect_multi_two_sided,
}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key=value file supplying defaults for any flag")
    sub.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="blockscan",
                                     description="clustered-signal detection in long sequences")
    subs = parser.add_subparsers(dest="command", required=True)
    table = {}

    p_detect = subs.add_parser("detect", help="detect signal clusters in a CSV")
    p_detect.add_argument("--input", required=True)
    p_detect.add_argument("--mode", choices=sorted(_MODES), default="one")
    p_detect.add_argument("--k", type=int, default=None,
                          help="window size; omitted = rule-of-thumb selection")
    p_detect.add_argument("--m", type=int, default=None, help="variance-estimation window")
    p_detect.add_argument("--alpha", type=float, default=0.05)
    p_detect.add_argument("--b", type=int, default=10_000, help="Monte Carlo sample count")
    p_detect.add_argument("--gamma", type=float, default=None)
    p_detect.add_argument("--delta", type=float, default=None)
    p_detect.add_argument("--samples", default=None, help="comma-separated sample columns")
    p_detect.add_argument("--out", default="blockscan", help="output path prefix")
    _add_common(p_detect)
    table["detect"] = p_detect

    p_sim = subs.add_parser("simulate", help="run a desk-scale simulation scenario")
    p_sim.add_argument("--table", choices=["2", "5", "bh", "null"], required=True)
    p_sim.add_argument("--p", type=int, default=600)
    p_sim.add_argument("--k", type=int, default=None)
    p_sim.add_argument("--noise", default=None,
                       help="noise family (defaults to gauss, or gauss_kappa1 for table 5)")
    p_sim.add_argument("--reps", type=int, default=200)
    p_sim.add_argument("--alpha", type=float, default=0.05)
    p_sim.add_argument("--b", type=int, default=10_000)
    p_sim.add_argument("--no-baseline", action="store_true",
                       help="skip the quadratic-time baseline columns")
    p_sim.add_argument("--out", default=None, help="table output path prefix")
    _add_common(p_sim)
    table["simulate"] = p_sim

    p_cal = subs.add_parser("calibrate", help="emit a Monte Carlo cutoff record")
    p_cal.add_argument("--p", type=int, required=True)
    p_cal.add_argument("--k", type=int, required=True)
    p_cal.add_argument("--alpha", type=float, default=0.05)
    p_cal.add_argument("--b", type=int, default=10_000)
    p_cal.add_argument("--gumbel", action="store_true",
                       help="also print the closed-form reference value (reference only)")
    _add_common(p_cal)
    table["calibrate"] = p_cal

    p_base = subs.add_parser("baseline", help="run a comparison method on a CSV")
    p_base.add_argument("--method", choices=["yao", "bh"], required=True)
    p_base.add_argument("--input", required=True)
    p_base.add_argument("--delta0", type=float, default=1.0)
    p_base.add_argument("--alpha", type=float, default=0.05)
    p_base.add_argument("--m", type=int, default=None)
    p_base.add_argument("--samples", default=None)
    _add_common(p_base)
    table["baseline"] = p_base

    return parser, table


def _load_config(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {ln}: expected key = value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(sub: argparse.ArgumentParser, values: dict) -> None:
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        if key == "config" or key not in actions:
            raise ValueError(f"unknown config key {key!r}")
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes")
        elif action.type is not None:
            defaults[key] = action.type(raw)
        else:
            defaults[key] = raw
    sub.set_defaults(**defaults)


def _read_input(path: str, samples: Optional[str]):
    wanted = [s.strip() for s in samples.split(",")] if samples else None
    return read_csv(path, wanted)


def _cmd_detect(args) -> int:
    data, gmap, dropped = _read_input(args.input, args.samples)
    if dropped:
        print(f"dropped {dropped} rows with missing values", file=sys.stderr)
    multi = args.mode.startswith("multi")
    if multi and not isinstance(data, Panel):
        raise ValueError(f"--mode {args.mode} needs a multi-column input")
    if not multi and isinstance(data, Panel):
        raise ValueError(f"--mode {args.mode} needs a single sample column (use --samples)")
    values = data.values.mean(axis=0) if isinstance(data, Panel) else data.values
    p = values.size
    k = args.k
    if k is None:
        choice = uniform_max_stat(values, sigma=1.0)
        k = max(1, min(choice.k_recommended, p // 2))
        print(f"rule-of-thumb window: m_hat={choice.m_hat} -> k={k}", file=sys.stderr)
    config = WindowConfig(k=k, m=args.m, alpha=args.alpha, gamma=args.gamma,
                          delta=args.delta, mc_reps=args.b, seed=args.seed)
    result = _MODES[args.mode](data, config)
    paths = emit_result(result, args.out, p, genome_map=gmap)
    print(f"omnibus_rejected={str(result.rejected_null).lower()} "
          f"breakpoints={list(result.breakpoints)}")
    for path in paths:
        print(f"wrote {path}")
    return 0


def _cmd_simulate(args) -> int:
    k = args.k if args.k is not None else int(math.isqrt(args.p))
    window = WindowConfig(k=k, alpha=args.alpha, mc_reps=args.b, seed=args.seed)
    rows = []
    if args.table == "2":
        noise = args.noise or "gauss"
        base = SimConfig(p=args.p, config_kind="one_sided_table1", noise=noise,
                         reps=args.reps, window=window, method="proposed_one_sided")
        rep_p = run(base)
        rep_y = None
        if not args.no_baseline:
            rep_y = run(dataclasses.replace(base, method="yao"))
        rows.append(table_row(f"p={args.p} {noise}", rep_p, rep_y))
    elif args.table == "5":
        noise = args.noise or "gauss_kappa1"
        base = SimConfig(p=args.p, config_kind="two_sided_table3", noise=noise,
                         reps=args.reps, window=window, method="proposed_two_sided")
        rows.append(table_row(f"p={args.p} {noise} estimated", run(base)))
        rows.append(table_row(f"p={args.p} {noise} true",
                              run(dataclasses.replace(base, use_true_params=True))))
    elif args.table == "bh":
        noise = args.noise or "gauss"
        base = SimConfig(p=args.p, config_kind="one_sided_table1", noise=noise,
                         reps=args.reps, window=window, method="bh")
        rows.append(table_row(f"p={args.p} {noise} bh", run(base)))
    else:  # null
        noise = args.noise or "gauss"
        base = SimConfig(p=args.p, config_kind="global_null", noise=noise,
                         reps=args.reps, window=window, method="proposed_one_sided")
        rep = run(base)
        rows.append(table_row(f"p={args.p} {noise} null "
                              f"rejection_rate={rep.aggregate.rejection_rate:.6g}", rep))
    from .simulate import format_table
    sys.stdout.write(format_table(rows))
    if args.out:
        for path in write_tables(rows, args.out):
            print(f"wrote {path}")
    return 0


def _cmd_calibrate(args) -> int:
    g = quantile_max_gcirc(args.p, args.k, args.alpha, args.b, args.seed)
    spec = CutoffSpec(g_quantile=g, process_kind="G_circ", alpha=args.alpha,
                      mc_reps=args.b, seed=args.seed, p=args.p, k=args.k)
    record = dataclasses.asdict(spec)
    if args.gumbel:
        ref = gumbel_reference_quantile(args.p, args.k, args.alpha)
        record["gumbel_reference"] = {"value": ref.value, "reference_only": True}
    print(json.dumps(record, sort_keys=True))
    return 0


def _cmd_baseline(args) -> int:
    data, _, dropped = _read_input(args.input, args.samples)
    if dropped:
        print(f"dropped {dropped} rows with missing values", file=sys.stderr)
    if isinstance(data, Panel):
        raise ValueError("baselines run on a single sample column (use --samples)")
    x = data.values
    if args.method == "yao":
        fit = yao_l1(x, args.delta0)
        print(json.dumps({"l1": fit.l1, "i_hat": fit.i_hat, "j_hat": fit.j_hat,
                          "breakpoints": list(fit.breakpoints)}))
    else:
        m = args.m if args.m is not None else max(1, int(math.isqrt(x.size)))
        sigma = math.sqrt(sigma2_order_stat(x, m))
        rejected = bh_procedure(one_sided_pvalues(x, sigma), args.alpha)
        print(json.dumps({"sigma_hat": sigma, "n_rejected": int(rejected.size),
                          "rejected": rejected.tolist()}))
    return 0


_COMMANDS = {
    "detect": _cmd_detect,
    "simulate": _cmd_simulate,
    "calibrate": _cmd_calibrate,
    "baseline": _cmd_baseline,
}


def cli_dispatch(argv) -> int:
    """Parse argv and run the selected subcommand; returns the exit status."""
    parser, subs = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            _apply_config(subs[args.command], _load_config(args.config))
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
