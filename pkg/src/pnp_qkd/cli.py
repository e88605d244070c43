"""Command line interface.

    pnp-qkd table2 [--f 1.2] [--json-summary [PATH]]
    pnp-qkd run --config session.cfg [--seed N] [--attack NAME] [--out transcript.csv]
    pnp-qkd sweep [--config sweep.cfg] [--out sweep.csv]
    pnp-qkd optimize-mu [--config point.cfg] [--length-km 50.4] [--rate-hz 5e7]

Exit codes: 0 success, 2 configuration error, 3 estimation failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .attacks import ATTACK_NAMES
from .config import ConfigError
from .experiment import (DEFAULT_SPOT_TARGETS, ExperimentConfig, channel_at, curve, cutoff_length,
                         load_config, optimize_mu, analytic_point, overhead_factor, pick_rows,
                         run_montecarlo, run_table2, spot_check, sweep_fig3, write_sweep_csv)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ESTIMATION = 3

log = logging.getLogger("pnp_qkd")


def _json_default(obj):
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not serialisable: {type(obj).__name__}")


def _emit_json(doc: dict, target: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default)
    if target in (None, "-"):
        print(text)
    else:
        with open(target, "w") as fh:
            fh.write(text + "\n")


def _load(args, mode: str) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig(mode=mode)
    cfg.mode = mode
    if getattr(args, "seed", None) is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg.session = dataclasses.replace(cfg.session, seed=args.seed)
    if getattr(args, "attack", None) is not None:
        cfg.attack = args.attack
    return cfg


def cmd_table2(args) -> int:
    res = run_table2(f=args.f)
    row = res.row()
    print("length_km  Q          delta1  delta0  e_m1    e       f    SKR")
    print(f"{row['length_km']:<10g} {row['Q']:<10.3e} {row['delta1']:.4f}  {row['delta0']:.4f}  "
          f"{row['e_m1']:.4f}  {row['e']:.4f}  {row['f']:<4g} {row['skr']:.4e}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(",".join(row) + "\n" + ",".join(f"{v:.10g}" for v in row.values()) + "\n")
    if args.json_summary is not None:
        doc = res.report.as_flat_dict()
        doc["Y_L_x"] = res.estimates.Y_L_x
        doc["Y_L_z"] = res.estimates.Y_L_z
        _emit_json(doc, args.json_summary)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args, "run")
    res = run_montecarlo(cfg.session, cfg.channel, cfg.session_detector(), cfg.attack, cfg.attack_seed,
                         cfg.monitor, cfg.f, cfg.workers, keep_transcript=bool(args.out or cfg.output))
    out = args.out or cfg.output
    if out:
        res.stats.transcript.write_csv(out)
    summary = res.summary()
    if args.json_summary is not None:
        _emit_json(summary, args.json_summary)
    else:
        for key in ("attack", "windows", "sifted_bits", "e", "e_m", "Q_u_x", "delta0", "delta1",
                    "e_m1", "skr", "eve_bits", "aborted"):
            if key in summary:
                print(f"{key} = {summary[key]}")
    if res.aborted:
        log.error("decoy estimation failed: %s", res.abort_reason)
        return EXIT_ESTIMATION
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args, "sweep")
    overhead = overhead_factor(cfg.session) if cfg.include_overheads else 1.0
    rows = sweep_fig3(cfg.sweep, cfg.channel, cfg.detector, cfg.f, overhead)
    out = args.out or cfg.output
    if out:
        write_sweep_csv(rows, out)
    else:
        write_sweep_csv(rows, "/dev/stdout")
    summary: dict[str, object] = {}
    for rate, bs in cfg.sweep.curves():
        cut = cutoff_length(curve(rows, rate, bs))
        summary[f"cutoff_km_{rate:g}Hz_{'bs' if bs else 'nobs'}"] = cut if cut is not None else "none"
    if cfg.sweep.spot_checks:
        for i, row in enumerate(pick_rows(rows, DEFAULT_SPOT_TARGETS)):
            sc = spot_check(row, cfg.channel, cfg.detector, cfg.sweep.spot_check_windows,
                            seed=cfg.session.seed + i, reset_time_s=cfg.reset_time_s)
            key = f"spot_{sc.length_km:g}km_{sc.rate_hz:g}Hz"
            summary[key + "_expected_Q"] = sc.expected_Q
            summary[key + "_measured_Q"] = sc.measured_Q
            summary[key + "_z"] = sc.z
    if args.json_summary is not None:
        _emit_json(summary, args.json_summary)
    elif out:
        for k, v in summary.items():
            print(f"{k} = {v}")
    return EXIT_OK


def cmd_optimize_mu(args) -> int:
    cfg = _load(args, "optimize-mu")
    chan = cfg.channel
    chan = channel_at(chan, args.length_km if args.length_km is not None else chan.fiber_length_km,
                      args.rate_hz if args.rate_hz is not None else chan.repetition_rate_hz,
                      chan.backscatter_enabled)
    res = optimize_mu(chan, cfg.detector, cfg.f, cfg.monitor)
    pt = analytic_point(res.x, chan, cfg.detector, cfg.f, cfg.monitor)
    doc = {"length_km": chan.fiber_length_km, "rate_hz": chan.repetition_rate_hz,
           "backscatter": chan.backscatter_enabled, "mu_opt": res.x, "method": res.method,
           "non_unimodal": res.non_unimodal, "zero_rate": res.zero_rate,
           **pt.report.as_flat_dict()}
    if args.json_summary is not None:
        _emit_json(doc, args.json_summary)
    else:
        for k, v in doc.items():
            print(f"{k} = {v}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pnp-qkd", description="Plug-and-play two-way QKD toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True, attack=False):
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--json-summary", nargs="?", const="-", default=None, metavar="PATH",
                       help="write a flat JSON summary (stdout when PATH is omitted)")
        if seed:
            p.add_argument("--seed", type=int, help="session seed (unsigned 64-bit)")
        if attack:
            p.add_argument("--attack", choices=ATTACK_NAMES)

    p = sub.add_parser("table2", help="key rate from the measured 50.4 km gains")
    p.add_argument("--f", type=float, default=1.2, help="reconciliation efficiency")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--json-summary", nargs="?", const="-", default=None, metavar="PATH")
    p.set_defaults(func=cmd_table2)

    p = sub.add_parser("run", help="Monte-Carlo session with decoy estimation")
    common(p, attack=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="optimised key rate over length and repetition rate")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize-mu", help="signal intensity maximising the key rate")
    common(p, seed=False)
    p.add_argument("--length-km", type=float)
    p.add_argument("--rate-hz", type=float)
    p.set_defaults(func=cmd_optimize_mu)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
