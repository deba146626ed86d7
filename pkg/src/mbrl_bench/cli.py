"""Command-line entry point: ``mbrl-bench {run,sweep,horizon,noise,report}``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import bench
from .bench.report import sweep_table


def _load(args, **extra):
    overrides = dict(
        env=getattr(args, "env", None),
        algo=getattr(args, "algo", None),
        total_timesteps=getattr(args, "steps", None),
        seeds=getattr(args, "seeds", None),
        out_dir=getattr(args, "out", None),
        workers=getattr(args, "workers", None),
        **extra,
    )
    if args.config:
        return bench.load_config(args.config, **overrides)
    return bench.parse_config("", **overrides)


def _print_summary(rec, window):
    s = bench.final_score(rec, window)
    print(f"{rec.env} {rec.algo}: {s}  (n_seeds={s.n_seeds}, effective={s.n_effective_seeds}, "
          f"window={s.window[0]}..{s.window[1]})")
    if rec.failed_seeds:
        print(f"failed seeds: {rec.failed_seeds}", file=sys.stderr)
        return 1
    return 0


def cmd_run(args):
    cfg = _load(args)
    rec = bench.run_experiment(cfg)
    if cfg.out_dir:
        print(f"wrote {cfg.out_dir}")
    return _print_summary(rec, cfg.window_steps)


def cmd_sweep(args):
    cfg = _load(args)
    with open(args.grid) as fh:
        grid = bench.parse_grid(fh.read())
    res = bench.grid_search(cfg, grid, out_dir=cfg.out_dir)
    for assignment, summary, _ in res.cells:
        print(f"{assignment}: {summary}")
    best = next(a for a, s, _ in res.cells if s is res.best_summary)
    print(f"best: {best} -> {res.best_summary}")
    return 1 if any(r.failed_seeds for _, _, r in res.cells) else 0


def cmd_horizon(args):
    cfg = _load(args)
    horizons = [int(h) for h in args.horizons.split(",") if h.strip()]
    rows = bench.horizon_sweep(cfg, horizons, out_dir=cfg.out_dir)
    print(sweep_table(rows, "horizon"), end="")
    return 1 if any(r.record.failed_seeds for r in rows) else 0


def cmd_noise(args):
    cfg = _load(args)
    base, rows = bench.noise_sweep(cfg, [(args.sigma_o, args.sigma_a)], out_dir=cfg.out_dir)
    print(f"baseline: {bench.final_score(base, cfg.window_steps)}")
    for r in rows:
        print(f"sigma_o={r.sigma_o} sigma_a={r.sigma_a}: {r.cell()}")
    return 1 if base.failed_seeds or any(r.record.failed_seeds for r in rows) else 0


def cmd_report(args):
    records = bench.find_records(args.indir)
    if not records:
        print(f"no records found under {args.indir}", file=sys.stderr)
        return 1
    paths = bench.emit_report(records, args.format, args.out or args.indir, args.window)
    for p in paths:
        print(p)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="mbrl-bench", description="Model-based RL planning benchmark.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="experiment config file")
        sp.add_argument("--env")
        sp.add_argument("--algo", choices=bench.ALGOS)
        sp.add_argument("--steps", type=int, help="total timesteps per seed")
        sp.add_argument("--seeds", type=int)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--workers", type=int, help="parallel seed processes")

    sp = sub.add_parser("run", help="run one experiment")
    common(sp)
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("sweep", help="grid search")
    common(sp)
    sp.add_argument("--grid", required=True, help="grid file with a [grid] section")
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("horizon", help="planning-horizon sweep")
    common(sp)
    sp.add_argument("--horizons", required=True, help="comma-separated, e.g. 10,20,30")
    sp.set_defaults(fn=cmd_horizon)

    sp = sub.add_parser("noise", help="noise-robustness comparison against the noise-free baseline")
    common(sp)
    sp.add_argument("--sigma-o", type=float, default=0.0)
    sp.add_argument("--sigma-a", type=float, default=0.0)
    sp.set_defaults(fn=cmd_noise)

    sp = sub.add_parser("report", help="emit reports from saved records")
    sp.add_argument("--in", dest="indir", required=True)
    sp.add_argument("--format", required=True, help="comma-separated: " + ",".join(bench.FORMATS))
    sp.add_argument("--out", help="report directory (default: --in)")
    sp.add_argument("--window", type=int, default=5000, help="final-score window in timesteps")
    sp.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.fn(args)
    except bench.ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
