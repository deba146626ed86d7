"""Report files: raw CSV, versioned JSON summary, markdown table and curve data."""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from .record import ExperimentRecord, final_score, format_score, sliding_window, write_raw_csv

FORMATS = ("csv", "json", "md", "curves")
SCHEMA_VERSION = 1
CURVE_WINDOW = 5  # episodes ("algorithm iterations") per smoothing window


def _tag(rec: ExperimentRecord) -> str:
    return f"{rec.env}-{rec.algo}-{rec.fingerprint[:8]}"


def curve(rec: ExperimentRecord, w: int = CURVE_WINDOW):
    """Seed-averaged learning curve.

    Each seed's returns are smoothed over its last ``w`` episodes; at every
    logged timestep the latest smoothed value of each seed that has logged
    something is averaged. Returns ``(timesteps, mean, std)``.
    """
    per_seed = [(np.asarray(s.timesteps), sliding_window(s.returns, w)) for s in rec.series if s.timesteps]
    if not per_seed:
        return np.zeros(0), np.zeros(0), np.zeros(0)
    grid = np.unique(np.concatenate([t for t, _ in per_seed]))
    mean = np.empty(grid.size)
    std = np.empty(grid.size)
    for i, g in enumerate(grid):
        vals = [v[np.searchsorted(t, g, side="right") - 1] for t, v in per_seed if t[0] <= g]
        mean[i] = np.mean(vals)
        std[i] = np.std(vals)
    return grid, mean, std


def summary_json(records, window_steps=5000) -> dict:
    results = []
    for rec in records:
        s = final_score(rec, window_steps)
        results.append({
            "env": rec.env,
            "algo": rec.algo,
            "fingerprint": rec.fingerprint,
            "mean": s.mean,
            "std": s.std,
            "n_seeds": s.n_seeds,
            "n_effective_seeds": s.n_effective_seeds,
            "failed_seeds": rec.failed_seeds,
            "window": list(s.window),
            "window_steps": window_steps,
        })
    return {"schema_version": SCHEMA_VERSION, "smoothing": f"final {window_steps}-timestep window", "results": results}


def markdown_table(records, window_steps=5000) -> str:
    """Algorithms as rows, environments as columns, cells ``mean ± std``."""
    envs = sorted({r.env for r in records})
    algos = sorted({r.algo for r in records})
    cells = {}
    for rec in records:
        cells.setdefault((rec.algo, rec.env), []).append(rec)

    def cell(recs):
        if len(recs) == 1:
            return str(final_score(recs[0], window_steps))
        # several configs share this cell: tag each with its fingerprint
        return "<br>".join(f"{final_score(r, window_steps)} ({r.fingerprint[:8]})" for r in recs)
    lines = [
        f"Final score: mean ± std over seeds, last {window_steps} timesteps.",
        "",
        "| algo | " + " | ".join(envs) + " |",
        "|---|" + "---|" * len(envs),
    ]
    for a in algos:
        row = [cell(cells[(a, e)]) if (a, e) in cells else "-" for e in envs]
        lines.append(f"| {a} | " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def parse_formats(fmt: str) -> list:
    names = [f.strip() for f in (fmt or "").split(",") if f.strip()]
    if not names:
        raise ValueError(f"no report format given; supported formats: {', '.join(FORMATS)}")
    bad = [f for f in names if f not in FORMATS]
    if bad:
        raise ValueError(f"unsupported format(s) {bad}; supported formats: {', '.join(FORMATS)}")
    return names


def emit_report(records, fmt: str, out_dir, window_steps: int = 5000) -> list:
    """Write the requested report formats into ``out_dir``; returns file paths."""
    formats = parse_formats(fmt)
    # the same config found twice (e.g. a run and a matching sweep cell) is one result
    unique = {}
    for r in records:
        unique.setdefault(r.fingerprint, r)
    records = list(unique.values())
    if not records:
        raise ValueError("no records to report")
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create report directory {out_dir!r}: {e}") from None
    if not os.access(out_dir, os.W_OK):
        raise PermissionError(f"report directory {out_dir!r} is not writable")
    written = []
    if "csv" in formats:
        for rec in records:
            path = os.path.join(out_dir, f"{_tag(rec)}.csv")
            write_raw_csv(path, rec)
            written.append(path)
    if "json" in formats:
        path = os.path.join(out_dir, "summary.json")
        with open(path, "w") as fh:
            json.dump(summary_json(records, window_steps), fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
    if "md" in formats:
        path = os.path.join(out_dir, "summary.md")
        with open(path, "w") as fh:
            fh.write(markdown_table(records, window_steps))
        written.append(path)
    if "curves" in formats:
        for rec in records:
            path = os.path.join(out_dir, f"{_tag(rec)}-curve.csv")
            t, m, s = curve(rec)
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                fh.write(f"# smoothing: sliding window of {CURVE_WINDOW} episodes per seed\n")
                w.writerow(["timestep", "smoothed_mean", "smoothed_std"])
                for row in zip(t, m, s):
                    w.writerow([int(row[0]), repr(float(row[1])), repr(float(row[2]))])
            written.append(path)
    return written


def sweep_table(rows, label) -> str:
    lines = [f"| {label} | score |", "|---|---|"]
    for r in rows:
        lines.append(f"| {r.value} | {format_score(r.summary.mean, r.summary.std)} |")
    return "\n".join(lines) + "\n"
