"""Experiment records, score windows and rank aggregation."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np


@dataclass
class SeedSeries:
    seed: int
    timesteps: list = field(default_factory=list)
    returns: list = field(default_factory=list)
    failed: str | None = None  # diagnostic when the seed aborted
    wall_clock: float = field(default=0.0, compare=False)

    def log(self, t, ret):
        if self.timesteps and t <= self.timesteps[-1]:
            raise ValueError("timesteps must be strictly increasing within a seed")
        self.timesteps.append(int(t))
        self.returns.append(float(ret))


@dataclass
class ExperimentRecord:
    env: str
    algo: str
    fingerprint: str
    total_timesteps: int
    series: list  # SeedSeries, ordered by seed
    config: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    @property
    def failed_seeds(self):
        return [s.seed for s in self.series if s.failed]

    def rows(self):
        for s in self.series:
            for t, r in zip(s.timesteps, s.returns):
                yield s.seed, t, r

    def __eq__(self, other):
        # wall-clock times are excluded from identity
        if not isinstance(other, ExperimentRecord):
            return NotImplemented
        key = lambda r: (r.env, r.algo, r.fingerprint, r.total_timesteps, r.config,
                         [(s.seed, s.timesteps, s.returns, s.failed) for s in r.series])
        return key(self) == key(other)


@dataclass(frozen=True)
class ScoreSummary:
    mean: float
    std: float
    n: int  # returns inside the window
    n_seeds: int
    n_effective_seeds: int  # seeds contributing at least one return
    window: tuple  # (start, end) timesteps, inclusive

    def __str__(self):
        return format_score(self.mean, self.std)


def format_score(mean, std) -> str:
    return f"{mean:.1f} ± {std:.1f}"


def sliding_window(series, w: int) -> np.ndarray:
    """Element i is the mean of the up-to-``w`` most recent values ending at i."""
    if w < 1:
        raise ValueError("window must be >= 1")
    x = np.asarray(series, dtype=float)
    return np.array([x[max(0, i - w + 1) : i + 1].mean() for i in range(x.size)])


def final_score(record: ExperimentRecord, window_steps: int = 5000) -> ScoreSummary:
    """Mean/std (population) of every return logged in ``[end - window, end]``."""
    end = int(record.total_timesteps)
    start = end - int(window_steps)
    vals, contributing = [], 0
    for s in record.series:
        t = np.asarray(s.timesteps)
        r = np.asarray(s.returns, dtype=float)
        sel = r[(t >= start) & (t <= end)] if t.size else r[:0]
        if sel.size:
            contributing += 1
            vals.append(sel)
    if not vals:
        raise ValueError(f"no returns inside the final window [{start}, {end}]")
    v = np.concatenate(vals)
    return ScoreSummary(float(v.mean()), float(v.std()), int(v.size), len(record.series), contributing, (start, end))


@dataclass(frozen=True)
class RankRow:
    algo: str
    mean_rank: float
    median_rank: float
    n_algos: int
    ranks: dict  # env -> rank

    def formatted(self):
        return f"{self.mean_rank:.1f} / {self.n_algos}", f"{self.median_rank:g} / {self.n_algos}"


def _average_ranks(scores):
    """Descending ranks (1 = best) with ties sharing their average rank."""
    scores = np.asarray(scores, dtype=float)
    order = np.argsort(-scores, kind="stable")
    ranks = np.empty(len(scores))
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def rank_table(summaries: dict) -> dict:
    """Mean and median rank per algorithm.

    ``summaries[env][algo]`` is a :class:`ScoreSummary`, a float mean, or
    ``None``; algorithms missing on an env rank last there.
    """
    algos = sorted({a for per_env in summaries.values() for a in per_env})
    per_algo = {a: {} for a in algos}
    for env, per_env in summaries.items():
        scores = []
        for a in algos:
            s = per_env.get(a)
            m = getattr(s, "mean", s)
            scores.append(-np.inf if m is None or not np.isfinite(m) else float(m))
        for a, r in zip(algos, _average_ranks(scores)):
            per_algo[a][env] = float(r)
    return {
        a: RankRow(a, float(np.mean(list(r.values()))), float(np.median(list(r.values()))), len(algos), r)
        for a, r in per_algo.items()
    }


# -- persistence -------------------------------------------------------------

RAW_HEADER = ["seed", "timestep", "episode_return"]


def write_raw_csv(path, record: ExperimentRecord):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_HEADER)
        for seed, t, r in record.rows():
            w.writerow([seed, t, repr(r)])


def read_raw_csv(path) -> dict:
    out = {}
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != RAW_HEADER:
        raise ValueError(f"{path}: expected header {','.join(RAW_HEADER)}")
    for seed, t, r in rows[1:]:
        out.setdefault(int(seed), []).append((int(t), float(r)))
    return out


def save_record(out_dir, record: ExperimentRecord):
    """Write ``raw.csv``, ``meta.json`` (both deterministic) and ``timing.json``."""
    os.makedirs(out_dir, exist_ok=True)
    write_raw_csv(os.path.join(out_dir, "raw.csv"), record)
    meta = {
        "env": record.env,
        "algo": record.algo,
        "fingerprint": record.fingerprint,
        "total_timesteps": record.total_timesteps,
        "seeds": [s.seed for s in record.series],
        "failed": {str(s.seed): s.failed for s in record.series if s.failed},
        "config": record.config,
    }
    with open(os.path.join(out_dir, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    timing = {"wall_clock": record.wall_clock, "per_seed": {str(s.seed): s.wall_clock for s in record.series}}
    with open(os.path.join(out_dir, "timing.json"), "w") as fh:
        json.dump(timing, fh, indent=2, sort_keys=True)


def load_record(in_dir) -> ExperimentRecord:
    with open(os.path.join(in_dir, "meta.json")) as fh:
        meta = json.load(fh)
    rows = read_raw_csv(os.path.join(in_dir, "raw.csv"))
    series = []
    for seed in meta["seeds"]:
        s = SeedSeries(seed, failed=meta["failed"].get(str(seed)))
        for t, r in rows.get(seed, []):
            s.log(t, r)
        series.append(s)
    wall = 0.0
    tpath = os.path.join(in_dir, "timing.json")
    if os.path.exists(tpath):
        with open(tpath) as fh:
            wall = json.load(fh).get("wall_clock", 0.0)
    return ExperimentRecord(meta["env"], meta["algo"], meta["fingerprint"], meta["total_timesteps"],
                            series, meta["config"], wall)


def find_records(root) -> list:
    """All record directories (holding ``meta.json``) under ``root``, sorted."""
    found = []
    for dirpath, _, files in os.walk(root):
        if "meta.json" in files and "raw.csv" in files:
            found.append(dirpath)
    return [load_record(d) for d in sorted(found)]
