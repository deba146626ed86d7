"""Multi-seed experiment loops, sweeps and grid search.

Seed streams: ``RngStream(master_seed, (seed,))`` per seed run, with children
``(1, episode)`` for episodes (reset at ``0``, planning step ``t`` at
``(1, t)``), ``(2,)`` for the noise wrapper, ``(3, k)`` for the k-th model fit
and ``(4, episode)`` for random-action data collection.
"""

from __future__ import annotations

import itertools
import logging
import multiprocessing
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..core import RngStream, Transition, trajectory_return
from ..dynamics import PropagationMode, TransitionDataset, train
from ..envs import NoiseWrapper
from ..planners import GroundTruthBackend, LearnedBackend, RandomPlanner, make_planner, mpc_episode
from ..net import NonFiniteLossError
from .config import ExperimentConfig, set_path
from .record import ExperimentRecord, ScoreSummary, SeedSeries, final_score, format_score, save_record

log = logging.getLogger(__name__)


def _random_steps(wrapper, obs, n, rng, data):
    """Continue from the wrapper's current true state with uniform actions."""
    spec = wrapper.spec
    gen = rng.generator
    for _ in range(n):
        a = gen.uniform(spec.action_low, spec.action_high)
        nxt, r, _ = wrapper.step(a)
        data.append(Transition(obs, a, nxt, r, False))
        obs = nxt


def run_seed(cfg: ExperimentConfig, seed: int) -> SeedSeries:
    """One seed of ``cfg``: collect episodes (and fit models) until the budget is spent."""
    t0 = time.perf_counter()
    rng = RngStream(cfg.master_seed, (seed,))
    env = cfg.make_env()
    spec = env.spec
    wrapper = NoiseWrapper(env, cfg.sigma_o, cfg.sigma_a, rng.child(2))
    out = SeedSeries(seed)
    data = TransitionDataset(spec.obs_dim, spec.act_dim, spec.name) if cfg.learned else None
    scheme = cfg.scheme
    t, episode, fits = 0, 0, 0
    ensemble = None
    mode = PropagationMode(cfg.propagation, cfg.particles)
    since_fit = 0
    retrain_every = cfg.retrain_every or spec.horizon

    def episode_with(planner):
        nonlocal t, episode
        budget = cfg.total_timesteps - t
        traj = mpc_episode(wrapper, planner, scheme, rng.child(1, episode), max_steps=budget)
        n = len(traj)
        complete = n == spec.horizon or traj.terminated
        t += n
        if data is not None:
            data.add_trajectory(traj)
        if complete:
            out.log(t, trajectory_return(traj, cfg.gamma))
        if traj.terminated and scheme.kind == "E" and scheme.extra_steps and t < cfg.total_timesteps:
            k = min(scheme.extra_steps, cfg.total_timesteps - t)
            sink = data if data is not None else TransitionDataset(spec.obs_dim, spec.act_dim)
            _random_steps(wrapper, traj.next_states[-1], k, rng.child(4, episode), sink)
            t += k
        episode += 1
        return n

    try:
        if not cfg.learned:
            backend = GroundTruthBackend(env, cfg.gamma, cfg.planner_workers)
            planner = make_planner(backend, cfg.planner_cfg, scheme, cfg.planner_workers)
            while t < cfg.total_timesteps:
                episode_with(planner)
        else:
            for _ in range(cfg.warmup_episodes):
                if t >= cfg.total_timesteps:
                    break
                episode_with(RandomPlanner(spec))
            while t < cfg.total_timesteps:
                if ensemble is None or since_fit >= retrain_every:
                    ensemble = train(data, cfg.dynamics, init=ensemble, rng=rng.child(3, fits))
                    fits += 1
                    since_fit = 0
                backend = LearnedBackend(ensemble, mode, env, cfg.gamma, cfg.planner_workers)
                planner = make_planner(backend, cfg.planner_cfg, scheme, cfg.planner_workers)
                since_fit += episode_with(planner)
    except (NonFiniteLossError, FloatingPointError) as e:
        out.failed = f"{type(e).__name__}: {e}"
        log.warning("seed %d failed: %s", seed, out.failed)
    out.wall_clock = time.perf_counter() - t0
    return out


def _job(args):
    cfg, seed = args
    return run_seed(cfg, seed)


def _run_jobs(jobs, workers):
    """Run ``(cfg, seed)`` jobs, in order, on up to ``workers`` processes."""
    if workers <= 1 or len(jobs) <= 1:
        return [_job(j) for j in jobs]
    ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs)), mp_context=ctx) as pool:
        return list(pool.map(_job, jobs))


def _record(cfg, series, wall):
    return ExperimentRecord(cfg.env, cfg.algo, cfg.fingerprint(), cfg.total_timesteps,
                            list(series), cfg.canonical(), wall)


def run_experiment(cfg: ExperimentConfig, workers: int | None = None, out_dir=None) -> ExperimentRecord:
    """All seeds of ``cfg``; results depend only on the config, not on ``workers``."""
    t0 = time.perf_counter()
    series = _run_jobs([(cfg, s) for s in range(cfg.seeds)], cfg.workers if workers is None else workers)
    rec = _record(cfg, series, time.perf_counter() - t0)
    out_dir = out_dir or cfg.out_dir
    if out_dir:
        save_record(out_dir, rec)
    return rec


def _many(cfgs, workers, out_dirs=None):
    """Run several configs with all their seeds flattened into one job pool."""
    t0 = time.perf_counter()
    jobs = [(c, s) for c in cfgs for s in range(c.seeds)]
    results = iter(_run_jobs(jobs, workers))
    records = []
    for i, c in enumerate(cfgs):
        series = [next(results) for _ in range(c.seeds)]
        rec = _record(c, series, sum(s.wall_clock for s in series))
        if out_dirs:
            save_record(out_dirs[i], rec)
        records.append(rec)
    log.info("ran %d configs in %.1fs", len(cfgs), time.perf_counter() - t0)
    return records


@dataclass
class SweepRow:
    label: str
    value: object
    summary: ScoreSummary
    record: ExperimentRecord


def horizon_sweep(cfg: ExperimentConfig, horizons, workers=None, out_dir=None) -> list:
    """One experiment per planning horizon; population and everything else fixed."""
    horizons = list(horizons)
    if not horizons:
        raise ValueError("horizons must be non-empty")
    cfgs = [cfg.with_horizon(h) for h in horizons]
    dirs = [os.path.join(out_dir, f"horizon_{h}") for h in horizons] if out_dir else None
    recs = _many(cfgs, cfg.workers if workers is None else workers, dirs)
    return [SweepRow("horizon", h, final_score(r, cfg.window_steps), r) for h, r in zip(horizons, recs)]


@dataclass
class GridResult:
    best: ExperimentConfig
    best_summary: ScoreSummary
    cells: list  # (assignment dict, ScoreSummary, ExperimentRecord)


def grid_search(base_cfg: ExperimentConfig, grid: dict, workers=None, out_dir=None) -> GridResult:
    """Cartesian product over ``grid``; best cell by final-score mean,
    ties broken by lower wall-clock."""
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("grid must be non-empty")
    keys = list(grid)
    assignments = [dict(zip(keys, vals)) for vals in itertools.product(*(grid[k] for k in keys))]
    cfgs = []
    for a in assignments:
        c = base_cfg
        for k, v in a.items():
            c = set_path(c, k, v)
        cfgs.append(c)
    dirs = [os.path.join(out_dir, f"cell_{i:03d}") for i in range(len(cfgs))] if out_dir else None
    recs = _many(cfgs, base_cfg.workers if workers is None else workers, dirs)
    cells = [(a, final_score(r, base_cfg.window_steps), r) for a, r in zip(assignments, recs)]
    best_i = min(range(len(cells)), key=lambda i: (-cells[i][1].mean, cells[i][2].wall_clock, i))
    return GridResult(cfgs[best_i], cells[best_i][1], cells)


NOISE_PRESET = ((0.1, 0.0), (0.01, 0.0), (0.0, 0.1), (0.0, 0.03))


@dataclass
class NoiseRow:
    sigma_o: float
    sigma_a: float
    summary: ScoreSummary
    baseline: ScoreSummary
    record: ExperimentRecord

    @property
    def relative_change(self) -> float:
        b = self.baseline.mean
        return (self.summary.mean - b) / abs(b) if b != 0 else float("nan")

    @property
    def flag(self) -> str:
        """``+``/``-`` when the relative change exceeds 10%, else blank."""
        rc = self.relative_change
        if not np.isfinite(rc) or abs(rc) <= 0.10:
            return ""
        return "+" if rc > 0 else "-"

    def cell(self) -> str:
        return f"{format_score(self.summary.mean, self.summary.std)} ({100 * self.relative_change:+.1f}%{self.flag and ' ' + self.flag})"


def noise_sweep(cfg: ExperimentConfig, sigmas=NOISE_PRESET, workers=None, out_dir=None):
    """Baseline (noise-free) run plus one run per ``(sigma_o, sigma_a)``."""
    base_cfg = replace(cfg, sigma_o=0.0, sigma_a=0.0)
    cfgs = [base_cfg] + [replace(cfg, sigma_o=float(o), sigma_a=float(a)) for o, a in sigmas]
    dirs = None
    if out_dir:
        dirs = [os.path.join(out_dir, "baseline")] + [os.path.join(out_dir, f"so{o}_sa{a}") for o, a in sigmas]
    recs = _many(cfgs, cfg.workers if workers is None else workers, dirs)
    base = final_score(recs[0], cfg.window_steps)
    rows = [NoiseRow(float(o), float(a), final_score(r, cfg.window_steps), base, r)
            for (o, a), r in zip(sigmas, recs[1:])]
    return recs[0], rows
