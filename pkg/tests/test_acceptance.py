"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and repeated in the pytest terminal summary.
Budgets are the desk-scale ones; all runs are seeded and deterministic.
"""

import os
import time
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import central_fd
from test_dynamics import noise_data
from test_envs import random_state
from test_net import ACTS, fd_grads, gaussian_loss, mse_loss, random_instance, relative_error
from mbrl_bench.bench import (
    ExperimentConfig, ExperimentRecord, SeedSeries, final_score, horizon_sweep, noise_sweep, rank_table,
    run_experiment,
)
from mbrl_bench.core import RngStream
from mbrl_bench.dynamics import DynamicsConfig, predict, train_probabilistic
from mbrl_bench.envs import REGISTRY, LinearQuadratic, make_env, reward_gradient
from mbrl_bench.net import grad
from mbrl_bench.planners import (
    CemConfig, GroundTruthBackend, IlqgConfig, RsConfig, TerminationScheme, make_planner, mpc_episode,
    optimize_trajectory,
)

VERDICTS = {}

# compact learned-model settings used for the 20k-step CartPole runs
SMALL_NET = dict(hidden=(32, 32), activation="relu", batch_size=32, max_steps=300)


def verdict(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    VERDICTS[n] = line
    print(line)
    assert ok, line


def all_returns(rec):
    return np.concatenate([s.returns for s in rec.series])


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


# -- ground-truth planners --------------------------------------------------------------------

def test_criterion_01_gt_cem_cartpole():
    cfg = ExperimentConfig(env="cartpole", algo="gt_cem", total_timesteps=1000, seeds=4)
    rec, secs = timed(run_experiment, cfg)
    r = all_returns(rec)
    verdict(1, len(r) == 20 and r.mean() >= 199 and secs < 300,
            f"GT-CEM CartPole mean {r.mean():.2f} over {len(r)} episodes (>= 199), {secs:.0f}s (< 300s)")


def test_criterion_02_gt_rs_pendulum():
    cfg = ExperimentConfig(env="pendulum", algo="gt_rs", total_timesteps=1000, seeds=4,
                           rs=RsConfig(population=1000, horizon=30))
    rec, secs = timed(run_experiment, cfg)
    r = all_returns(rec)
    ok = abs(r.mean() - 171.5) <= 31.8 and secs < 600
    verdict(2, ok, f"GT-RS Pendulum mean {r.mean():.1f} ± {r.std():.1f} over {len(r)} episodes "
                   f"(171.5 ± 31.8), {secs:.0f}s (< 600s)")


def test_criterion_03_gt_rs_cartpole():
    cfg = ExperimentConfig(env="cartpole", algo="gt_rs", total_timesteps=400, seeds=4)
    rec, secs = timed(run_experiment, cfg)
    r = all_returns(rec)
    verdict(3, r.mean() >= 198 and secs < 300,
            f"GT-RS CartPole mean {r.mean():.2f} over {len(r)} episodes (>= 198), {secs:.0f}s (< 300s)")


# -- learned models ------------------------------------------------------------------------------

def test_criterion_04_pets_cem_cartpole():
    cfg = ExperimentConfig(
        env="cartpole", algo="pets_cem", total_timesteps=20_000, seeds=4, propagation="E",
        cem=CemConfig(population=200, elites=20, iterations=5, horizon=20),
        dynamics=DynamicsConfig(n_members=5, kind="probabilistic", **SMALL_NET),
    )
    rec, secs = timed(run_experiment, cfg)
    s = final_score(rec, 5000)
    verdict(4, s.mean >= 180 and not rec.failed_seeds and secs < 3600,
            f"PETS-CEM (K=5, E) CartPole final score {s} over {s.n_seeds} seeds (>= 180), {secs:.0f}s (< 3600s)")


@pytest.fixture(scope="module")
def rs_noise():
    cfg = ExperimentConfig(
        env="cartpole", algo="rs", total_timesteps=20_000, seeds=4, rs=RsConfig(population=200, horizon=15),
        dynamics=DynamicsConfig(n_members=1, kind="deterministic", **SMALL_NET),
    )
    return noise_sweep(cfg, [(0.0, 0.0), (0.1, 0.0)])


def test_criterion_05_rs_learned_deterministic(rs_noise):
    base, _ = rs_noise
    s = final_score(base, 5000)
    secs = base.wall_clock
    verdict(5, s.mean >= 180 and not base.failed_seeds and secs < 1800,
            f"RS + deterministic model CartPole final score {s} (>= 180), {secs:.0f}s (< 1800s)")


def test_criterion_06_noise_robustness(rs_noise):
    base, (control, noisy) = rs_noise
    b, n = final_score(base, 5000), noisy.summary
    same = control.record.series == base.series and control.summary == b
    drop = b.mean - n.mean
    verdict(6, drop <= 15 and same,
            f"sigma_o=0.1 score {n} vs noise-free {b}, drop {drop:.1f} (<= 15); "
            f"sigma=0 control identical: {same}")


# -- planner properties ------------------------------------------------------------------------

def test_criterion_07_horizon_dilemma():
    cfg = ExperimentConfig(env="pendulum", algo="gt_cem", total_timesteps=400, seeds=4, window_steps=400,
                           cem=CemConfig(population=100, elites=10, iterations=5))
    horizons = [10, 20, 30, 50, 100]
    rows = horizon_sweep(cfg, horizons)
    means = {r.value: r.summary.mean for r in rows}
    best = max(horizons, key=lambda h: means[h])
    table = ", ".join(f"H{h}={means[h]:.1f}" for h in horizons)
    verdict(7, best <= 40 and means[100] < max(means.values()),
            f"GT-CEM Pendulum horizon sweep {table}; best H{best} (<= 40), H100 not the maximum")


def riccati_cost(A, B, Q, R, x0, T):
    P = np.zeros_like(Q)
    for _ in range(T):
        S = Q + P
        P = A.T @ S @ A - A.T @ S @ B @ np.linalg.solve(R + B.T @ S @ B, B.T @ S @ A)
    return float(x0 @ P @ x0)


def test_criterion_08_ilqg_matches_riccati():
    t0 = time.perf_counter()
    errs = []
    for seed in range(5):
        gen = np.random.default_rng(100 + seed)
        n, m = int(gen.integers(1, 5)), int(gen.integers(1, 3))
        A = np.eye(n) + 0.3 * gen.normal(size=(n, n))
        B = gen.normal(size=(n, m))
        Q = np.diag(gen.uniform(0.5, 2, n))
        R = np.diag(gen.uniform(0.1, 1, m))
        x0 = gen.normal(size=n)
        res = optimize_trajectory(LinearQuadratic(A, B, Q, R), x0, np.zeros((20, m)), IlqgConfig(horizon=20))
        want = riccati_cost(A, B, Q, R, x0, 20)
        errs.append(abs(res.cost - want) / abs(want))
    secs = time.perf_counter() - t0
    verdict(8, max(errs) < 1e-6 and secs < 60,
            f"iLQG vs Riccati on 5 random LQRs: max rel err {max(errs):.2e} (< 1e-6), {secs:.1f}s (< 60s)")


def test_criterion_09_gradient_suites():
    net_err = 0.0
    for act in ACTS:
        for head, loss_fn in (("mean", mse_loss), ("gaussian", gaussian_loss)):
            for seed in range(50):
                p, batch = random_instance(seed, act, head, members=2 if seed % 2 else None)
                net_err = max(net_err, relative_error(grad(p, loss_fn, batch).arrays(), fd_grads(p, loss_fn, batch)))
    env_err = 0.0
    for name in sorted(REGISTRY):
        env = make_env(name)
        gen = np.random.default_rng(2)
        for _ in range(100):
            s2 = random_state(env, gen)
            a = gen.uniform(env.spec.action_low, env.spec.action_high)
            gs, ga = reward_gradient(env, None, a, s2)
            fs = central_fd(lambda x: float(env.reward(None, a, x)), s2)
            fa = central_fd(lambda u: float(env.reward(None, u, s2)), a)
            scale = max(1.0, np.abs(fs).max(), np.abs(fa).max())
            env_err = max(env_err, np.abs(gs - fs).max() / scale, np.abs(ga - fa).max() / scale)
    verdict(9, net_err < 1e-4 and env_err < 1e-5,
            f"net grads max rel err {net_err:.1e} (< 1e-4, 300 instances); "
            f"reward grads max rel err {env_err:.1e} (< 1e-5, 100 points x {len(REGISTRY)} envs)")


def test_criterion_10_termination_schemes():
    env = make_env("cartpole_et")
    be = GroundTruthBackend(env)
    cfg = CemConfig(population=100, elites=10, iterations=3, horizon=10)
    trajs = {}
    for kind in "ACD":
        scheme = TerminationScheme(kind)
        planner = make_planner(be, cfg, scheme)
        trajs[kind] = [mpc_episode(env, planner, scheme, RngStream(0, (seed, ep)))
                       for seed in range(4) for ep in range(10)]
    len_c = np.mean([len(t) for t in trajs["C"]])
    len_d = np.mean([len(t) for t in trajs["D"]])
    identical = all(np.array_equal(a.actions[: len(d)], d.actions) for a, d in zip(trajs["A"], trajs["D"]))
    verdict(10, len_c > len_d and identical,
            f"CartPole-ET mean episode length C {len_c:.1f} > D {len_d:.1f}; "
            f"A and D action sequences identical: {identical}")


def test_criterion_11_calibration():
    ds = noise_data(3000, 0.1, 0)  # eps ~ N(0, 0.01)
    cfg = DynamicsConfig(n_members=1, epochs=60, hidden=(32, 32), batch_size=128, lr=3e-3)
    ens = train_probabilistic(ds, cfg, rng=1)
    gen = np.random.default_rng(7)
    _, var = predict(ens, 0, gen.uniform(-1, 1, (1000, 1)), gen.uniform(-1, 1, (1000, 1)))
    std = np.sqrt(var)
    verdict(11, 0.08 <= std.min() and std.max() <= 0.12,
            f"predicted std on holdout in [{std.min():.4f}, {std.max():.4f}] (within [0.08, 0.12])")


# -- protocol invariants -------------------------------------------------------------------------

def _record(pairs, total):
    s = SeedSeries(0)
    for t, r in pairs:
        s.log(t, r)
    return ExperimentRecord("cartpole", "rs", "0" * 16, total, [s])


@given(st.lists(st.tuples(st.integers(1, 10_000), st.floats(-500, 500)), min_size=1, max_size=30),
       st.integers(1, 9999), st.floats(-1e6, 1e6))
def window_semantics(pairs, t_out, r_out):
    inside = [(t + 10_000, r) for t, r in sorted(dict(pairs).items())]
    want = np.mean([r for _, r in inside])
    got = final_score(_record(inside, 20_000), 10_000)
    assert got == final_score(_record([(t_out, r_out)] + inside, 20_000), 10_000)
    assert got.mean == pytest.approx(want, abs=1e-9)


@given(st.dictionaries(st.sampled_from(["e1", "e2", "e3"]),
                       st.dictionaries(st.sampled_from(list("ABCD")), st.integers(-5, 5).map(float), min_size=1),
                       min_size=1),
       st.randoms(use_true_random=False))
def rank_order_invariance(scores, rnd):
    envs = list(scores)
    rnd.shuffle(envs)
    shuffled = {}
    for e in envs:
        algos = list(scores[e])
        rnd.shuffle(algos)
        shuffled[e] = {a: scores[e][a] for a in algos}
    assert rank_table(scores) == rank_table(shuffled)


def _bytes(d):
    return {f: open(os.path.join(d, f), "rb").read() for f in ("raw.csv", "meta.json")}


def test_criterion_12_protocol_invariants(tmp_path):
    cfg = ExperimentConfig(env="cartpole", algo="pets_rs", total_timesteps=400, seeds=3,
                           rs=RsConfig(population=1100, horizon=3),
                           dynamics=DynamicsConfig(n_members=2, hidden=(8, 8), epochs=1, batch_size=64, max_steps=20))
    run_experiment(cfg, workers=1, out_dir=str(tmp_path / "w1"))
    run_experiment(replace(cfg, planner_workers=8), workers=8, out_dir=str(tmp_path / "w8"))
    identical = _bytes(tmp_path / "w1") == _bytes(tmp_path / "w8")
    checks = {"workers 1 vs 8 byte-identical": identical}
    for name, prop in (("window semantics", window_semantics), ("rank order invariance", rank_order_invariance)):
        try:
            prop()
            checks[name] = True
        except AssertionError:
            checks[name] = False
    verdict(12, all(checks.values()), "; ".join(f"{k}: {v}" for k, v in checks.items()))
