"""Particle propagation through an ensemble: E, TS1, TSinf and DS modes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import as_rng
from .ensemble import DynamicsEnsemble

MODES = ("E", "TS1", "TSinf", "DS")


@dataclass(frozen=True)
class PropagationMode:
    name: str = "E"
    particles: int = 1

    def __post_init__(self):
        if self.name not in MODES:
            raise ValueError(f"unknown propagation mode {self.name!r}; choose from {MODES}")
        if self.particles < 1:
            raise ValueError("particle count must be >= 1")
        if self.name == "E" and self.particles != 1:
            raise ValueError("mode E propagates a single expectation particle (P = 1)")


def draw_noise(ensemble: DynamicsEnsemble, mode: PropagationMode, n_cand, horizon, rng):
    """Pre-draw all randomness for ``n_cand`` candidates.

    Drawing up front keeps results independent of how candidates are later
    split across workers.
    """
    P, K = mode.particles, ensemble.n_members
    gen = as_rng(rng).generator
    noise = {}
    if mode.name == "TS1":
        noise["member"] = gen.integers(0, K, size=(n_cand, P, horizon))
    if mode.name in ("TS1", "TSinf", "DS") and ensemble.kind == "probabilistic" or mode.name == "DS":
        noise["eps"] = gen.standard_normal(size=(n_cand, P, horizon, ensemble.obs_dim))
    return noise


def propagate_batch(ensemble: DynamicsEnsemble, mode: PropagationMode, s0, actions, noise, reward_fn):
    """Roll ``N`` candidate sequences forward.

    ``actions``: ``(N, T, act)``. Returns predicted next states
    ``(N, P, T, obs)`` and per-step rewards ``(N, P, T)`` where rewards come
    from ``reward_fn(s, a, s_next)`` evaluated on predicted states.
    """
    actions = np.asarray(actions, dtype=float)
    N, T, _ = actions.shape
    P, K, n = mode.particles, ensemble.n_members, ensemble.obs_dim
    s = np.broadcast_to(np.asarray(s0, dtype=float), (N, P, n)).copy()
    states = np.empty((N, P, T, n))
    rewards = np.empty((N, P, T))
    prob = ensemble.kind == "probabilistic"
    stratified = mode.name == "TSinf" and P % K == 0
    for t in range(T):
        a = np.broadcast_to(actions[:, None, t, :], (N, P, actions.shape[-1]))
        if mode.name == "E":
            mean, _ = ensemble.member_predict(s, a, with_var=False)
            nxt = mean.mean(axis=0)
        elif stratified:
            # particle p uses member p % K: regroup particles by member
            sk = s.reshape(N, P // K, K, n).transpose(2, 0, 1, 3)
            ak = a.reshape(N, P // K, K, -1).transpose(2, 0, 1, 3)
            mean, var = ensemble.member_predict(sk, ak, stacked=True, with_var=prob)
            mean = mean.transpose(1, 2, 0, 3).reshape(N, P, n)
            var = var.transpose(1, 2, 0, 3).reshape(N, P, n) if prob else None
            nxt = mean + np.sqrt(var) * noise["eps"][:, :, t] if prob else mean
        else:
            mean, var = ensemble.member_predict(s, a, with_var=prob or mode.name == "DS")  # (K, N, P, n)
            if mode.name == "DS":
                m = mean.mean(axis=(0, 2))  # (N, n)
                # law of total variance, two-pass so identical members give exactly 0
                spread = ((mean - m[None, :, None, :]) ** 2).mean(axis=(0, 2))
                sd = np.sqrt(var.mean(axis=(0, 2)) + spread)
                nxt = m[:, None, :] + sd[:, None, :] * noise["eps"][:, :, t]
            else:
                if mode.name == "TS1":
                    idx = noise["member"][:, :, t]
                else:
                    idx = np.broadcast_to(np.arange(P) % K, (N, P))
                ii, jj = np.meshgrid(np.arange(N), np.arange(P), indexing="ij")
                mean = mean[idx, ii, jj]
                var = var[idx, ii, jj] if prob else None
                nxt = mean + np.sqrt(var) * noise["eps"][:, :, t] if prob else mean
        rewards[:, :, t] = reward_fn(s, a, nxt)
        states[:, :, t] = nxt
        s = nxt
    return states, rewards


def propagate(ensemble: DynamicsEnsemble, mode: PropagationMode, s0, actions, rng, reward_fn):
    """Propagate one action sequence ``(T, act)``.

    Returns per-particle state sequences ``(P, T, obs)`` and per-particle
    (undiscounted) returns ``(P,)``.
    """
    actions = np.asarray(actions, dtype=float)
    if actions.ndim != 2:
        raise ValueError("propagate expects a single (T, act_dim) action sequence")
    noise = draw_noise(ensemble, mode, 1, actions.shape[0], rng)
    states, rewards = propagate_batch(ensemble, mode, s0, actions[None], noise, reward_fn)
    return states[0], rewards[0].sum(axis=-1)
