"""Candidate evaluators: ground-truth environment or learned ensemble."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..core import as_rng
from ..dynamics.propagate import PropagationMode, draw_noise, propagate_batch
from .config import TerminationScheme

CHUNK = 1024  # fixed candidate block; independent of worker count


def first_terminal(flags):
    """Index of the first True along the last axis (``T`` when none)."""
    flags = np.asarray(flags, dtype=bool)
    T = flags.shape[-1]
    return np.where(flags.any(axis=-1), flags.argmax(axis=-1), T)


def adjust_rewards(rewards, flags, scheme: TerminationScheme | None):
    """Per-step rewards as the planner scores them under ``scheme``.

    ``flags[..., t]`` marks the pre-action state of step ``t`` as terminal.
    """
    rewards = np.asarray(rewards, dtype=float)
    if scheme is None or not scheme.planner_aware:
        return rewards
    k = first_terminal(flags)
    after = np.arange(rewards.shape[-1]) >= k[..., None]
    if scheme.kind == "B":
        return np.where(after, -scheme.penalty_multiplier * scheme.alive_bonus, rewards)
    return np.where(after, 0.0, rewards)


def apply_termination_scheme(states, rewards, predicate, scheme: TerminationScheme | str, gamma=1.0):
    """Scheme-adjusted return of predicted trajectories.

    ``states[..., t, :]`` is the state *before* action ``t`` and ``rewards``
    has matching shape ``(..., T)``; ``predicate`` maps states to booleans.
    """
    if isinstance(scheme, str):
        scheme = TerminationScheme(scheme)
    rewards = np.asarray(rewards, dtype=float)
    states = np.asarray(states, dtype=float)
    if states.shape[:-1] != rewards.shape:
        raise ValueError("states and rewards must cover the same steps")
    flags = np.asarray(predicate(states), dtype=bool)
    adj = adjust_rewards(rewards, flags, scheme)
    return discounted_sum(adj, gamma)


def discounted_sum(rewards, gamma=1.0):
    if gamma == 1.0:
        return rewards.sum(axis=-1)
    return rewards @ (gamma ** np.arange(rewards.shape[-1]))


def _pre_states(s0, next_states):
    """Shift next-state sequences right so index t holds the state before action t."""
    pre = np.empty_like(next_states)
    pre[..., 0, :] = s0
    pre[..., 1:, :] = next_states[..., :-1, :]
    return pre


class _Backend:
    gamma: float = 1.0
    workers: int = 1

    def _draw(self, n, T, rng):
        return None

    def _rollout_chunk(self, s0, seqs, noise):
        raise NotImplementedError

    def terminal(self, states):
        raise NotImplementedError

    def rollout(self, s0, seqs, rng=None, workers=None):
        """Pre-action states ``(N, P, T, obs)`` and rewards ``(N, P, T)``."""
        seqs = np.asarray(seqs, dtype=float)
        N, T = seqs.shape[:2]
        noise = self._draw(N, T, rng)
        blocks = [slice(i, min(i + CHUNK, N)) for i in range(0, N, CHUNK)]

        def run(sl):
            sub = None if noise is None else {k: v[sl] for k, v in noise.items()}
            return self._rollout_chunk(s0, seqs[sl], sub)

        workers = self.workers if workers is None else workers
        if workers > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(run, blocks))
        else:
            parts = [run(sl) for sl in blocks]
        nxt = np.concatenate([p[0] for p in parts])
        rew = np.concatenate([p[1] for p in parts])
        return _pre_states(np.asarray(s0, dtype=float), nxt), rew

    def evaluate(self, s0, seqs, rng=None, scheme: TerminationScheme | None = None, workers=None):
        """Expected (particle-averaged) return of each candidate sequence.

        Accepts one sequence ``(T, act)`` or a batch ``(N, T, act)``.
        """
        seqs = np.asarray(seqs, dtype=float)
        single = seqs.ndim == 2
        if single:
            seqs = seqs[None]
        pre, rew = self.rollout(s0, seqs, rng, workers)
        if scheme is not None and scheme.planner_aware:
            rew = adjust_rewards(rew, self.terminal(pre), scheme)
        ret = discounted_sum(rew, self.gamma).mean(axis=1)
        return float(ret[0]) if single else ret


class GroundTruthBackend(_Backend):
    """Scores candidates with the true environment step and reward."""

    def __init__(self, env, gamma: float = 1.0, workers: int = 1):
        self.env = env
        self.spec = env.spec
        self.gamma = gamma
        self.workers = workers

    def _rollout_chunk(self, s0, seqs, noise):
        nxt, rew = self.env.rollout(s0, seqs)
        return nxt[:, None], rew[:, None]

    def terminal(self, states):
        return self.env.terminal(states)


class LearnedBackend(_Backend):
    """Scores candidates by propagating particles through a dynamics ensemble.

    Rewards and the termination predicate come from ``env`` evaluated on the
    predicted states.
    """

    def __init__(self, ensemble, mode: PropagationMode, env, gamma: float = 1.0, workers: int = 1):
        self.ensemble = ensemble
        self.mode = mode
        self.env = env
        self.spec = env.spec
        self.gamma = gamma
        self.workers = workers

    def _draw(self, n, T, rng):
        return draw_noise(self.ensemble, self.mode, n, T, as_rng(rng))

    def _rollout_chunk(self, s0, seqs, noise):
        seqs = np.clip(seqs, self.spec.action_low, self.spec.action_high)
        return propagate_batch(self.ensemble, self.mode, s0, seqs, noise, self.env.reward)

    def terminal(self, states):
        return self.env.terminal(states)
