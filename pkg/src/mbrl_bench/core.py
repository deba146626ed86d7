"""Shared domain types: env specs, transitions, trajectories and RNG streams."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class EnvSpec:
    """Static description of an environment.

    ``init_distribution`` is a ``(name, params)`` pair, e.g.
    ``("uniform", {"low": [...], "high": [...]})``.
    """

    name: str
    obs_dim: int
    act_dim: int
    horizon: int
    action_low: np.ndarray
    action_high: np.ndarray
    has_termination: bool = False
    init_distribution: tuple = ("uniform", {})
    gamma: float = 1.0

    def __post_init__(self):
        low = np.asarray(self.action_low, dtype=float).reshape(-1)
        high = np.asarray(self.action_high, dtype=float).reshape(-1)
        if low.shape != (self.act_dim,) or high.shape != (self.act_dim,):
            raise ValueError(f"{self.name}: action bounds must have length {self.act_dim}")
        if not np.all(low < high):
            raise ValueError(f"{self.name}: action_low must be < action_high elementwise")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"{self.name}: gamma must lie in (0, 1]")
        low.setflags(write=False)
        high.setflags(write=False)
        object.__setattr__(self, "action_low", low)
        object.__setattr__(self, "action_high", high)


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: np.ndarray
    next_state: np.ndarray
    reward: float
    terminated: bool = False


@dataclass
class Trajectory:
    transitions: list = field(default_factory=list)

    def __len__(self):
        return len(self.transitions)

    def append(self, tr: Transition):
        if self.transitions and self.transitions[-1].terminated:
            raise ValueError("cannot extend a trajectory past a terminal transition")
        self.transitions.append(tr)

    @property
    def rewards(self) -> np.ndarray:
        return np.array([t.reward for t in self.transitions], dtype=float)

    @property
    def actions(self) -> np.ndarray:
        return np.array([t.action for t in self.transitions])

    @property
    def states(self) -> np.ndarray:
        return np.array([t.state for t in self.transitions])

    @property
    def next_states(self) -> np.ndarray:
        return np.array([t.next_state for t in self.transitions])

    @property
    def terminated(self) -> bool:
        return bool(self.transitions) and self.transitions[-1].terminated


def trajectory_return(traj: Trajectory | Sequence[float], gamma: float = 1.0) -> float:
    """Discounted sum ``sum_t gamma**t * r_t`` with t starting at 0.

    Accepts a :class:`Trajectory` or a plain sequence of rewards.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    rewards = traj.rewards if isinstance(traj, Trajectory) else np.asarray(traj, dtype=float)
    if rewards.size == 0:
        return 0.0
    if gamma == 1.0:
        return float(np.sum(rewards))
    return float(np.sum(rewards * gamma ** np.arange(rewards.size)))


def clamp_action(a, spec: EnvSpec) -> np.ndarray:
    """Clamp ``a`` (shape ``(..., act_dim)``) into the action box of ``spec``."""
    a = np.asarray(a, dtype=float)
    if a.shape[-1:] != (spec.act_dim,):
        raise ValueError(f"action has trailing dim {a.shape[-1:]}, expected ({spec.act_dim},)")
    return np.clip(a, spec.action_low, spec.action_high)


class RngStream:
    """Hierarchical, reproducible random stream.

    A stream is identified by ``(seed, stream_id)`` where ``stream_id`` is a
    path of non-negative integers (experiment -> seed-run -> episode ->
    candidate). Children are derived with :meth:`child`; equal identifiers
    always produce bit-identical draws, distinct ones independent draws
    (via :class:`numpy.random.SeedSequence` spawn keys).
    """

    def __init__(self, seed: int, stream_id: int | Sequence[int] = ()):
        if isinstance(stream_id, (int, np.integer)):
            stream_id = (int(stream_id),)
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream_id = tuple(int(i) for i in stream_id)
        self._gen = None

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=self.stream_id)
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def child(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id + tuple(int(i) for i in ids))

    # thin pass-throughs to the generator
    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.generator.normal(loc, scale, size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def as_rng(rng) -> RngStream:
    """Coerce an int seed or an existing stream into an :class:`RngStream`."""
    if isinstance(rng, RngStream):
        return rng
    if rng is None:
        return RngStream(0)
    return RngStream(int(rng))
