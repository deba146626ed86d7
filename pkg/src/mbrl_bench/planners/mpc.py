"""Receding-horizon execution: plan, apply the first action, shift, repeat."""

from __future__ import annotations

import numpy as np

from ..core import Trajectory, Transition, as_rng
from ..envs.wrappers import NoiseWrapper
from .config import CemConfig, IlqgConfig, RsConfig, TerminationScheme
from .ilqg import plan_ilqg
from .shooting import plan_cem, plan_rs, shift_warm_start


class Planner:
    """Per-episode planner state; ``act`` returns the action to execute."""

    def __init__(self, backend, cfg, scheme: TerminationScheme | None = None, workers=None):
        self.backend = backend
        self.cfg = cfg
        self.scheme = scheme
        self.workers = workers
        self.last = None

    @property
    def spec(self):
        return self.backend.spec

    def reset(self):
        self.last = None

    def plan(self, s, rng) -> np.ndarray:
        raise NotImplementedError

    def act(self, s, rng) -> np.ndarray:
        seq = self.plan(s, rng)
        self.last = seq
        return seq[0].copy()

    def _warm(self, horizon):
        if self.last is None:
            return None
        lo, hi = np.asarray(self.spec.action_low), np.asarray(self.spec.action_high)
        return shift_warm_start(self.last, horizon, lo, hi)


class RsPlanner(Planner):
    def plan(self, s, rng):
        return plan_rs(self.backend, s, self.cfg, rng, self.scheme, self.workers).actions


class CemPlanner(Planner):
    def plan(self, s, rng):
        res = plan_cem(self.backend, s, self.cfg, rng, self._warm(self.cfg.horizon), self.scheme, self.workers)
        return res.actions


class IlqgPlanner(Planner):
    def plan(self, s, rng):
        return plan_ilqg(self.backend, s, self.cfg, self._warm(self.cfg.horizon), rng).actions


class ConstantPlanner(Planner):
    """Always plans a fixed sequence (useful as a pass-through baseline)."""

    def __init__(self, spec, action):
        self._spec = spec
        self.action = np.asarray(action, dtype=float)
        self.last = None

    @property
    def spec(self):
        return self._spec

    def plan(self, s, rng):
        return self.action[None]


class RandomPlanner(ConstantPlanner):
    """Uniform random actions over the box."""

    def __init__(self, spec):
        super().__init__(spec, np.zeros(spec.act_dim))

    def plan(self, s, rng):
        lo, hi = self._spec.action_low, self._spec.action_high
        return as_rng(rng).generator.uniform(lo, hi)[None]


def make_planner(backend, cfg, scheme=None, workers=None) -> Planner:
    if isinstance(cfg, RsConfig):
        return RsPlanner(backend, cfg, scheme, workers)
    if isinstance(cfg, CemConfig):
        return CemPlanner(backend, cfg, scheme, workers)
    if isinstance(cfg, IlqgConfig):
        return IlqgPlanner(backend, cfg, scheme, workers)
    raise TypeError(f"no planner for config {type(cfg).__name__}")


def mpc_episode(env, planner: Planner, scheme: TerminationScheme | None, rng, max_steps=None) -> Trajectory:
    """Run one episode with re-planning at every step.

    ``env`` is an environment or a :class:`NoiseWrapper`; the planner sees
    (possibly noisy) observations and transitions record what the agent
    observed. Under scheme A termination is ignored and the episode runs to
    the horizon.
    """
    rng = as_rng(rng)
    if not isinstance(env, NoiseWrapper):
        env = NoiseWrapper(env)
    if planner.spec.act_dim != env.spec.act_dim:
        raise ValueError("planner and environment action dimensions differ")
    scheme = scheme or TerminationScheme("A")
    planner.reset()
    obs = env.reset(rng.child(0))
    traj = Trajectory()
    H = env.spec.horizon if max_steps is None else min(max_steps, env.spec.horizon)
    for t in range(H):
        a = np.asarray(planner.act(obs, rng.child(1, t)), dtype=float)
        nxt, r, done = env.step(a)
        done = done and scheme.env_terminates
        traj.append(Transition(obs, a, nxt, r, done))
        obs = nxt
        if done:
            break
    return traj
