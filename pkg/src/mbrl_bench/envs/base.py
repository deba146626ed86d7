"""Environment base class and the module-level functional API."""

from __future__ import annotations

import numpy as np

from ..core import EnvSpec, RngStream, as_rng, clamp_action


class Environment:
    """Analytic, stateless dynamical system with a differentiable reward.

    Subclasses implement the vectorized hooks ``_dynamics``, ``_reward``,
    ``_reward_grad`` and ``_sample_init``; everything operates on arrays with
    arbitrary leading batch dimensions and the observation as last axis.
    Rewards are functions of the action and the *resulting* state.
    """

    name: str = "env"
    defaults: dict = {}

    def __init__(self, **overrides):
        unknown = set(overrides) - set(self.defaults)
        if unknown:
            raise KeyError(f"{self.name}: unknown physics constants {sorted(unknown)}")
        self.params = dict(self.defaults, **overrides)
        self.spec = self._make_spec()

    # -- hooks -----------------------------------------------------------
    def _make_spec(self) -> EnvSpec:
        raise NotImplementedError

    def _dynamics(self, s: np.ndarray, a: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _reward(self, a: np.ndarray, s_next: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _reward_grad(self, a, s_next):
        raise NotImplementedError

    def _sample_init(self, gen: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def terminal(self, s: np.ndarray) -> np.ndarray:
        """Termination predicate; all-False for environments without one."""
        s = np.asarray(s, dtype=float)
        return np.zeros(s.shape[:-1], dtype=bool)

    # -- vectorized public API ---------------------------------------------
    def dynamics(self, s, a) -> np.ndarray:
        """Batched next state; ``a`` is clamped to the action box first."""
        return self._dynamics(np.asarray(s, dtype=float), clamp_action(a, self.spec))

    def reward(self, s, a, s_next) -> np.ndarray:
        return self._reward(np.asarray(a, dtype=float), np.asarray(s_next, dtype=float))

    def reward_gradient(self, s, a, s_next):
        """``(dr/ds_next, dr/da)`` of the analytic reward."""
        return self._reward_grad(np.asarray(a, dtype=float), np.asarray(s_next, dtype=float))

    def reset(self, rng=None) -> np.ndarray:
        return self._sample_init(as_rng(rng).generator)

    def step(self, s, a):
        """Single transition ``(next_state, reward, terminated)``."""
        s = np.asarray(s, dtype=float)
        a = np.asarray(a, dtype=float)
        if s.shape != (self.spec.obs_dim,) or a.shape != (self.spec.act_dim,):
            raise ValueError(
                f"{self.name}: expected state ({self.spec.obs_dim},) and action "
                f"({self.spec.act_dim},), got {s.shape} and {a.shape}"
            )
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(a))):
            raise ValueError(f"{self.name}: non-finite state or action")
        a = clamp_action(a, self.spec)
        nxt = self._dynamics(s, a)
        r = float(self._reward(a, nxt))
        done = bool(self.terminal(nxt)) if self.spec.has_termination else False
        return nxt, r, done

    def rollout(self, s0, actions):
        """Open-loop batched rollout.

        ``actions`` has shape ``(..., T, act_dim)``; returns next states
        ``(..., T, obs_dim)`` and rewards ``(..., T)``.
        """
        actions = clamp_action(actions, self.spec)
        T = actions.shape[-2]
        batch = actions.shape[:-2]
        s = np.broadcast_to(np.asarray(s0, dtype=float), batch + (self.spec.obs_dim,))
        states = np.empty(batch + (T, self.spec.obs_dim))
        rewards = np.empty(batch + (T,))
        for t in range(T):
            a = actions[..., t, :]
            s = self._dynamics(s, a)
            states[..., t, :] = s
            rewards[..., t] = self._reward(a, s)
        return states, rewards

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


def _uniform(gen, low, high):
    low = np.asarray(low, dtype=float)
    high = np.asarray(high, dtype=float)
    # zero-width coordinates must return the centre exactly
    return np.where(high > low, gen.uniform(low, np.maximum(high, low)), low)


def reset(env: Environment, rng: RngStream | int | None = None) -> np.ndarray:
    return env.reset(rng)


def step(env: Environment, s, a):
    return env.step(s, a)


def reward(env: Environment, s, a, s_next):
    return env.reward(s, a, s_next)


def reward_gradient(env: Environment, s, a, s_next):
    return env.reward_gradient(s, a, s_next)
