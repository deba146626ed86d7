"""Observation/action noise wrapper and termination predicates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import RngStream, as_rng, clamp_action
from .base import Environment


class NoiseWrapper:
    """Adds Gaussian white noise to executed actions and returned observations.

    The wrapper keeps the true (noise-free) state between steps; rewards are
    always computed from the true transition. Noise is drawn from the
    wrapper's own stream, so ``sigma_o = sigma_a = 0`` reproduces the inner
    environment exactly.
    """

    def __init__(self, inner: Environment, sigma_o: float = 0.0, sigma_a: float = 0.0, rng=None):
        if sigma_o < 0 or sigma_a < 0:
            raise ValueError("noise standard deviations must be non-negative")
        self.inner = inner
        self.sigma_o = float(sigma_o)
        self.sigma_a = float(sigma_a)
        self.rng = as_rng(rng)
        self.true_state = None

    @property
    def spec(self):
        return self.inner.spec

    @property
    def name(self):
        return self.inner.name

    def terminal(self, s):
        return self.inner.terminal(s)

    def _observe(self, s, gen):
        if self.sigma_o == 0.0:
            return s.copy()
        return s + gen.normal(0.0, self.sigma_o, size=s.shape)

    def reset(self, rng=None) -> np.ndarray:
        self.true_state = self.inner.reset(rng)
        return self._observe(self.true_state, self.rng.generator)

    def step(self, a, rng: RngStream | None = None):
        """Step from the retained true state; returns ``(observed, reward, terminated)``."""
        if self.true_state is None:
            raise RuntimeError("NoiseWrapper.step called before reset")
        gen = (rng or self.rng).generator
        a = np.asarray(a, dtype=float)
        if self.sigma_a > 0.0:
            a = clamp_action(a + gen.normal(0.0, self.sigma_a, size=a.shape), self.spec)
        nxt, r, done = self.inner.step(self.true_state, a)
        self.true_state = nxt
        return self._observe(nxt, gen), r, done

    def executed_action(self, a, rng: RngStream | None = None):
        """Draw one noisy executed action without stepping (for inspection)."""
        gen = (rng or self.rng).generator
        a = np.asarray(a, dtype=float)
        if self.sigma_a == 0.0:
            return clamp_action(a, self.spec)
        return clamp_action(a + gen.normal(0.0, self.sigma_a, size=a.shape), self.spec)


def noisy_step(wrapper: NoiseWrapper, s, a, rng=None):
    """Functional form of :meth:`NoiseWrapper.step`.

    If ``s`` is given it becomes the true state to step from; pass ``None``
    to continue from the retained one.
    """
    if s is not None:
        wrapper.true_state = np.asarray(s, dtype=float)
    return wrapper.step(a, None if rng is None else as_rng(rng))


@dataclass(frozen=True)
class TerminationPredicate:
    """Threshold rule on the state: terminal once any ``|s[i]| > threshold``."""

    env_name: str
    thresholds: dict  # state index -> threshold

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape[:-1], dtype=bool)
        for i, thr in self.thresholds.items():
            out |= np.abs(s[..., int(i)]) > thr
        return out

    @classmethod
    def for_env(cls, env) -> "TerminationPredicate | None":
        if not env.spec.has_termination:
            return None
        inner = getattr(env, "inner", env)
        p = inner.params
        return cls(env.spec.name, {2: p["theta_threshold"], 0: p["x_threshold"]})
