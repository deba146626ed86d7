"""Discrete-time linear system with quadratic reward, for planner checks."""

from __future__ import annotations

import numpy as np

from ..core import EnvSpec
from .base import Environment


class LinearQuadratic(Environment):
    """``s' = A s + B a`` with reward ``-(s'^T Q s' + a^T R a)``.

    Not in the registry since it is parameterized by matrices.
    """

    name = "linear_quadratic"
    defaults = {"horizon": 20, "action_bound": 1e6, "init_scale": 1.0}

    def __init__(self, A, B, Q=None, R=None, **overrides):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.B = np.atleast_2d(np.asarray(B, dtype=float))
        n, m = self.B.shape
        self.Q = np.eye(n) if Q is None else np.atleast_2d(np.asarray(Q, dtype=float))
        self.R = np.eye(m) if R is None else np.atleast_2d(np.asarray(R, dtype=float))
        super().__init__(**overrides)

    def _make_spec(self):
        n, m = self.B.shape
        b = float(self.params["action_bound"])
        w = float(self.params["init_scale"])
        return EnvSpec(
            name=self.name, obs_dim=n, act_dim=m, horizon=int(self.params["horizon"]),
            action_low=[-b] * m, action_high=[b] * m,
            init_distribution=("uniform", {"low": [-w] * n, "high": [w] * n}),
        )

    def _dynamics(self, s, a):
        return s @ self.A.T + a @ self.B.T

    def _reward(self, a, s_next):
        return -(np.einsum("...i,ij,...j->...", s_next, self.Q, s_next)
                 + np.einsum("...i,ij,...j->...", a, self.R, a))

    def _reward_grad(self, a, s_next):
        return -s_next @ (self.Q + self.Q.T), -a @ (self.R + self.R.T)

    def _sample_init(self, gen):
        w = float(self.params["init_scale"])
        return gen.uniform(-w, w, size=self.A.shape[0])
