"""Adam optimizer over :class:`MlpParams`."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mlp import MlpParams


@dataclass
class OptimizerState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    step: int = 0

    @classmethod
    def for_params(cls, params: MlpParams, **kw) -> "OptimizerState":
        arrays = params.arrays()
        return cls(m=[np.zeros_like(a) for a in arrays], v=[np.zeros_like(a) for a in arrays], **kw)


def opt_step(state: OptimizerState, params: MlpParams, gradient: MlpParams):
    """One Adam update; returns ``(new_params, new_state)`` and leaves inputs untouched."""
    ps, gs = params.arrays(), gradient.arrays()
    if len(ps) != len(gs) or len(ps) != len(state.m):
        raise ValueError("parameter, gradient and accumulator structures differ")
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_p, new_m, new_v = [], [], []
    for p, g, m, v in zip(ps, gs, state.m, state.v):
        if p.shape != g.shape or p.shape != m.shape:
            raise ValueError(f"shape mismatch: param {p.shape}, grad {g.shape}, moment {m.shape}")
        if state.weight_decay:
            g = g + state.weight_decay * p
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1**t)
        vhat = v / (1 - b2**t)
        new_p.append(p - state.lr * mhat / (np.sqrt(vhat) + state.eps))
        new_m.append(m)
        new_v.append(v)
    new_state = OptimizerState(state.lr, b1, b2, state.eps, state.weight_decay, new_m, new_v, t)
    return params.with_arrays(new_p), new_state
