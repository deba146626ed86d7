"""Random shooting and the cross-entropy method over open-loop action sequences."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import as_rng
from .config import CemConfig, RsConfig, TerminationScheme


@dataclass
class PlanResult:
    actions: np.ndarray  # (T, act) sequence to execute / warm start from
    value: float  # estimated return of ``actions``
    incumbent: np.ndarray | None = None  # best sampled candidate seen
    incumbent_value: float = float("-inf")
    history: list = field(default_factory=list)  # incumbent value per iteration


def _bounds(backend):
    return np.asarray(backend.spec.action_low, float), np.asarray(backend.spec.action_high, float)


def plan_rs(backend, s0, cfg: RsConfig, rng, scheme: TerminationScheme | None = None, workers=None) -> PlanResult:
    """Sample ``population`` uniform sequences and keep the highest-scoring one.

    Ties go to the lowest candidate index.
    """
    rng = as_rng(rng)
    lo, hi = _bounds(backend)
    seqs = rng.child(0).generator.uniform(lo, hi, size=(cfg.population, cfg.horizon, lo.size))
    returns = backend.evaluate(s0, seqs, rng.child(1), scheme, workers)
    best = int(np.argmax(returns))
    val = float(returns[best])
    return PlanResult(seqs[best], val, seqs[best], val, [val])


def truncated_normal(gen, shape, bound=2.0):
    """Standard normal samples redrawn until all lie within ``[-bound, bound]``."""
    z = gen.standard_normal(shape)
    bad = np.abs(z) > bound
    while bad.any():
        z[bad] = gen.standard_normal(int(bad.sum()))
        bad = np.abs(z) > bound
    return z


def shift_warm_start(prev, horizon, lo, hi):
    """Drop the executed first step and pad the tail with zeros (clamped)."""
    prev = np.asarray(prev, dtype=float)
    out = np.zeros((horizon, lo.size))
    keep = min(len(prev) - 1, horizon)
    if keep > 0:
        out[:keep] = prev[1 : 1 + keep]
    return np.clip(out, lo, hi)


def plan_cem(backend, s0, cfg: CemConfig, rng, warm_start=None,
             scheme: TerminationScheme | None = None, workers=None) -> PlanResult:
    """Cross-entropy search over a diagonal Gaussian on action sequences.

    ``warm_start`` is the initial mean (already shifted by the caller); the
    returned ``actions`` is the final mean. The best sampled candidate over
    all iterations is kept as ``incumbent``.
    """
    rng = as_rng(rng)
    lo, hi = _bounds(backend)
    T, d = cfg.horizon, lo.size
    if warm_start is None:
        mean = np.broadcast_to((lo + hi) / 2, (T, d)).copy()
    else:
        mean = np.clip(np.asarray(warm_start, dtype=float).reshape(T, d), lo, hi)
    std = np.broadcast_to(cfg.init_std_scale * (hi - lo), (T, d)).copy()
    inc, inc_val = None, -np.inf
    history = []
    for it in range(cfg.iterations):
        step_rng = rng.child(it)
        z = truncated_normal(step_rng.child(0).generator, (cfg.population, T, d), cfg.trunc)
        seqs = np.clip(mean + std * z, lo, hi)
        returns = backend.evaluate(s0, seqs, step_rng.child(1), scheme, workers)
        order = np.argsort(-returns, kind="stable")
        if returns[order[0]] > inc_val:
            inc, inc_val = seqs[order[0]].copy(), float(returns[order[0]])
        history.append(inc_val)
        elite = seqs[order[: cfg.elites]]
        mean = cfg.alpha * elite.mean(axis=0) + (1 - cfg.alpha) * mean
        var = cfg.alpha * elite.var(axis=0) + (1 - cfg.alpha) * std**2
        std = np.maximum(np.sqrt(var), cfg.min_std)
    return PlanResult(mean, float("nan"), inc, inc_val, history)
