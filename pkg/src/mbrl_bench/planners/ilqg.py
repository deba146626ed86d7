"""iLQG trajectory optimization against known (ground-truth) dynamics.

Dynamics are linearized by central finite differences; the reward, which
depends on ``(s_{t+1}, a_t)``, is quadratized from its analytic gradient plus
finite-difference Hessians. Cost is the negated reward.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import as_rng
from .backends import GroundTruthBackend
from .config import IlqgConfig


@dataclass
class IlqgResult:
    actions: np.ndarray  # nominal sequence (T, m)
    k: np.ndarray  # feedforward terms (T, m)
    K: np.ndarray  # feedback gains (T, m, n)
    cost: float
    states: np.ndarray  # nominal states (T + 1, n)
    costs: list = field(default_factory=list)  # accepted cost after each update
    restart_costs: list = field(default_factory=list)

    def __iter__(self):
        # allows ``actions, (k, K) = plan_ilqg(...)``
        return iter((self.actions, (self.k, self.K)))


def _rollout(env, s0, U):
    X = np.empty((len(U) + 1, len(s0)))
    X[0] = s0
    nxt, rew = env.rollout(s0, U)
    X[1:] = nxt
    return X, -float(rew.sum())


def _jacobian(fn, X, U, eps):
    """Central differences of ``fn(x, u)`` w.r.t. ``[x, u]`` at every step."""
    T, n = X.shape
    m = U.shape[1]
    Z = np.concatenate([X, U], axis=1)
    E = np.eye(n + m) * eps
    Zp = Z[:, None, :] + E
    Zm = Z[:, None, :] - E
    Fp = fn(Zp[..., :n], Zp[..., n:])
    Fm = fn(Zm[..., :n], Zm[..., n:])
    return np.swapaxes((Fp - Fm) / (2 * eps), 1, 2)  # (T, out, n + m)


def _derivatives(env, X, U, eps):
    n = X.shape[1]
    J = _jacobian(env.dynamics, X[:-1], U, eps)
    fx, fu = J[..., :n], J[..., n:]

    def cost_grad(s_next, a):
        gs, ga = env.reward_gradient(None, a, s_next)
        return -np.concatenate([gs, ga], axis=-1)

    Xn = X[1:]
    g = cost_grad(Xn, U)
    H = _jacobian(cost_grad, Xn, U, eps)
    H = 0.5 * (H + np.swapaxes(H, 1, 2))
    return fx, fu, g[:, :n], g[:, n:], H[:, :n, :n], H[:, n:, n:], H[:, :n, n:]


def _backward(fx, fu, cs, ca, css, caa, csa, mu):
    T, n, m = fu.shape
    k = np.zeros((T, m))
    K = np.zeros((T, m, n))
    Vx = np.zeros(n)
    Vxx = np.zeros((n, n))
    dV = np.zeros(2)
    I = np.eye(n)
    for t in range(T - 1, -1, -1):
        Wx = Vx + cs[t]
        Wxx = Vxx + css[t]
        Wreg = Wxx + mu * I
        A, B = fx[t], fu[t]
        Qx = A.T @ Wx
        Qu = ca[t] + B.T @ Wx
        Qxx = A.T @ Wxx @ A
        cross_u = csa[t].T  # (m, n)
        Quu = caa[t] + B.T @ Wreg @ B + B.T @ csa[t] + cross_u @ B
        Qux = B.T @ Wreg @ A + cross_u @ A
        Quu = 0.5 * (Quu + Quu.T)
        try:
            L = np.linalg.cholesky(Quu)
        except np.linalg.LinAlgError:
            return None
        kt = -np.linalg.solve(L.T, np.linalg.solve(L, Qu))
        Kt = -np.linalg.solve(L.T, np.linalg.solve(L, Qux))
        k[t], K[t] = kt, Kt
        dV += np.array([kt @ Qu, 0.5 * kt @ Quu @ kt])
        Qux_true = B.T @ Wxx @ A + cross_u @ A
        Quu_true = caa[t] + B.T @ Wxx @ B + B.T @ csa[t] + cross_u @ B
        Vx = Qx + Kt.T @ Quu_true @ kt + Kt.T @ Qu + Qux_true.T @ kt
        Vxx = Qxx + Kt.T @ Quu_true @ Kt + Kt.T @ Qux_true + Qux_true.T @ Kt
        Vxx = 0.5 * (Vxx + Vxx.T)
    return k, K, dV


def _forward(env, X, U, k, K, alpha):
    lo, hi = env.spec.action_low, env.spec.action_high
    T = len(U)
    Xn = np.empty_like(X)
    Un = np.empty_like(U)
    Xn[0] = X[0]
    cost = 0.0
    for t in range(T):
        Un[t] = np.clip(U[t] + alpha * k[t] + K[t] @ (Xn[t] - X[t]), lo, hi)
        Xn[t + 1] = env.dynamics(Xn[t], Un[t])
        cost -= float(env.reward(Xn[t], Un[t], Xn[t + 1]))
    return Xn, Un, cost


def optimize_trajectory(env, s0, U0, cfg: IlqgConfig) -> IlqgResult:
    """Run ``cfg.updates`` regularized iLQG iterations from nominal ``U0``."""
    s0 = np.asarray(s0, dtype=float)
    lo, hi = env.spec.action_low, env.spec.action_high
    U = np.clip(np.asarray(U0, dtype=float), lo, hi)
    X, cost = _rollout(env, s0, U)
    T, m = U.shape
    n = s0.size
    k, K = np.zeros((T, m)), np.zeros((T, m, n))
    mu = cfg.mu_init
    costs = []
    for _ in range(cfg.updates):
        derivs = _derivatives(env, X, U, cfg.fd_eps)
        out = _backward(*derivs, mu)
        while out is None:
            mu = max(mu * cfg.mu_up, cfg.mu_min)
            if mu > cfg.mu_max:
                break
            out = _backward(*derivs, mu)
        if out is None:
            break
        k, K, _ = out
        accepted = False
        alpha = 1.0
        for _ in range(cfg.backtracks):
            Xn, Un, c_new = _forward(env, X, U, k, K, alpha)
            if np.isfinite(c_new) and c_new < cost:
                accepted = True
                break
            alpha *= 0.5
        if accepted:
            rel = (cost - c_new) / max(abs(cost), 1e-12)
            X, U, cost = Xn, Un, c_new
            mu *= cfg.mu_down
            if mu < cfg.mu_min:
                mu = 0.0
            costs.append(cost)
            if rel < cfg.tol:
                break
        else:
            mu = max(mu * cfg.mu_up, cfg.mu_min)
            costs.append(cost)
            if mu > cfg.mu_max:
                break
    return IlqgResult(U, k, K, cost, X, costs)


def plan_ilqg(backend, s0, cfg: IlqgConfig, warm_start=None, rng=None) -> IlqgResult:
    """Best of ``cfg.restarts`` iLQG runs.

    The first run starts from ``warm_start`` (zeros if absent), the others from
    sequences drawn uniformly over the action box. Needs a ground-truth backend.
    """
    if not isinstance(backend, GroundTruthBackend):
        raise TypeError("iLQG plans against known dynamics; pass a GroundTruthBackend")
    env = backend.env
    lo, hi = env.spec.action_low, env.spec.action_high
    T, m = cfg.horizon, env.spec.act_dim
    gen = as_rng(rng).generator
    first = np.zeros((T, m)) if warm_start is None else np.asarray(warm_start, dtype=float).reshape(T, m)
    best = None
    restart_costs = []
    for r in range(cfg.restarts):
        U0 = first if r == 0 else gen.uniform(lo, hi, size=(T, m))
        res = optimize_trajectory(env, s0, U0, cfg)
        restart_costs.append(res.cost)
        if best is None or res.cost < best.cost:
            best = res
    best.restart_costs = restart_costs
    return best
