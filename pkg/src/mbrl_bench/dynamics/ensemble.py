"""Deterministic and probabilistic dynamics ensembles and their training losses.

Members predict the normalized state delta; all K members are stored as one
stacked :class:`MlpParams` (leading member axis) and trained together, each
with its own initialization and minibatch order.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from ..core import RngStream, as_rng
from ..net import MlpParams, OptimizerState, concat, forward, grad, init_mlp, opt_step
from ..net import autodiff as ad
from ..net.mlp import params_from_flat
from .dataset import Normalizer, TransitionDataset, fit_normalizer

log = logging.getLogger(__name__)

KINDS = ("deterministic", "probabilistic")


@dataclass
class DynamicsConfig:
    n_members: int = 5
    kind: str = "probabilistic"
    hidden: tuple = (256, 256)
    activation: str = "swish"
    lr: float = 1e-3
    batch_size: int = 256
    epochs: int = 5
    max_steps: int | None = None  # cap on gradient steps per fit
    holdout: float = 0.1
    weight_decay: float = 0.0
    bootstrap: bool = False
    logvar_bounds: tuple = (-10.0, 0.5)
    bound_reg: float = 0.01
    ms_horizon: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.n_members < 1:
            raise ValueError("need at least one ensemble member")
        self.hidden = tuple(int(h) for h in self.hidden)


@dataclass
class DynamicsEnsemble:
    params: MlpParams  # stacked over members
    kind: str
    normalizer: Normalizer
    obs_dim: int
    act_dim: int
    holdout_loss: float = float("nan")
    train_loss: float = float("nan")
    opt_state: OptimizerState | None = field(default=None, repr=False)

    @property
    def n_members(self) -> int:
        return self.params.n_members

    def copy(self) -> "DynamicsEnsemble":
        return replace(self, params=self.params.copy(), opt_state=None)

    def member(self, k: int) -> "DynamicsEnsemble":
        """Single-member ensemble holding member ``k``."""
        sel = [a[k : k + 1].copy() for a in self.params.arrays()]
        return replace(self, params=self.params.with_arrays(sel), opt_state=None)

    def permuted(self, order) -> "DynamicsEnsemble":
        order = np.asarray(order)
        return replace(self, params=self.params.with_arrays([a[order] for a in self.params.arrays()]))

    # -- raw network outputs -------------------------------------------------
    def _heads(self, params, x_norm, with_var=True):
        out = forward(params, x_norm)
        n = self.obs_dim
        mean = out[..., :n]
        if self.kind == "deterministic" or not with_var:
            return mean, None
        hi, lo = params.extras["max_logvar"], params.extras["min_logvar"]
        raw = out[..., n:]
        lv = hi - ad.softplus(hi - raw)
        lv = lo + ad.softplus(lv - lo)
        return mean, lv

    def member_predict(self, s, a, stacked=False, with_var=True):
        """Per-member next-state mean and variance, shape ``(K, ..., obs_dim)``.

        With ``stacked=True`` the inputs carry a leading member axis of size K
        and member k only sees slice k; otherwise every member sees all inputs.
        ``with_var=False`` skips the variance head and returns ``None`` for it.
        """
        s = np.asarray(s, dtype=float)
        a = np.asarray(a, dtype=float)
        K = self.n_members
        x = self.normalizer.normalize_input(np.concatenate([s, a], axis=-1))
        if stacked:
            if s.shape[0] != K:
                raise ValueError(f"stacked inputs need leading axis {K}, got {s.shape[0]}")
            out_shape = s.shape
            xk = x.reshape(K, -1, x.shape[-1])
            base = s.reshape(K, -1, self.obs_dim)
        else:
            out_shape = (K,) + s.shape
            xk = x.reshape(1, -1, x.shape[-1])
            base = s.reshape(1, -1, self.obs_dim)
        mean_n, lv = self._heads(self.params, xk, with_var)
        mean = base + self.normalizer.denormalize_target(mean_n)
        if not with_var:
            return mean.reshape(out_shape), None
        if lv is None:
            var = np.zeros_like(mean)
        else:
            var = np.exp(lv) * self.normalizer.out_std**2
        return mean.reshape(out_shape), var.reshape(out_shape)


def predict(ensemble: DynamicsEnsemble, member_index: int, s, a):
    """Denormalized ``(mean next state, per-dim variance)`` of one member."""
    if not 0 <= member_index < ensemble.n_members:
        raise IndexError(f"member {member_index} out of range for K={ensemble.n_members}")
    s = np.asarray(s, dtype=float)
    a = np.asarray(a, dtype=float)
    mean, var = ensemble.member(member_index).member_predict(s, a)
    return mean[0], var[0]


# -- construction --------------------------------------------------------------

def new_ensemble(obs_dim, act_dim, normalizer, cfg: DynamicsConfig, rng) -> DynamicsEnsemble:
    rng = as_rng(rng)
    n_out = obs_dim * (2 if cfg.kind == "probabilistic" else 1)
    sizes = [obs_dim + act_dim, *cfg.hidden, n_out]
    params = init_mlp(sizes, cfg.activation, rng, n_members=cfg.n_members)
    if cfg.kind == "probabilistic":
        lo, hi = cfg.logvar_bounds
        params.extras["max_logvar"] = np.full((cfg.n_members, 1, obs_dim), float(hi))
        params.extras["min_logvar"] = np.full((cfg.n_members, 1, obs_dim), float(lo))
    return DynamicsEnsemble(params, cfg.kind, normalizer, obs_dim, act_dim)


# -- losses ------------------------------------------------------------------

def single_step_loss(ens: DynamicsEnsemble, params, x_norm, y_norm):
    """Mean squared error in normalized delta units (per member, then averaged)."""
    mean, _ = ens._heads(params, x_norm)
    return ((mean - y_norm) ** 2).mean()


def nll_loss(ens: DynamicsEnsemble, params, x_norm, y_norm, bound_reg=0.01):
    """Diagonal-Gaussian negative log-likelihood (up to constants) plus the
    soft-bound regularizer ``bound_reg * (sum max_logvar - sum min_logvar)``."""
    mean, lv = ens._heads(params, x_norm)
    inv_var = ad.exp(-lv) if isinstance(lv, ad.Tensor) else np.exp(-lv)
    nll = (((mean - y_norm) ** 2) * inv_var + lv).mean(axis=(1, 2)).sum() * (1.0 / ens.n_members)
    hi, lo = params.extras["max_logvar"], params.extras["min_logvar"]
    return nll + bound_reg * (hi.sum() - lo.sum()) * (1.0 / ens.n_members)


def multistep_loss(ens: DynamicsEnsemble, params, states, actions, squared=True):
    """Sum over h = 1..H of the h-step open-loop prediction error.

    ``states``: ``(K, B, H + 1, obs)`` observed sequence, ``actions``:
    ``(K, B, H, act)``. Errors are measured in normalized delta units so that
    H = 1 coincides with :func:`single_step_loss`. With ``squared=False`` the
    per-sample error is the (unsquared) Euclidean norm.
    """
    nz = ens.normalizer
    H = actions.shape[2]
    pred = states[:, :, 0, :]
    total = 0.0
    for h in range(H):
        x = concat([pred, actions[:, :, h, :]], axis=-1)
        x = (x - nz.in_mean) * (1.0 / nz.in_std)
        mean_n, _ = ens._heads(params, x)
        pred = pred + (mean_n * nz.out_std + nz.out_mean)
        err = (pred - states[:, :, h + 1, :]) * (1.0 / nz.out_std)
        if squared:
            total = total + (err**2).mean()
        else:
            total = total + ad.sqrt((err**2).sum(axis=-1)).mean()
    return float(total) if not isinstance(total, ad.Tensor) else total


# -- training ----------------------------------------------------------------

def _split(n, holdout, gen):
    perm = gen.permutation(n)
    n_hold = int(round(n * holdout)) if n > 1 else 0
    return perm[n_hold:], perm[:n_hold]


def _member_batches(n_train, cfg, gen, n_steps):
    """Yield ``(K, batch)`` index arrays; every member shuffles independently."""
    K, B = cfg.n_members, min(cfg.batch_size, n_train)
    pools = [gen.choice(n_train, n_train) if cfg.bootstrap else np.arange(n_train) for _ in range(K)]
    orders = [gen.permutation(p) for p in pools]
    pos = 0
    for _ in range(n_steps):
        if pos + B > n_train:
            orders = [gen.permutation(p) for p in pools]
            pos = 0
        yield np.stack([o[pos : pos + B] for o in orders])
        pos += B


def _n_steps(n_train, cfg):
    steps = cfg.epochs * int(np.ceil(n_train / min(cfg.batch_size, n_train)))
    return min(steps, cfg.max_steps) if cfg.max_steps else steps


def _fit(ens, cfg, loss_on, n_train, gen, eval_holdout):
    opt = ens.opt_state
    if opt is None or opt.lr != cfg.lr:
        opt = OptimizerState.for_params(ens.params, lr=cfg.lr, weight_decay=cfg.weight_decay)
    params = ens.params
    loss = float("nan")
    for idx in _member_batches(n_train, cfg, gen, _n_steps(n_train, cfg)):
        loss, g = grad(params, loss_on, idx, return_loss=True)
        params, opt = opt_step(opt, params, g)
        if not params.is_finite():
            raise FloatingPointError("parameters became non-finite during training")
    ens = replace(ens, params=params, opt_state=opt, train_loss=loss)
    ens.holdout_loss = eval_holdout(ens)
    return ens


def _prepare(data: TransitionDataset, cfg: DynamicsConfig, init, rng):
    if len(data) < min(cfg.batch_size, 2):
        raise ValueError(f"dataset has {len(data)} transitions, need at least a minibatch")
    rng = as_rng(rng)
    gen = rng.child(0).generator
    norm = fit_normalizer(data)
    if init is None:
        ens = new_ensemble(data.obs_dim, data.act_dim, norm, cfg, rng.child(1))
    else:
        if init.kind != cfg.kind or init.n_members != cfg.n_members:
            raise ValueError("warm-start ensemble does not match the config")
        ens = replace(init, normalizer=norm)
    return ens, norm, gen


def train_deterministic(data: TransitionDataset, cfg: DynamicsConfig, init=None, rng=None):
    """Fit every member to normalized state deltas with squared L2 loss."""
    if cfg.kind != "deterministic":
        cfg = replace(cfg, kind="deterministic")
    ens, norm, gen = _prepare(data, cfg, init, rng if rng is not None else cfg.seed)
    X = norm.normalize_input(np.concatenate([data.states, data.actions], axis=1))
    Y = norm.normalize_target(data.next_states - data.states)
    tr, ho = _split(len(data), cfg.holdout, gen)
    Xtr, Ytr = X[tr], Y[tr]

    def loss_on(p, idx):
        return single_step_loss(ens, p, Xtr[idx], Ytr[idx])

    def holdout(e):
        if len(ho) == 0:
            return float("nan")
        return float(single_step_loss(e, e.params, X[ho][None], Y[ho][None]))

    return _fit(ens, cfg, loss_on, len(tr), gen, holdout)


def train_probabilistic(data: TransitionDataset, cfg: DynamicsConfig, init=None, rng=None):
    """Fit every member by diagonal-Gaussian NLL on normalized deltas."""
    if cfg.kind != "probabilistic":
        cfg = replace(cfg, kind="probabilistic")
    ens, norm, gen = _prepare(data, cfg, init, rng if rng is not None else cfg.seed)
    X = norm.normalize_input(np.concatenate([data.states, data.actions], axis=1))
    Y = norm.normalize_target(data.next_states - data.states)
    tr, ho = _split(len(data), cfg.holdout, gen)
    Xtr, Ytr = X[tr], Y[tr]

    def loss_on(p, idx):
        return nll_loss(ens, p, Xtr[idx], Ytr[idx], cfg.bound_reg)

    def holdout(e):
        if len(ho) == 0:
            return float("nan")
        return gaussian_nll(e, X[ho], Y[ho])

    return _fit(ens, cfg, loss_on, len(tr), gen, holdout)


def gaussian_nll(ens: DynamicsEnsemble, x_norm, y_norm) -> float:
    """Mean per-dimension Gaussian NLL (with constants) in normalized units."""
    mean, lv = ens._heads(ens.params, np.broadcast_to(x_norm, (ens.n_members,) + x_norm.shape))
    if lv is None:
        lv = np.zeros_like(mean)
    return float(np.mean(0.5 * ((mean - y_norm) ** 2 * np.exp(-lv) + lv + np.log(2 * np.pi))))


def train_multistep(data: TransitionDataset, cfg: DynamicsConfig, ms_horizon=None, init=None,
                    rng=None, squared=True):
    """Fit deterministic members on the summed h-step open-loop error."""
    H = int(ms_horizon if ms_horizon is not None else cfg.ms_horizon)
    if H < 1:
        raise ValueError("ms_horizon must be >= 1")
    if cfg.kind != "deterministic":
        cfg = replace(cfg, kind="deterministic")
    starts = data.windows(H)
    if len(starts) == 0:
        raise ValueError(f"no contiguous sub-trajectories of length {H} in the dataset")
    ens, norm, gen = _prepare(data, cfg, init, rng if rng is not None else cfg.seed)
    offs = np.arange(H)
    S = np.concatenate([data.states[starts[:, None] + offs], data.next_states[starts + H - 1][:, None]], axis=1)
    A = data.actions[starts[:, None] + offs]
    tr, ho = _split(len(starts), cfg.holdout, gen)
    Str, Atr = S[tr], A[tr]

    def loss_on(p, idx):
        return multistep_loss(ens, p, Str[idx], Atr[idx], squared)

    def holdout(e):
        if len(ho) == 0:
            return float("nan")
        return float(multistep_loss(e, e.params, S[ho][None], A[ho][None], squared))

    return _fit(ens, cfg, loss_on, len(tr), gen, holdout)


def train(data, cfg: DynamicsConfig, init=None, rng=None):
    """Dispatch on ``cfg.kind``."""
    if cfg.kind == "probabilistic":
        return train_probabilistic(data, cfg, init, rng)
    return train_deterministic(data, cfg, init, rng)


# -- checkpoints -----------------------------------------------------------------

def save_ensemble(path, ens: DynamicsEnsemble):
    arrays = ens.params.arrays()
    meta = {
        "format": "dynamics-ensemble/1",
        "kind": ens.kind,
        "obs_dim": ens.obs_dim,
        "act_dim": ens.act_dim,
        "sizes": ens.params.sizes,
        "activation": ens.params.activation,
        "n_members": ens.n_members,
        "shapes": [list(a.shape) for a in arrays],
        "extras": sorted(ens.params.extras),
    }
    flat = np.concatenate([a.ravel() for a in arrays])
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta)), flat=flat, **ens.normalizer.to_dict())


def load_ensemble(path) -> DynamicsEnsemble:
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        params = params_from_flat(meta, z["flat"])
        norm = Normalizer(z["in_mean"], z["in_std"], z["out_mean"], z["out_std"])
    return DynamicsEnsemble(params, meta["kind"], norm, meta["obs_dim"], meta["act_dim"])
