"""Multilayer perceptron parameters, forward pass, gradients and checkpoints.

Weights may carry a leading member axis, ``(K, fan_in, fan_out)`` with biases
``(K, 1, fan_out)``, so that a whole ensemble runs as one batched matmul.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad

ACTIVATIONS = {"tanh": ad.tanh, "relu": ad.relu, "swish": ad.swish}


@dataclass
class MlpParams:
    weights: list
    biases: list
    activation: str = "swish"
    extras: dict = field(default_factory=dict)  # auxiliary trainable arrays

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}; choose from {sorted(ACTIVATIONS)}")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need one bias per weight matrix and at least one layer")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape[-1] != b.shape[-1]:
                raise ValueError(f"layer {i}: weight {w.shape} and bias {b.shape} disagree")
            if i and self.weights[i - 1].shape[-1] != w.shape[-2]:
                raise ValueError(f"layer {i}: fan-in {w.shape[-2]} != previous fan-out")

    @property
    def sizes(self) -> list:
        return [self.weights[0].shape[-2]] + [w.shape[-1] for w in self.weights]

    @property
    def n_members(self) -> int | None:
        return self.weights[0].shape[0] if self.weights[0].ndim == 3 else None

    def arrays(self) -> list:
        """Flat list of trainable arrays (weights, biases, then extras by key)."""
        return list(self.weights) + list(self.biases) + [self.extras[k] for k in sorted(self.extras)]

    def with_arrays(self, arrays) -> "MlpParams":
        n = len(self.weights)
        keys = sorted(self.extras)
        return MlpParams(
            list(arrays[:n]), list(arrays[n : 2 * n]), self.activation,
            {k: arrays[2 * n + i] for i, k in enumerate(keys)},
        )

    def copy(self) -> "MlpParams":
        return self.with_arrays([a.copy() for a in self.arrays()])

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())


def init_mlp(sizes, activation="swish", rng=None, n_members=None) -> MlpParams:
    """Fan-in scaled uniform init: ``W ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in))``, ``b = 0``."""
    gen = rng.generator if hasattr(rng, "generator") else np.random.default_rng(rng)
    lead = () if n_members is None else (n_members,)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        lim = 1.0 / np.sqrt(fan_in)
        weights.append(gen.uniform(-lim, lim, size=lead + (fan_in, fan_out)))
        biases.append(np.zeros(lead + ((1,) if lead else ()) + (fan_out,)))
    return MlpParams(weights, biases, activation)


def forward(params: MlpParams, x):
    """Apply the network to ``x`` (numpy array or autodiff Tensor).

    Hidden layers use ``params.activation``; the output layer is linear.
    """
    n_in = params.sizes[0]
    if x.shape[-1] != n_in:
        raise ValueError(f"input has size {x.shape[-1]}, network expects {n_in}")
    if params.activation == "relu" and isinstance(x, np.ndarray) and isinstance(params.weights[0], np.ndarray):
        return _forward_relu_inplace(params, x)
    act = ACTIVATIONS[params.activation]
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w + b
        if i < last:
            h = act(h)
    return h


_scratch = threading.local()


def _buffer(slot, shape):
    bufs = _scratch.__dict__.setdefault("bufs", {})
    buf = bufs.get(slot)
    if buf is None or buf.shape != shape:
        buf = bufs[slot] = np.empty(shape)
    return buf


def _forward_relu_inplace(params: MlpParams, x):
    # inference fast path: hidden activations live in per-thread scratch
    # buffers (large fresh matmul outputs are dominated by page faults)
    last = len(params.weights) - 1
    h = x
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        if i == last:
            h = h @ w
            h += b
            return h
        shape = np.broadcast_shapes(h.shape[:-2], w.shape[:-2]) + (h.shape[-2], w.shape[-1])
        out = _buffer(i % 2, shape)
        np.matmul(h, w, out=out)
        out += b
        np.maximum(out, 0.0, out=out)
        h = out
    return h


def grad(params: MlpParams, loss_fn, batch, return_loss=False):
    """Reverse-mode gradient of ``loss_fn(params_as_tensors, batch)``.

    ``loss_fn`` receives an :class:`MlpParams` whose arrays are autodiff
    Tensors and must return a scalar (the mean batch loss). The gradient is
    returned as an :class:`MlpParams` of the same shapes.
    """

    def fn(tensors, b):
        return loss_fn(params.with_arrays(tensors), b)

    loss, grads = ad.value_and_grad(fn, params.arrays(), batch)
    g = params.with_arrays(grads)
    return (loss, g) if return_loss else g


def save_params(path, params: MlpParams):
    """Write a self-describing ``.npz``: layer sizes, activation, flat parameter vector."""
    arrays = params.arrays()
    meta = {
        "format": "mlp-checkpoint/1",
        "sizes": params.sizes,
        "activation": params.activation,
        "n_members": params.n_members,
        "shapes": [list(a.shape) for a in arrays],
        "extras": sorted(params.extras),
    }
    flat = np.concatenate([a.ravel() for a in arrays]) if arrays else np.zeros(0)
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta)), flat=flat)


def load_params(path) -> MlpParams:
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        flat = z["flat"]
    return params_from_flat(meta, flat)


def params_from_flat(meta: dict, flat: np.ndarray) -> MlpParams:
    arrays, pos = [], 0
    for shape in meta["shapes"]:
        n = int(np.prod(shape)) if shape else 1
        arrays.append(flat[pos : pos + n].reshape(shape).copy())
        pos += n
    n_layers = len(meta["sizes"]) - 1
    extras = {k: arrays[2 * n_layers + i] for i, k in enumerate(meta["extras"])}
    return MlpParams(arrays[:n_layers], arrays[n_layers : 2 * n_layers], meta["activation"], extras)
