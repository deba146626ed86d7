"""Transition storage, CSV import/export and input/target normalization."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..core import Trajectory, Transition

STD_FLOOR = 1e-6


class TransitionDataset:
    """Append-only store of ``(s, a, s', r, terminated)`` tuples for one env."""

    def __init__(self, obs_dim: int, act_dim: int, env_name: str | None = None):
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.env_name = env_name
        self._rows: list = []
        self._cache = None

    def __len__(self):
        return len(self._rows)

    def append(self, tr: Transition):
        s = np.asarray(tr.state, dtype=float)
        a = np.asarray(tr.action, dtype=float)
        ns = np.asarray(tr.next_state, dtype=float)
        if s.shape != (self.obs_dim,) or ns.shape != (self.obs_dim,) or a.shape != (self.act_dim,):
            raise ValueError("transition dimensions do not match the dataset")
        self._rows.append(np.concatenate([s, a, ns, [float(tr.reward), float(bool(tr.terminated))]]))
        self._cache = None

    def extend(self, transitions):
        for tr in transitions:
            self.append(tr)

    def add_trajectory(self, traj: Trajectory):
        self.extend(traj.transitions)

    def _table(self) -> np.ndarray:
        if self._cache is None:
            width = 2 * self.obs_dim + self.act_dim + 2
            self._cache = np.array(self._rows).reshape(-1, width)
        return self._cache

    @property
    def states(self):
        return self._table()[:, : self.obs_dim]

    @property
    def actions(self):
        return self._table()[:, self.obs_dim : self.obs_dim + self.act_dim]

    @property
    def next_states(self):
        o = self.obs_dim + self.act_dim
        return self._table()[:, o : o + self.obs_dim]

    @property
    def rewards(self):
        return self._table()[:, -2]

    @property
    def terminated(self):
        return self._table()[:, -1].astype(bool)

    def duplicated(self) -> "TransitionDataset":
        """Copy with every row repeated twice in place (row i, row i, row i+1, ...)."""
        out = TransitionDataset(self.obs_dim, self.act_dim, self.env_name)
        for r in self._rows:
            out._rows.extend([r, r])
        return out

    def windows(self, length: int) -> np.ndarray:
        """Start indices of contiguous runs of ``length`` transitions.

        Row ``i`` continues into row ``i + 1`` when ``next_state[i] ==
        state[i + 1]`` and row ``i`` is not terminal.
        """
        n = len(self)
        if n < length:
            return np.zeros(0, dtype=int)
        links = np.all(self.next_states[:-1] == self.states[1:], axis=1) & ~self.terminated[:-1]
        # run[i] = number of consecutive links starting at i
        run = np.zeros(n, dtype=int)
        for i in range(n - 2, -1, -1):
            run[i] = run[i + 1] + 1 if links[i] else 0
        return np.flatnonzero(run >= length - 1)

    # -- CSV ---------------------------------------------------------------
    def header(self) -> list:
        return (
            [f"s_{i}" for i in range(self.obs_dim)]
            + [f"a_{i}" for i in range(self.act_dim)]
            + [f"ns_{i}" for i in range(self.obs_dim)]
            + ["reward", "terminated"]
        )

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.header())
            for row in self._rows:
                w.writerow([repr(float(v)) for v in row[:-1]] + [int(row[-1])])

    @classmethod
    def from_csv(cls, path, env_name: str | None = None) -> "TransitionDataset":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        obs_dim = sum(h.startswith("s_") for h in header)
        act_dim = sum(h.startswith("a_") for h in header)
        ds = cls(obs_dim, act_dim, env_name)
        if header != ds.header():
            raise ValueError(f"unexpected CSV header: {header[:4]}...")
        for r in body:
            ds._rows.append(np.array([float(v) for v in r]))
        return ds


@dataclass
class Normalizer:
    """Per-dimension statistics of model inputs ``[s, a]`` and targets ``s' - s``."""

    in_mean: np.ndarray
    in_std: np.ndarray
    out_mean: np.ndarray
    out_std: np.ndarray

    def normalize_input(self, x):
        return (x - self.in_mean) / self.in_std

    def denormalize_input(self, z):
        return z * self.in_std + self.in_mean

    def normalize_target(self, d):
        return (d - self.out_mean) / self.out_std

    def denormalize_target(self, z):
        return z * self.out_std + self.out_mean

    def to_dict(self):
        return {k: getattr(self, k) for k in ("in_mean", "in_std", "out_mean", "out_std")}


def _stats(x):
    return x.mean(axis=0), np.maximum(x.std(axis=0), STD_FLOOR)


def fit_normalizer(data: TransitionDataset) -> Normalizer:
    if len(data) == 0:
        raise ValueError("cannot fit a normalizer on an empty dataset")
    inputs = np.concatenate([data.states, data.actions], axis=1)
    in_mean, in_std = _stats(inputs)
    out_mean, out_std = _stats(data.next_states - data.states)
    return Normalizer(in_mean, in_std, out_mean, out_std)
