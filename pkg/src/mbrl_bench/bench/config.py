"""Experiment configuration and the INI-style config file format.

Example::

    [experiment]
    env = cartpole
    algo = pets_cem
    total_timesteps = 20000
    seeds = 4

    [planner.cem]
    population = 500
    elites = 50

    [noise]
    sigma_o = 0.1

Unknown sections or keys are errors. Values are parsed as Python literals
where possible and kept as strings otherwise.
"""

from __future__ import annotations

import ast
import configparser
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, fields, replace

from ..dynamics import DynamicsConfig, PropagationMode
from ..envs import REGISTRY
from ..planners import CemConfig, IlqgConfig, RsConfig, TerminationScheme

ALGOS = ("rs", "pets_rs", "pets_cem", "gt_rs", "gt_cem", "ilqg")
LEARNED = ("rs", "pets_rs", "pets_cem")


class ConfigError(ValueError):
    pass


def default_dynamics(algo: str) -> DynamicsConfig:
    # single deterministic network for plain RS, probabilistic ensemble for PETS
    if algo == "rs":
        return DynamicsConfig(n_members=1, kind="deterministic")
    return DynamicsConfig()


@dataclass
class ExperimentConfig:
    env: str = "cartpole"
    algo: str = "gt_rs"
    total_timesteps: int = 20000
    seeds: int = 4
    master_seed: int = 0
    retrain_every: int | None = None  # env steps between retrainings; None = one episode
    warmup_episodes: int = 1
    sigma_o: float = 0.0
    sigma_a: float = 0.0
    scheme: TerminationScheme = field(default_factory=TerminationScheme)
    rs: RsConfig = field(default_factory=RsConfig)
    cem: CemConfig = field(default_factory=CemConfig)
    ilqg: IlqgConfig = field(default_factory=IlqgConfig)
    dynamics: DynamicsConfig | None = None
    propagation: str = "E"
    particles: int = 1
    env_overrides: dict = field(default_factory=dict)
    gamma: float = 1.0
    window_steps: int = 5000
    out_dir: str | None = None
    workers: int = 1  # processes over seeds / grid cells
    planner_workers: int = 1  # threads over candidate blocks

    def __post_init__(self):
        if self.env not in REGISTRY:
            raise ConfigError(f"unknown env {self.env!r}; choose from {sorted(REGISTRY)}")
        if self.algo not in ALGOS:
            raise ConfigError(f"unknown algo {self.algo!r}; choose from {ALGOS}")
        if self.seeds < 1:
            raise ConfigError("seeds must be >= 1")
        if self.dynamics is None:
            self.dynamics = default_dynamics(self.algo)
        try:
            PropagationMode(self.propagation, self.particles)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        horizon = self.make_env().spec.horizon
        if self.total_timesteps < horizon:
            raise ConfigError(f"total_timesteps must cover at least one episode ({horizon} steps)")

    @property
    def learned(self) -> bool:
        return self.algo in LEARNED

    @property
    def planner_cfg(self):
        if self.algo in ("rs", "pets_rs", "gt_rs"):
            return self.rs
        if self.algo in ("pets_cem", "gt_cem"):
            return self.cem
        return self.ilqg

    def with_horizon(self, horizon: int) -> "ExperimentConfig":
        """Same experiment with only the active planner's horizon changed."""
        name = {RsConfig: "rs", CemConfig: "cem", IlqgConfig: "ilqg"}[type(self.planner_cfg)]
        return replace(self, **{name: replace(self.planner_cfg, horizon=int(horizon))})

    def make_env(self):
        from ..envs import make_env

        return make_env(self.env, **self.env_overrides)

    def canonical(self) -> dict:
        """JSON-able description of everything that affects results."""
        d = dataclasses.asdict(self)
        for k in ("out_dir", "workers", "planner_workers"):
            d.pop(k)
        return json.loads(json.dumps(d, sort_keys=True, default=list))

    def fingerprint(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# -- parsing -------------------------------------------------------------------

_EXPERIMENT_KEYS = {
    f.name for f in fields(ExperimentConfig)
} - {"scheme", "rs", "cem", "ilqg", "dynamics", "env_overrides", "sigma_o", "sigma_a", "propagation", "particles"}

_SECTIONS = {
    "planner.rs": RsConfig,
    "planner.cem": CemConfig,
    "planner.ilqg": IlqgConfig,
}


def _value(raw: str):
    try:
        return ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        return raw.strip().strip('"').strip("'")


def _check_keys(section, given, allowed):
    unknown = set(given) - set(allowed)
    if unknown:
        raise ConfigError(f"[{section}]: unknown keys {sorted(unknown)}; allowed {sorted(allowed)}")


def _build(cls, section, values, base=None):
    _check_keys(section, values, [f.name for f in fields(cls)])
    try:
        return replace(base, **values) if base is not None else cls(**values)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"[{section}]: {e}") from None


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from INI text plus keyword overrides."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from None
    known = {"experiment", "env", "dynamics", "noise", "termination", *_SECTIONS}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}; allowed {sorted(known)}")
    sec = {name: {k: _value(v) for k, v in cp[name].items()} for name in cp.sections()}

    exp = sec.get("experiment", {})
    _check_keys("experiment", exp, _EXPERIMENT_KEYS)
    kw = dict(exp)
    kw.update({k: v for k, v in overrides.items() if v is not None})
    algo = kw.get("algo", "gt_rs")

    for name, cls in _SECTIONS.items():
        if name in sec:
            kw[name.split(".")[1]] = _build(cls, name, sec[name])
    if "dynamics" in sec:
        d = dict(sec["dynamics"])
        for k in ("propagation", "particles"):
            if k in d:
                kw[k] = d.pop(k)
        kw["dynamics"] = _build(DynamicsConfig, "dynamics", d, default_dynamics(algo))
    if "noise" in sec:
        _check_keys("noise", sec["noise"], ["sigma_o", "sigma_a"])
        kw.update(sec["noise"])
    if "termination" in sec:
        t = dict(sec["termination"])
        if "scheme" in t:
            t["kind"] = t.pop("scheme")
        _check_keys("termination", t, ["kind", "penalty_multiplier", "alive_bonus", "extra_steps"])
        kw["scheme"] = _build(TerminationScheme, "termination", t)
    if "env" in sec:
        kw["env_overrides"] = sec["env"]
    try:
        cfg = ExperimentConfig(**kw)
        cfg.make_env()  # validates physics overrides
    except KeyError as e:
        raise ConfigError(str(e)) from None
    except TypeError as e:
        raise ConfigError(str(e)) from None
    return cfg


def load_config(path, **overrides) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read(), **overrides)


def parse_grid(text: str) -> dict:
    """Grid file: ``[grid]`` section of ``dotted.key = [v1, v2, ...]`` lines.

    Keys address config fields, e.g. ``cem.elites``, ``rs.population``,
    ``dynamics.n_members`` or top-level ``retrain_every``.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read_string(text)
    if cp.sections() != ["grid"]:
        raise ConfigError("grid file must contain exactly one [grid] section")
    grid = {}
    for k, v in cp["grid"].items():
        vals = _value(v)
        if not isinstance(vals, (list, tuple)) or len(vals) == 0:
            raise ConfigError(f"grid entry {k!r} must be a non-empty list")
        grid[k] = list(vals)
    if not grid:
        raise ConfigError("grid is empty")
    return grid


def set_path(cfg: ExperimentConfig, key: str, value) -> ExperimentConfig:
    """Copy of ``cfg`` with a dotted field replaced (``cem.elites`` etc.)."""
    parts = key.split(".")
    if len(parts) == 1:
        if parts[0] not in {f.name for f in fields(ExperimentConfig)}:
            raise ConfigError(f"unknown config field {key!r}")
        return replace(cfg, **{parts[0]: value})
    if len(parts) != 2:
        raise ConfigError(f"grid key {key!r} nests too deeply")
    head, tail = parts
    alias = {"planner.rs": "rs", "planner.cem": "cem", "planner.ilqg": "ilqg", "termination": "scheme"}
    head = alias.get(head, head)
    if head == "env":
        return replace(cfg, env_overrides={**cfg.env_overrides, tail: value})
    sub = getattr(cfg, head, None)
    if sub is None or not dataclasses.is_dataclass(sub) or tail not in {f.name for f in fields(sub)}:
        raise ConfigError(f"unknown config field {key!r}")
    try:
        return replace(cfg, **{head: replace(sub, **{tail: value})})
    except ValueError as e:
        raise ConfigError(f"{key}={value!r}: {e}") from None
