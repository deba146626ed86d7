"""Planner hyperparameters and early-termination schemes."""

from __future__ import annotations

from dataclasses import dataclass

SCHEMES = ("A", "B", "C", "D", "E")
PENALTY_MULTIPLIERS = (1, 2, 5, 10, 20, 30)


@dataclass(frozen=True)
class RsConfig:
    population: int = 1000
    horizon: int = 30

    def __post_init__(self):
        if self.population < 1 or self.horizon < 1:
            raise ValueError("RS needs population >= 1 and horizon >= 1")


@dataclass(frozen=True)
class CemConfig:
    """``alpha`` weights the newly fitted elite moments:
    ``mean <- alpha * elite_mean + (1 - alpha) * mean``.
    """

    population: int = 500
    elites: int = 50
    iterations: int = 5
    alpha: float = 0.9
    init_std_scale: float = 0.25  # initial std = scale * (high - low)
    horizon: int = 30
    min_std: float = 1e-3
    trunc: float = 2.0

    def __post_init__(self):
        if self.population < 1 or self.horizon < 1:
            raise ValueError("CEM needs population >= 1 and horizon >= 1")
        if not 1 <= self.elites <= self.population:
            raise ValueError("elite size must lie in [1, population]")
        if self.iterations < 1:
            raise ValueError("CEM needs at least one iteration")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


@dataclass(frozen=True)
class IlqgConfig:
    horizon: int = 20
    updates: int = 10
    backtracks: int = 10
    restarts: int = 10
    fd_eps: float = 1e-5
    mu_init: float = 0.0
    mu_min: float = 1e-6
    mu_max: float = 1e10
    mu_up: float = 10.0
    mu_down: float = 0.5
    tol: float = 0.0  # stop early once relative improvement falls below this

    def __post_init__(self):
        if self.horizon < 2:
            raise ValueError("iLQG horizon must be >= 2")
        if self.backtracks < 1 or self.updates < 1 or self.restarts < 1:
            raise ValueError("backtracks, updates and restarts must be >= 1")


@dataclass(frozen=True)
class TerminationScheme:
    """How planning and data collection treat early termination.

    A: env never terminates, planner unaware. B: env terminates, planner pays
    ``penalty_multiplier * alive_bonus`` per step from the first predicted
    terminal state. C: env terminates, planner zero-pads rewards after it.
    D: env terminates, planner unaware. E: scored like C, plus
    ``extra_steps`` of random interaction after every real termination.
    """

    kind: str = "A"
    penalty_multiplier: float = 1.0
    alive_bonus: float = 1.0
    extra_steps: int = 100

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise ValueError(f"unknown termination scheme {self.kind!r}; choose from {SCHEMES}")
        if self.kind == "B" and self.penalty_multiplier <= 0:
            raise ValueError("scheme B needs a positive penalty multiplier")
        if self.extra_steps < 0:
            raise ValueError("extra_steps must be >= 0")

    @property
    def env_terminates(self) -> bool:
        return self.kind != "A"

    @property
    def planner_aware(self) -> bool:
        return self.kind in ("B", "C", "E")
