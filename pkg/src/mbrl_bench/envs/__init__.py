"""Analytic classic-control environments addressed by name."""

from .base import Environment, reset, reward, reward_gradient, step
from .classic import Acrobot, CartPole, CartPoleET, MountainCar, Pendulum, Reacher2D
from .linear import LinearQuadratic
from .wrappers import NoiseWrapper, TerminationPredicate, noisy_step

REGISTRY = {
    cls.name: cls for cls in (Pendulum, CartPole, CartPoleET, Acrobot, MountainCar, Reacher2D)
}


def make_env(name: str, **overrides) -> Environment:
    try:
        cls = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown environment {name!r}; choose from {sorted(REGISTRY)}") from None
    return cls(**overrides)


__all__ = [
    "Environment", "Pendulum", "CartPole", "CartPoleET", "Acrobot", "MountainCar", "Reacher2D",
    "LinearQuadratic",
    "NoiseWrapper", "TerminationPredicate", "REGISTRY", "make_env",
    "reset", "step", "reward", "reward_gradient", "noisy_step",
]
