"""Shooting (RS, CEM) and iLQG planners with an MPC loop and termination schemes."""

from .backends import (
    GroundTruthBackend,
    LearnedBackend,
    adjust_rewards,
    apply_termination_scheme,
    first_terminal,
)
from .config import PENALTY_MULTIPLIERS, SCHEMES, CemConfig, IlqgConfig, RsConfig, TerminationScheme
from .ilqg import IlqgResult, optimize_trajectory, plan_ilqg
from .mpc import (
    CemPlanner,
    ConstantPlanner,
    IlqgPlanner,
    Planner,
    RandomPlanner,
    RsPlanner,
    make_planner,
    mpc_episode,
)
from .shooting import PlanResult, plan_cem, plan_rs, shift_warm_start, truncated_normal

__all__ = [
    "GroundTruthBackend", "LearnedBackend", "apply_termination_scheme", "adjust_rewards",
    "first_terminal", "RsConfig", "CemConfig", "IlqgConfig", "TerminationScheme", "SCHEMES",
    "PENALTY_MULTIPLIERS", "plan_rs", "plan_cem", "plan_ilqg", "optimize_trajectory",
    "PlanResult", "IlqgResult", "Planner", "RsPlanner", "CemPlanner", "IlqgPlanner",
    "ConstantPlanner", "RandomPlanner", "make_planner", "mpc_episode", "shift_warm_start",
    "truncated_normal",
]
