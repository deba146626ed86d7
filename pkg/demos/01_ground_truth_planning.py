"""Planning with the true dynamics.

Random shooting and CEM both score candidate action sequences by rolling
them through the real environment model. With perfect dynamics the only
limits are the planner's search budget and its horizon.
"""

import numpy as np

from mbrl_bench.core import RngStream, trajectory_return
from mbrl_bench.envs import make_env
from mbrl_bench.planners import CemConfig, GroundTruthBackend, RsConfig, make_planner, mpc_episode


def run(env_name, cfg, episodes=2):
    env = make_env(env_name)
    planner = make_planner(GroundTruthBackend(env), cfg)
    returns = [trajectory_return(mpc_episode(env, planner, None, RngStream(0, (ep,)))) for ep in range(episodes)]
    return np.mean(returns)


if __name__ == "__main__":
    print("CartPole, 200 steps, max return 200")
    print(f"  RS  (pop 300, H 20): {run('cartpole', RsConfig(population=300, horizon=20)):7.1f}")
    print(f"  CEM (pop 100, H 20): {run('cartpole', CemConfig(population=100, elites=10, iterations=3, horizon=20)):7.1f}")

    # the reward peaks with the pendulum hanging still; a start near the top
    # must pay a velocity penalty to fall, which a short horizon may refuse
    print("Pendulum, return per episode")
    for h in (5, 30):
        print(f"  RS  (pop 500, H {h:2d}): {run('pendulum', RsConfig(population=500, horizon=h)):7.1f}")
