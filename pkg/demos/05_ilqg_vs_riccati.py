"""iLQG on a linear system with quadratic cost is exact.

For linear dynamics and quadratic reward the local models iLQG builds are
the true ones, so one backward pass reaches the optimum that the discrete
Riccati recursion gives in closed form.
"""

import numpy as np

from mbrl_bench.envs import LinearQuadratic
from mbrl_bench.planners import IlqgConfig, optimize_trajectory


def riccati_cost(A, B, Q, R, x0, T):
    P = np.zeros_like(Q)
    for _ in range(T):
        S = Q + P
        P = A.T @ S @ A - A.T @ S @ B @ np.linalg.solve(R + B.T @ S @ B, B.T @ S @ A)
    return float(x0 @ P @ x0)


if __name__ == "__main__":
    # scalar integrator s' = s + a; the infinite-horizon cost tends to 1/golden ratio
    env = LinearQuadratic([[1.0]], [[1.0]])
    res = optimize_trajectory(env, np.array([1.0]), np.zeros((20, 1)), IlqgConfig(horizon=20))
    print(f"scalar: iLQG {res.cost:.12f}  Riccati {riccati_cost(*(np.eye(1),) * 4, np.ones(1), 20):.12f}")

    gen = np.random.default_rng(0)
    A = np.eye(3) + 0.2 * gen.normal(size=(3, 3))
    B = gen.normal(size=(3, 2))
    Q, R = np.eye(3), 0.1 * np.eye(2)
    x0 = gen.normal(size=3)
    res = optimize_trajectory(LinearQuadratic(A, B, Q, R), x0, np.zeros((30, 2)), IlqgConfig(horizon=30))
    print(f"3-state: iLQG {res.cost:.10f}  Riccati {riccati_cost(A, B, Q, R, x0, 30):.10f}")
    print(f"cost after each accepted update: {np.round(res.costs, 6)}")
