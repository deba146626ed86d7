"""How the planner treats early termination changes how long episodes last.

On CartPole-ET the episode ends once the pole passes 0.4 rad. A planner that
ignores this (scheme D) happily trades a fall for reward; one that zeroes
rewards after a predicted termination (scheme C) values staying alive.
Scheme A ignores termination altogether and, with the same random stream,
chooses exactly the actions D chose until D's episode ended.
"""

import numpy as np

from mbrl_bench.core import RngStream
from mbrl_bench.envs import make_env
from mbrl_bench.planners import CemConfig, GroundTruthBackend, TerminationScheme, make_planner, mpc_episode

if __name__ == "__main__":
    env = make_env("cartpole_et")
    cfg = CemConfig(population=100, elites=10, iterations=3, horizon=10)
    runs = {}
    for kind in "ACD":
        scheme = TerminationScheme(kind)
        planner = make_planner(GroundTruthBackend(env), cfg, scheme)
        runs[kind] = [mpc_episode(env, planner, scheme, RngStream(0, (0, ep))) for ep in range(6)]
        print(f"scheme {kind}: episode lengths {[len(t) for t in runs[kind]]}")
    same = all(np.array_equal(a.actions[: len(d)], d.actions) for a, d in zip(runs["A"], runs["D"]))
    print(f"A repeats D's actions up to D's termination: {same}")
