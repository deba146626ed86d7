"""Fit a probabilistic ensemble and compare particle propagation modes.

Data come from random actions on the pendulum. Each member predicts a
Gaussian over the state change; propagation decides how the members and
their noise are combined over a multi-step rollout.
"""

import numpy as np

from mbrl_bench.core import RngStream, Transition
from mbrl_bench.dynamics import DynamicsConfig, PropagationMode, TransitionDataset, propagate, train
from mbrl_bench.envs import make_env


def random_data(env, steps, rng):
    gen = rng.generator
    ds = TransitionDataset(env.spec.obs_dim, env.spec.act_dim, env.name)
    s = env.reset(rng.child(0))
    for t in range(steps):
        a = gen.uniform(env.spec.action_low, env.spec.action_high)
        nxt, r, _ = env.step(s, a)
        ds.append(Transition(s, a, nxt, r, False))
        s = nxt if (t + 1) % env.spec.horizon else env.reset(rng.child(1, t))
    return ds


if __name__ == "__main__":
    env = make_env("pendulum")
    data = random_data(env, 3000, RngStream(0))
    cfg = DynamicsConfig(n_members=5, hidden=(64, 64), epochs=40, batch_size=128, lr=2e-3)
    ens = train(data, cfg, rng=RngStream(1))
    print(f"holdout NLL per dim: {ens.holdout_loss:.3f}")

    s0 = env.observe(np.pi / 2, 0.0)
    actions = np.zeros((25, 1))
    true_states, true_rewards = env.rollout(s0, actions)
    print(f"true 25-step return from horizontal rest: {true_rewards.sum():.2f}")
    for name, P in (("E", 1), ("TS1", 20), ("TSinf", 20), ("DS", 20)):
        states, rets = propagate(ens, PropagationMode(name, P), s0, actions, RngStream(2), env.reward)
        err = np.abs(states.mean(axis=0) - true_states).max()
        print(f"  {name:5s} P={P:2d}: return {rets.mean():7.2f} ± {rets.std():5.2f}, max state error {err:.3f}")
