"""A short PETS run: ensemble dynamics, CEM planning, refit every episode.

One random episode seeds the dataset; after that every episode is planned
with the current model and then added to the data. The logged returns show
the model becoming good enough to balance the pole.
"""

from mbrl_bench.bench import ExperimentConfig, final_score, run_experiment
from mbrl_bench.dynamics import DynamicsConfig
from mbrl_bench.planners import CemConfig

if __name__ == "__main__":
    cfg = ExperimentConfig(
        env="cartpole", algo="pets_cem", total_timesteps=2000, seeds=1, window_steps=600,
        cem=CemConfig(population=200, elites=20, iterations=5, horizon=20),
        dynamics=DynamicsConfig(n_members=5, hidden=(32, 32), activation="relu", batch_size=32, max_steps=300),
    )
    rec = run_experiment(cfg)
    for t, r in zip(rec.series[0].timesteps, rec.series[0].returns):
        print(f"  step {t:5d}: return {r:6.1f}")
    print(f"final score over the last {cfg.window_steps} steps: {final_score(rec, cfg.window_steps)}")
