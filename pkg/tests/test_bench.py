import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mbrl_bench.bench import (
    ConfigError, ExperimentConfig, ExperimentRecord, SeedSeries, emit_report, final_score, find_records,
    format_score, grid_search, horizon_sweep, load_record, noise_sweep, parse_config, parse_grid, rank_table,
    read_raw_csv, run_experiment, run_seed, save_record, set_path, sliding_window,
)
from mbrl_bench.bench.report import curve, parse_formats, summary_json
from mbrl_bench.cli import main
from mbrl_bench.dynamics import DynamicsConfig
from mbrl_bench.planners import CemConfig, RsConfig

TINY_RS = RsConfig(population=16, horizon=5)
TINY_DYN = DynamicsConfig(n_members=2, hidden=(8, 8), epochs=1, batch_size=64, max_steps=20)


def tiny(**kw):
    base = dict(env="pendulum", algo="gt_rs", total_timesteps=400, seeds=2, rs=TINY_RS)
    base.update(kw)
    return ExperimentConfig(**base)


def record(series_spec, total=1000):
    series = []
    for seed, pairs in enumerate(series_spec):
        s = SeedSeries(seed)
        for t, r in pairs:
            s.log(t, r)
        series.append(s)
    return ExperimentRecord("cartpole", "rs", "f" * 16, total, series)


# -- metrics --------------------------------------------------------------------------

def test_sliding_window_examples():
    assert sliding_window([2.0] * 6, 3).tolist() == [2.0] * 6
    assert sliding_window([1, 2, 3, 4, 5], 5)[-1] == 3.0
    x = [3.0, -1.0, 7.5]
    assert sliding_window(x, 1).tolist() == x
    with pytest.raises(ValueError):
        sliding_window(x, 0)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40), st.integers(1, 10))
def test_sliding_window_definition(xs, w):
    out = sliding_window(xs, w)
    for i in range(len(xs)):
        assert out[i] == pytest.approx(np.mean(xs[max(0, i - w + 1) : i + 1]), abs=1e-9)


def test_final_score_examples():
    s = final_score(record([[(1000, 200.0)]]))
    assert (s.mean, s.std, s.n_seeds, s.n_effective_seeds) == (200.0, 0.0, 1, 1)
    s2 = final_score(record([[(900, 190.0)], [(1000, 210.0)]]))
    assert (s2.mean, s2.std) == (200.0, 10.0)
    assert str(final_score(record([[(1000, 200.0)], [(1000, 200.0)]]))) == "200.0 ± 0.0"
    with pytest.raises(ValueError):
        final_score(record([[(100, 1.0)]], total=10_000), window_steps=5000)


def test_final_score_window_edges():
    rec = record([[(4999, -50.0), (5000, 10.0), (10_000, 30.0)]], total=10_000)
    s = final_score(rec, 5000)
    assert s.window == (5000, 10_000) and s.n == 2 and s.mean == 20.0


def test_effective_seeds_flagged():
    rec = record([[(1000, 5.0)], [(10, 1.0)]])
    s = final_score(rec, 500)
    assert s.n_seeds == 2 and s.n_effective_seeds == 1


@given(st.lists(st.tuples(st.integers(1, 10_000), st.floats(-500, 500)), min_size=1, max_size=30),
       st.integers(1, 4999), st.floats(-1e6, 1e6))
def test_returns_outside_window_never_change_score(pairs, t_out, r_out):
    pairs = sorted({t: r for t, r in pairs}.items())
    inside = [(t + 10_000, r) for t, r in pairs]  # all within [10000, 20000]
    base = record([inside], total=20_000)
    extra = record([[(t_out, r_out)] + inside], total=20_000)
    assert final_score(base, 10_000) == final_score(extra, 10_000)


def test_rank_table_examples():
    rt = rank_table({"e1": {"A": 10.0, "B": 5.0}, "e2": {"A": 3.0, "B": 1.0}})
    assert rt["A"].mean_rank == 1.0 and rt["B"].mean_rank == 2.0
    tied = rank_table({"e1": {"A": 1.0, "B": 1.0}})
    assert tied["A"].ranks["e1"] == 1.5 and tied["B"].ranks["e1"] == 1.5
    missing = rank_table({"e1": {"A": -1e9}, "e2": {"A": 1.0, "B": 2.0}})
    assert missing["B"].ranks["e1"] == 2.0


def test_rank_format():
    rows = {f"a{i}": float(i) for i in range(10)}
    rt = rank_table({"e": rows, "f": rows})
    assert rt["a6"].formatted() == ("4.0 / 10", "4 / 10")


TRANSFORMS = [np.exp, np.arctan, lambda x: x**3, lambda x: 3.0 * x + 1.0, np.cbrt]


@given(st.dictionaries(st.sampled_from(["e1", "e2", "e3"]),
                       st.dictionaries(st.sampled_from(list("ABCDE")), st.integers(-20, 20).map(float), min_size=1),
                       min_size=1),
       st.integers(0, len(TRANSFORMS) - 1))
def test_rank_table_invariant_to_monotone_transform(scores, which):
    f = TRANSFORMS[which]
    transformed = {e: {a: float(f(v)) for a, v in per.items()} for e, per in scores.items()}
    a, b = rank_table(scores), rank_table(transformed)
    assert {k: v.ranks for k, v in a.items()} == {k: v.ranks for k, v in b.items()}


@given(st.permutations(list("ABCD")))
def test_rank_table_invariant_to_input_order(order):
    scores = {"e1": {"A": 1.0, "B": 3.0, "C": 3.0, "D": -2.0}, "e2": {"A": 0.0, "B": 9.0, "C": 4.0, "D": 4.0}}
    shuffled = {e: {a: scores[e][a] for a in order} for e in reversed(list(scores))}
    assert rank_table(scores) == rank_table(shuffled)


def test_format_score_one_decimal():
    assert format_score(167.44, 52.96) == "167.4 ± 53.0"


def test_series_timesteps_strictly_increasing():
    s = SeedSeries(0)
    s.log(10, 1.0)
    with pytest.raises(ValueError):
        s.log(10, 2.0)


# -- config -------------------------------------------------------------------------------

CFG_TEXT = """
[experiment]
env = cartpole_et
algo = pets_cem
total_timesteps = 3000
seeds = 3

[planner.cem]
population = 100
elites = 10

[dynamics]
n_members = 3
hidden = (16, 16)
propagation = "TSinf"
particles = 6

[noise]
sigma_o = 0.1

[termination]
scheme = "B"
penalty_multiplier = 5

[env]
theta_threshold = 0.3
"""


def test_parse_config_sections():
    cfg = parse_config(CFG_TEXT)
    assert (cfg.env, cfg.algo, cfg.total_timesteps, cfg.seeds) == ("cartpole_et", "pets_cem", 3000, 3)
    assert cfg.cem.population == 100 and cfg.cem.elites == 10 and cfg.cem.horizon == 30
    assert cfg.dynamics.n_members == 3 and cfg.dynamics.hidden == (16, 16)
    assert (cfg.propagation, cfg.particles) == ("TSinf", 6)
    assert cfg.sigma_o == 0.1 and cfg.scheme.kind == "B" and cfg.scheme.penalty_multiplier == 5
    assert cfg.make_env().params["theta_threshold"] == 0.3
    assert cfg.planner_cfg is cfg.cem and cfg.learned


def test_cli_style_overrides_win():
    text = CFG_TEXT.replace("[env]\ntheta_threshold = 0.3\n", "")
    cfg = parse_config(text, env="cartpole", total_timesteps=1000, seeds=None)
    assert cfg.env == "cartpole" and cfg.total_timesteps == 1000 and cfg.seeds == 3


@pytest.mark.parametrize("text", [
    "[experiment]\nbogus = 1\n",
    "[planner.cem]\nelite = 5\n",
    "[mystery]\nx = 1\n",
    "[experiment]\nenv = hopper\n",
    "[experiment]\nalgo = ppo\n",
    "[experiment]\nseeds = 0\n",
    "[experiment]\nenv = cartpole\ntotal_timesteps = 50\n",
    "[planner.cem]\npopulation = 10\nelites = 20\n",
    "[termination]\nscheme = \"Z\"\n",
    "[env]\nmass = 3\n",
    "[noise]\nsigma_x = 1\n",
    "not an ini file",
    "[dynamics]\npropagation = \"E\"\nparticles = 4\n",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_fingerprint_stable_and_sensitive():
    a, b = parse_config(CFG_TEXT), parse_config(CFG_TEXT)
    assert a.fingerprint() == b.fingerprint()
    assert a.fingerprint() != parse_config(CFG_TEXT, seeds=4).fingerprint()
    assert a.fingerprint() == parse_config(CFG_TEXT, out_dir="/tmp/x", workers=8).fingerprint()
    code = ("from mbrl_bench.bench import parse_config; import sys; "
            "print(parse_config(sys.stdin.read()).fingerprint())")
    out = subprocess.run([sys.executable, "-c", code], input=CFG_TEXT, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == a.fingerprint()


def test_grid_parsing_and_paths():
    grid = parse_grid("[grid]\ncem.elites = [50, 100, 150]\nrs.population = [10]\n")
    assert grid == {"cem.elites": [50, 100, 150], "rs.population": [10]}
    with pytest.raises(ConfigError):
        parse_grid("[grid]\ncem.elites = 5\n")
    with pytest.raises(ConfigError):
        parse_grid("[other]\nx = [1]\n")
    cfg = ExperimentConfig()
    assert set_path(cfg, "planner.cem.elites".replace("planner.", ""), 7).cem.elites == 7
    assert set_path(cfg, "dynamics.n_members", 2).dynamics.n_members == 2
    assert set_path(cfg, "env.force_mag", 5.0).env_overrides == {"force_mag": 5.0}
    assert set_path(cfg, "retrain_every", 400).retrain_every == 400
    for bad in ("cem.nope", "nope", "a.b.c"):
        with pytest.raises(ConfigError):
            set_path(cfg, bad, 1)
    with pytest.raises(ConfigError):
        set_path(cfg, "cem.elites", 10_000)


# -- runs ------------------------------------------------------------------------------------

def test_gt_run_one_episode_per_seed():
    rec = run_experiment(tiny(total_timesteps=200))
    assert [len(s.returns) for s in rec.series] == [1, 1]
    assert [s.timesteps for s in rec.series] == [[200], [200]]
    assert rec.failed_seeds == []


def test_same_config_same_record():
    a = run_experiment(tiny())
    b = run_experiment(tiny())
    assert a == b
    assert a.series[0].returns != a.series[1].returns


def test_learned_run_logs_and_trains():
    cfg = ExperimentConfig(env="cartpole", algo="pets_rs", total_timesteps=600, seeds=1, rs=TINY_RS, dynamics=TINY_DYN)
    s = run_seed(cfg, 0)
    assert s.failed is None and s.timesteps == [200, 400, 600]


def test_divergent_seed_is_marked_failed_not_dropped():
    dyn = DynamicsConfig(n_members=1, kind="deterministic", hidden=(4,), lr=1e200, epochs=2, batch_size=32)
    cfg = ExperimentConfig(env="cartpole", algo="rs", total_timesteps=400, seeds=2, rs=TINY_RS, dynamics=dyn)
    with np.errstate(all="ignore"):
        rec = run_experiment(cfg)
    assert rec.failed_seeds == [0, 1]
    assert len(rec.series) == 2 and all(s.timesteps == [200] for s in rec.series)


def test_scheme_e_extra_steps_count_against_budget():
    from mbrl_bench.planners import TerminationScheme
    cfg = ExperimentConfig(env="cartpole_et", algo="pets_rs", total_timesteps=600, seeds=1, rs=TINY_RS,
                           dynamics=TINY_DYN, scheme=TerminationScheme("E", extra_steps=50))
    s = run_seed(cfg, 0)
    assert s.failed is None and s.timesteps[-1] <= 600
    assert all(b - a >= 1 for a, b in zip(s.timesteps, s.timesteps[1:]))


def test_horizon_sweep_rows():
    rows = horizon_sweep(tiny(total_timesteps=200, seeds=1), [3, 5])
    assert [r.value for r in rows] == [3, 5]
    assert rows[1].record == run_experiment(tiny(total_timesteps=200, seeds=1))
    with pytest.raises(ValueError):
        horizon_sweep(tiny(), [])


def test_grid_search_cells_and_degenerate(tmp_path):
    base = tiny(total_timesteps=200, seeds=1)
    res = grid_search(base, {"rs.population": [4, 16]}, out_dir=str(tmp_path))
    assert len(res.cells) == 2 and len(find_records(tmp_path)) == 2
    assert res.best_summary.mean == max(c[1].mean for c in res.cells)
    one = grid_search(base, {"rs.population": [16]})
    assert one.cells[0][2] == run_experiment(base)
    elite = grid_search(ExperimentConfig(env="pendulum", algo="gt_cem", total_timesteps=200, seeds=1,
                                         cem=CemConfig(population=150, elites=10, iterations=1, horizon=2)),
                        parse_grid("[grid]\ncem.elites = [50, 100, 150]\n"))
    assert len(elite.cells) == 3


def test_noise_sweep_zero_noise_matches_baseline():
    base, rows = noise_sweep(tiny(total_timesteps=200), [(0.0, 0.0), (0.1, 0.0)])
    assert rows[0].record.series == base.series
    assert rows[0].relative_change == 0.0 and rows[0].flag == ""
    assert rows[1].record.series != base.series


def test_noise_row_flag():
    from mbrl_bench.bench import NoiseRow
    from mbrl_bench.bench.record import ScoreSummary
    b = ScoreSummary(100.0, 0.0, 1, 1, 1, (0, 1))
    mk = lambda m: NoiseRow(0.1, 0.0, ScoreSummary(m, 1.0, 1, 1, 1, (0, 1)), b, None)
    assert mk(85.0).flag == "-" and mk(115.0).flag == "+" and mk(95.0).flag == ""
    assert mk(85.0).cell() == "85.0 ± 1.0 (-15.0% -)"


# -- persistence, reports, determinism ------------------------------------------------------

def test_csv_round_trip_reproduces_summary(tmp_path):
    rec = run_experiment(tiny(), out_dir=str(tmp_path / "r"))
    back = load_record(tmp_path / "r")
    assert back == rec
    assert final_score(back, 300) == final_score(rec, 300)
    raw = read_raw_csv(tmp_path / "r" / "raw.csv")
    assert sorted(raw) == [0, 1]
    assert (tmp_path / "r" / "raw.csv").read_text().splitlines()[0] == "seed,timestep,episode_return"


def test_emit_report_formats(tmp_path):
    rec = run_experiment(tiny())
    paths = emit_report([rec], "csv,json,md,curves", tmp_path, window_steps=300)
    names = sorted(os.path.basename(p) for p in paths)
    assert "summary.json" in names and "summary.md" in names
    js = json.loads((tmp_path / "summary.json").read_text())
    assert js["schema_version"] == 1
    assert set(js["results"][0]) >= {"env", "algo", "mean", "std", "n_seeds", "window"}
    md = (tmp_path / "summary.md").read_text()
    assert str(final_score(rec, 300)) in md and "| gt_rs |" in md
    curve_file = next(p for p in paths if p.endswith("-curve.csv"))
    lines = open(curve_file).read().splitlines()
    assert lines[0].startswith("# smoothing") and lines[1] == "timestep,smoothed_mean,smoothed_std"


def test_report_errors(tmp_path):
    rec = record([[(1000, 1.0)]])
    with pytest.raises(ValueError, match="csv, json, md, curves"):
        parse_formats("")
    with pytest.raises(ValueError):
        emit_report([rec], "pdf", tmp_path)
    with pytest.raises(ValueError):
        emit_report([], "csv", tmp_path)
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_report([rec], "csv", blocker / "sub")


def test_curve_smoothing():
    rec = record([[(200, 0.0), (400, 10.0)], [(200, 20.0), (400, 20.0)]])
    t, m, s = curve(rec, 5)
    assert t.tolist() == [200, 400] and m.tolist() == [10.0, 12.5] and s.tolist() == [10.0, 7.5]
    assert summary_json([rec], 1000)["smoothing"].startswith("final 1000")


def _files(d):
    return {f: open(os.path.join(d, f), "rb").read() for f in ("raw.csv", "meta.json")}


def test_outputs_byte_identical_across_worker_counts(tmp_path):
    cfg = ExperimentConfig(env="cartpole", algo="pets_rs", total_timesteps=400, seeds=3,
                           rs=RsConfig(population=1100, horizon=3), dynamics=TINY_DYN)
    run_experiment(cfg, workers=1, out_dir=str(tmp_path / "w1"))
    from dataclasses import replace
    run_experiment(replace(cfg, planner_workers=8), workers=8, out_dir=str(tmp_path / "w8"))
    assert _files(tmp_path / "w1") == _files(tmp_path / "w8")


# -- CLI ------------------------------------------------------------------------------------------

def test_cli_run_and_report(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[experiment]\nalgo = gt_rs\n[planner.rs]\npopulation = 8\nhorizon = 3\n")
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--env", "pendulum", "--steps", "200", "--seeds", "1",
                 "--out", str(out)]) == 0
    assert "±" in capsys.readouterr().out
    assert main(["report", "--in", str(out), "--format", "json,md", "--window", "200"]) == 0
    assert (out / "summary.json").exists()
    assert main(["report", "--in", str(out), "--format", ""]) == 1
    assert main(["report", "--in", str(tmp_path / "nothing"), "--format", "csv"]) == 1


def test_cli_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[experiment]\nunknown_key = 1\n")
    assert main(["run", "--config", str(cfg)]) == 2
    assert "unknown keys" in capsys.readouterr().err


def test_cli_horizon_noise_sweep(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[experiment]\nenv = pendulum\nalgo = gt_rs\ntotal_timesteps = 200\nseeds = 1\n"
                   "window_steps = 200\n[planner.rs]\npopulation = 8\nhorizon = 3\n")
    assert main(["horizon", "--config", str(cfg), "--horizons", "2,4"]) == 0
    assert capsys.readouterr().out.count("\n") == 4
    assert main(["noise", "--config", str(cfg), "--sigma-o", "0.1"]) == 0
    assert "baseline" in capsys.readouterr().out
    grid = tmp_path / "g.ini"
    grid.write_text("[grid]\nrs.population = [4, 8]\n")
    assert main(["sweep", "--config", str(cfg), "--grid", str(grid)]) == 0
    assert "best:" in capsys.readouterr().out


def test_cli_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "mbrl_bench", "run", "--env", "nope"], capture_output=True, text=True)
    assert r.returncode == 2 and "unknown env" in r.stderr


def test_report_dedupes_identical_configs(tmp_path):
    a = record([[(1000, 1.0)]])
    b = ExperimentRecord("cartpole", "rs", "e" * 16, 1000, [SeedSeries(0, [1000], [3.0])])
    paths = emit_report([a, b, a], "csv,md", tmp_path, window_steps=1000)
    assert len([p for p in paths if p.endswith(".csv")]) == 2
    md = (tmp_path / "summary.md").read_text()
    assert "1.0 ± 0.0 (ffffffff)<br>3.0 ± 0.0 (eeeeeeee)" in md
