import json

import numpy as np
import pandas as pd
import pytest

from lib import bench
from lib.chaos import chaos_scan, transition_band
from lib.evaluate import derive_target, success_probability
from lib.ising import gen_random_dense
from lib.models.engine import SolverConfig, run
from lib.rng import derive_seed
from lib.spectral import tune


@pytest.fixture
def small():
    inst = gen_random_dense(12, 5)
    return inst, tune(inst)


def test_batch_of_one_is_a_plain_run(small):
    inst, tuning = small
    cfg = SolverConfig(steps=100)
    batch = bench.batch_best_of(inst, cfg, tuning, 1, master_seed=4)
    plain = run(inst, cfg.replace(seed=4), tuning)
    assert np.array_equal(batch.final_spins, plain.final_spins)
    assert batch.energy == plain.energy


def test_batch_keeps_lowest_energy(small):
    inst, tuning = small
    cfg = SolverConfig(steps=100)
    batch = bench.batch_best_of(inst, cfg, tuning, 4, master_seed=4)
    energies = batch.extra["replica_energies"]
    assert batch.energy == min(energies)
    assert batch.extra["best_replica"] == energies.index(min(energies))
    assert batch.extra["replica_seeds"][0] == 4
    assert batch.extra["replica_seeds"][2] == derive_seed(4, 2)
    again = bench.batch_best_of(inst, cfg, tuning, 4, master_seed=4, workers=1)
    assert again.extra["replica_energies"] == energies
    with pytest.raises(ValueError):
        bench.batch_best_of(inst, cfg, tuning, 0, master_seed=4)


def test_one_cell_sweep_matches_plain_runs(small):
    inst, tuning = small
    cfg = SolverConfig(steps=80, a=0.3, seed=2)
    target = -20.0
    grid = bench.sweep(inst, [80], [0.3], 10, cfg, tuning, target, progress=False)
    runs = bench.run_replicas(inst, cfg, tuning, bench.repetition_seeds(2, 10))
    expected = success_probability(runs, target)
    assert grid.shape == (1, 1)
    assert grid.cells[0][0] == expected


def test_sweep_zero_a_column_is_bsb(small):
    inst, tuning = small
    cfg = SolverConfig(steps=60, seed=1)
    target = bench.run_replicas(inst, cfg, tuning, [0])[0].energy
    grid = bench.sweep(inst, [60, 120], [0.0, 0.4], 5, cfg, tuning, target, progress=False)
    assert grid.shape == (2, 2)
    for i, m in enumerate([60, 120]):
        seeds = [derive_seed(1, i, 0, r) for r in range(5)]
        baseline = bench.run_replicas(inst, cfg.replace(variant="bsb", steps=m), tuning, seeds)
        assert grid.cells[i][0] == success_probability(baseline, target)


def test_sweep_streams_and_resumes(small, tmp_path, monkeypatch):
    inst, tuning = small
    cfg = SolverConfig(steps=40, seed=3)
    path = tmp_path / "grid.csv"
    first = bench.sweep(inst, [40, 80], [0.1, 0.2], 4, cfg, tuning, -18.0, out_csv=str(path), progress=False)
    frame = bench.read_grid_csv(str(path))
    assert len(frame) == 4
    assert list(frame.columns[:8]) == ["m", "a", "reps", "hits", "p_s", "delta_p_s", "mean_energy", "best_energy"]

    def boom(*args, **kwargs):
        raise AssertionError("finished cells must not be recomputed")

    monkeypatch.setattr(bench, "run", boom)
    resumed = bench.sweep(inst, [40, 80], [0.1, 0.2], 4, cfg, tuning, -18.0, out_csv=str(path), progress=False)
    assert resumed.p_s().tolist() == first.p_s().tolist()
    assert len(pd.read_csv(path)) == 4


def test_sweep_refuses_csv_from_another_run(small, tmp_path):
    inst, tuning = small
    cfg = SolverConfig(steps=30, seed=3)
    path = str(tmp_path / "grid.csv")
    bench.sweep(inst, [30], [0.2], 6, cfg, tuning, -1000.0, out_csv=path, progress=False)
    frame = bench.read_grid_csv(path)
    assert frame["hits"].tolist() == [0]
    assert frame["seed"].tolist() == [3]
    assert frame["target"].tolist() == [-1000.0]

    with pytest.raises(ValueError, match="target"):
        bench.sweep(inst, [30], [0.2], 6, cfg, tuning, 1000.0, out_csv=path, progress=False)
    with pytest.raises(ValueError, match="seed"):
        bench.sweep(inst, [30], [0.2], 6, cfg.replace(seed=99), tuning, -1000.0, out_csv=path, progress=False)
    with pytest.raises(ValueError, match="config"):
        bench.sweep(inst, [30], [0.2], 6, cfg.replace(precision="fixed16"), tuning, -1000.0, out_csv=path,
                    progress=False)
    with pytest.raises(ValueError, match="config"):
        bench.sweep(gen_random_dense(12, 6), [30], [0.2], 6, cfg, tuning, -1000.0, out_csv=path, progress=False)

    # every final energy lies below +1000, so a fresh file counts all runs as hits
    fresh = bench.sweep(inst, [30], [0.2], 6, cfg.replace(seed=99), tuning, 1000.0,
                        out_csv=str(tmp_path / "other.csv"), progress=False)
    assert fresh.cells[0][0].hit_count == 6
    assert fresh.cells[0][0].p_s == 1.0


def test_sweep_fingerprint_ignores_axes_and_workers(small):
    inst, tuning = small
    cfg = SolverConfig(steps=30, a=0.1, seed=3)
    base = bench.sweep_fingerprint(inst, cfg, tuning)
    assert bench.sweep_fingerprint(inst, cfg.replace(steps=90, a=0.5, seed=7, workers=4), tuning) == base
    assert bench.sweep_fingerprint(inst, cfg.replace(variant="dsb"), tuning) != base
    assert bench.sweep_fingerprint(inst, cfg.replace(dt=0.5), tuning) != base


def test_sweep_rerun_with_other_reps_replaces_rows(small, tmp_path):
    inst, tuning = small
    cfg = SolverConfig(steps=30, seed=3)
    path = str(tmp_path / "grid.csv")
    bench.sweep(inst, [30], [0.0, 0.2], 4, cfg, tuning, -18.0, out_csv=path, progress=False)
    again = bench.sweep(inst, [30], [0.0, 0.2], 2, cfg, tuning, -18.0, out_csv=path, progress=False)
    frame = bench.read_grid_csv(path)
    assert frame["reps"].tolist() == [2, 2]
    assert frame["hits"].tolist() == [c.hit_count for c in again.cells[0]]


def test_dt_sweep_refuses_csv_from_another_run(small, tmp_path):
    inst, tuning = small
    path = str(tmp_path / "dt.csv")
    bench.dt_sweep(inst, [1.0], [20.0], 0.2, 2, tuning, -18.0, out_csv=path, progress=False)
    bench.dt_sweep(inst, [1.0], [20.0], 0.2, 2, tuning, -18.0, out_csv=path, progress=False)
    with pytest.raises(ValueError, match="config"):
        bench.dt_sweep(inst, [1.0], [20.0], 0.4, 2, tuning, -18.0, out_csv=path, progress=False)
    with pytest.raises(ValueError, match="kind"):
        bench.dt_sweep(inst, [1.0], [20.0], 0.2, 2, tuning, -18.0, kind="cut_max", out_csv=path, progress=False)


def test_sweep_validation(small):
    inst, tuning = small
    with pytest.raises(ValueError):
        bench.sweep(inst, [], [0.1], 2, SolverConfig(), tuning, 0.0, progress=False)
    with pytest.raises(ValueError):
        bench.sweep(inst, [10], [0.1], 0, SolverConfig(), tuning, 0.0, progress=False)


def test_dt_sweep_keeps_final_time(small):
    inst, tuning = small
    grid = bench.dt_sweep(inst, [0.5, 1.0], [50.0], 0.2, 3, tuning, -18.0, progress=False)
    assert grid.dts == pytest.approx([0.5, 1.0])
    assert [row[0] for row in grid.steps] == [100, 50]
    assert grid.shape == (2, 1)
    with pytest.raises(ValueError):
        bench.dt_sweep(inst, [1.0], [0.2], 0.2, 3, tuning, -18.0, progress=False)
    with pytest.raises(ValueError):
        bench.dt_sweep(inst, [0.0], [10.0], 0.2, 3, tuning, -18.0, progress=False)


def test_dt_sweep_single_cell_reduces(small):
    inst, tuning = small
    grid = bench.dt_sweep(inst, [1.25], [25.0], 0.2, 4, tuning, -18.0, cfg_base=SolverConfig(seed=6), progress=False)
    seeds = [derive_seed(6, 0, 0, r) for r in range(4)]
    runs = bench.run_replicas(inst, SolverConfig(steps=20, a=0.2), tuning, seeds)
    assert grid.cells[0][0] == success_probability(runs, -18.0)


def test_grid_outputs(small, tmp_path):
    inst, tuning = small
    grid = bench.sweep(inst, [30], [0.0, 0.2], 2, SolverConfig(steps=30), tuning, -18.0, progress=False)
    csv_path = tmp_path / "out.csv"
    bench.write_grid_csv(grid, str(csv_path))
    assert bench.read_grid_csv(str(csv_path))["a"].tolist() == [0.0, 0.2]
    doc = bench.grid_summary(grid, str(tmp_path / "out.json"), tuning, -18.0, workers=2)
    loaded = json.loads((tmp_path / "out.json").read_text())
    assert loaded == json.loads(json.dumps(doc))
    assert loaded["environment"]["workers"] == 2
    assert loaded["environment"]["arithmetic"] == "fp64"
    assert loaded["grid"]["axis_a"] == [0.0, 0.2]
    with pytest.raises(FileNotFoundError):
        bench.read_grid_csv(str(tmp_path / "missing.csv"))


@pytest.mark.slow
def test_batch_success_follows_independence():
    inst = gen_random_dense(16, 2)
    tuning = tune(inst)
    cfg = SolverConfig(steps=60, a=0.2)
    singles = bench.run_replicas(inst, cfg, tuning, bench.repetition_seeds(0, 400), workers=8)
    target = min(r.energy for r in singles)
    p1 = success_probability(singles, target).p_s
    batches = [bench.batch_best_of(inst, cfg, tuning, 2, derive_seed(1, k)) for k in range(400)]
    stats = success_probability(batches, target)
    expected = 1 - (1 - p1) ** 2
    assert abs(stats.p_s - expected) < 4 * max(stats.delta_p_s, 0.02) + 0.05


@pytest.mark.slow
def test_best_nonlinearity_sits_in_transition_band():
    inst = gen_random_dense(800, 1)
    tuning = tune(inst)
    cfg = SolverConfig(steps=1000, seed=0)
    a_values = [round(0.05 * k, 2) for k in range(13)]
    reps = 200

    # reference: best energy over every sweep run plus dSB baselines at the same M
    scout = bench.sweep(inst, [1000], a_values, reps, cfg, tuning, 0.0, workers=8, progress=False)
    dsb = bench.run_replicas(inst, cfg.replace(variant="dsb"), tuning, bench.repetition_seeds(1, reps), workers=8)
    target = min(min(c.best_energy for c in scout.cells[0]), derive_target(dsb))

    grid = bench.sweep(inst, [1000], a_values, reps, cfg, tuning, target, workers=8, progress=False)
    assert grid.p_s().max() > 0
    best_a = grid.axis_a[grid.best_cell()[1]]

    rows = chaos_scan(inst, a_values, 100, cfg, tuning, workers=8, progress=False)
    assert best_a in transition_band(rows, 0.1, 0.6)


@pytest.mark.slow
def test_gbsb_beats_bsb_on_most_instances():
    cfg = SolverConfig(steps=500, seed=0)
    a_values = [0.0, 0.1, 0.2, 0.3]
    reps = 100
    wins = 0
    for k in range(10):
        inst = gen_random_dense(300, 700 + k)
        tuning = tune(inst)
        runs = [bench.run_replicas(inst, cfg.replace(a=a), tuning, [derive_seed(0, 0, j, r) for r in range(reps)],
                                   workers=8) for j, a in enumerate(a_values)]
        target = derive_target([r for series in runs for r in series])
        grid = bench.sweep(inst, [500], a_values, reps, cfg, tuning, target, workers=8, progress=False)
        assert grid.cells[0] == [success_probability(series, target) for series in runs]
        p_s = grid.p_s()[0]
        wins += max(p_s[1:]) > p_s[0]
    assert wins >= 8
