import json

import numpy as np
import pytest
import torch

from lib.bench import batch_best_of
from lib.ising import IsingInstance, brute_force_ground_state, gen_random_dense, ising_energy
from lib.models.engine import (Interaction, SolverConfig, SolverState, StepLimitError, apply_walls, decode_spins,
                               init_state, run, run_manifest, sgn, step, update_bifurcation)
from lib.spectral import SpectralEstimate, TuningResult, tune

UNIT_TUNING = TuningResult(c=1.0, dt=1.0, d_t_factor=1.0,
                           source=SpectralEstimate(lambda_max=1.0, lambda_min=-1.0, method="wigner", tolerance=0.0))


def single(x, y=0.0, p=1.0, m=0):
    t = lambda v: torch.tensor([v], dtype=torch.float64)  # noqa: E731
    return SolverState(x=t(x), y=t(y), p=t(p), m=m)


def test_init_state():
    state = init_state(20, 4)
    assert torch.all(state.y == 0)
    assert torch.all(state.p == 1)
    assert state.m == 0
    assert torch.all(state.x.abs() < 1)
    again = init_state(20, 4)
    assert torch.equal(state.x, again.x)
    assert not torch.equal(state.x, init_state(20, 5).x)


def test_init_state_chaos_probe():
    state = init_state(50, 1, "chaos_probe")
    assert torch.all(state.x.abs() == 0.1)
    with pytest.raises(ValueError):
        init_state(5, 1, "zeros")


def test_update_bifurcation():
    assert update_bifurcation(1.0, 0.3, 0, 10, 0.0) == pytest.approx(0.9)
    assert update_bifurcation(1.0, 1.0, 0, 10, 0.2) == pytest.approx(0.92)
    assert update_bifurcation(0.5, 0.7, 9, 10, 0.0) == 0.0
    with pytest.raises(StepLimitError):
        update_bifurcation(1.0, 0.0, 10, 10, 0.0)


def test_sgn_zero_is_positive():
    assert sgn(torch.tensor([0.0, -0.0, -2.0, 3.0])).tolist() == [1.0, 1.0, -1.0, 1.0]


def test_step_by_hand():
    inst = IsingInstance(np.zeros((1, 1)))
    cfg = SolverConfig(variant="gbsb", a=0.0, steps=1, dt=1.0, c=1.0)
    out = step(single(0.5), inst, cfg)
    assert (out.x.item(), out.y.item(), out.p.item(), out.m) == (0.5, 0.0, 0.0, 1)
    with pytest.raises(StepLimitError):
        step(out, inst, cfg)


def test_walls():
    x, y, hit = apply_walls(torch.tensor([1.2, -1.5, 1.0, 0.3], dtype=torch.float64),
                            torch.tensor([0.4, -0.2, 0.7, 0.1], dtype=torch.float64))
    assert x.tolist() == [1.0, -1.0, 1.0, 0.3]
    assert y.tolist() == [0.0, 0.0, 0.7, 0.1]
    assert hit.tolist() == [True, True, False, False]

    inst = IsingInstance(np.zeros((1, 1)))
    out = step(single(0.9, y=2.0), inst, SolverConfig(steps=10, a=0.0, dt=1.0, c=1.0))
    assert out.x.item() == 1.0
    assert out.y.item() == 0.0


def test_step_needs_resolved_config(dense10):
    with pytest.raises(ValueError):
        step(init_state(10, 0), dense10, SolverConfig())
    with pytest.raises(ValueError):
        step(init_state(9, 0), dense10, SolverConfig().resolve(UNIT_TUNING))


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(steps=0)
    with pytest.raises(ValueError):
        SolverConfig(variant="asb")
    with pytest.raises(ValueError):
        SolverConfig(a=-0.1)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0)
    assert SolverConfig(variant="bSB", a=0.7).effective_a == 0.0
    assert SolverConfig(a=1.5).a == 1.5


def test_gbsb_without_nonlinearity_matches_bsb():
    rng = np.random.default_rng(0)
    for k in range(20):
        n = int(rng.integers(2, 30))
        inst = gen_random_dense(n, k)
        tuning = tune(inst)
        steps = int(rng.integers(10, 300))
        dt, c = float(rng.uniform(0.2, 1.4)), float(rng.uniform(0.01, 0.5))
        base = dict(steps=steps, dt=dt, c=c, seed=k, sample_stride=1)
        bsb = run(inst, SolverConfig(variant="bsb", **base), tuning)
        gbsb = run(inst, SolverConfig(variant="gbsb", a=0.0, **base), tuning)
        assert len(bsb.trajectory) == steps + 1
        for (m1, x1), (m2, x2) in zip(bsb.trajectory, gbsb.trajectory):
            assert m1 == m2
            assert np.array_equal(x1, x2)
        assert bsb.energy == gbsb.energy


def evolve(inst, cfg, seed=0):
    state = init_state(inst.n, seed)
    states = [state]
    with Interaction(inst) as kernel:
        while state.m < cfg.steps:
            state = step(state, kernel, cfg)
            states.append(state)
    return states


def test_positions_bounded_and_walls_zero_momentum(dense10):
    cfg = SolverConfig(steps=300, a=0.5, dt=1.25, c=1.0 / 6.0)
    states = evolve(dense10, cfg)
    for prev, cur in zip(states, states[1:]):
        assert float(cur.x.abs().max()) <= 1.0
        fired = cur.x.abs() == 1.0
        newly = fired & (prev.x.abs() != 1.0)
        assert torch.all(cur.y[newly] == 0)


@pytest.mark.parametrize("a", [0.0, 0.3, 1.0])
def test_bifurcation_schedule(dense10, a):
    cfg = SolverConfig(steps=200, a=a, dt=1.0, c=0.1)
    states = evolve(dense10, cfg)
    for prev, cur in zip(states, states[1:]):
        assert torch.all(cur.p <= prev.p)
        assert torch.all(cur.p >= 0) and torch.all(cur.p <= 1)
    if a == 0.0:
        for state in states[:-1]:
            assert torch.allclose(state.p, torch.full_like(state.p, 1 - state.m / 200), atol=1e-12)


def test_run_deterministic(triangle_instance):
    cfg = SolverConfig(steps=50, seed=3, sample_stride=10, track_best=True)
    tuning = tune(triangle_instance)
    a, b = run(triangle_instance, cfg, tuning), run(triangle_instance, cfg, tuning)
    assert np.array_equal(a.final_spins, b.final_spins)
    assert [m for m, _ in a.trajectory] == [0, 10, 20, 30, 40, 50]
    assert all(np.array_equal(x1, x2) for (_, x1), (_, x2) in zip(a.trajectory, b.trajectory))
    assert a.energy == ising_energy(triangle_instance, a.final_spins)
    assert 2 * a.cut + a.energy == 3
    assert a.best_energy <= a.energy
    assert a.config_echo.dt == tuning.dt


def test_run_single_step_matches_hand_step():
    inst = IsingInstance(np.zeros((1, 1)))
    cfg = SolverConfig(variant="bsb", steps=1, seed=2, sample_stride=1)
    result = run(inst, cfg, UNIT_TUNING)
    x0 = init_state(1, 2).x.item()
    assert result.trajectory[-1][1][0] == x0
    assert result.final_spins[0] == (1 if x0 >= 0 else -1)


def test_worker_count_does_not_change_results():
    inst = gen_random_dense(600, 1)
    tuning = tune(inst)
    cfg = SolverConfig(steps=30, seed=5, sample_stride=10)
    one = run(inst, cfg, tuning)
    many = run(inst, cfg.replace(workers=4), tuning)
    assert np.array_equal(one.final_spins, many.final_spins)
    assert all(np.array_equal(x1, x2) for (_, x1), (_, x2) in zip(one.trajectory, many.trajectory))


def test_fixed16_interaction(dense10):
    g = torch.tensor(np.linspace(-1, 1, 10), dtype=torch.float64)
    exact = Interaction(dense10)(g)
    quantized = Interaction(dense10, precision="fixed16")(g)
    expected = torch.mv(torch.tensor(dense10.couplings), torch.round(g * 32767) / 32767)
    assert torch.equal(quantized, expected)
    assert torch.allclose(exact, quantized, atol=1e-3)
    result = run(dense10, SolverConfig(steps=100, precision="fixed16"), tune(dense10))
    assert result.energy == ising_energy(dense10, result.final_spins)


def test_dsb_runs(dense10):
    result = run(dense10, SolverConfig(variant="dsb", steps=200), tune(dense10))
    assert set(result.final_spins.tolist()) <= {1, -1}


def test_small_instances_reach_ground_state():
    matched = 0
    for seed in range(5):
        inst = gen_random_dense(10, 100 + seed)
        tuning = tune(inst)
        _, ground = brute_force_ground_state(inst)
        best = min(run(inst, SolverConfig(steps=2000, seed=s), tuning).energy for s in range(20))
        assert best >= ground
        matched += best == ground
    assert matched >= 4


@pytest.mark.slow
def test_best_of_twenty_matches_enumeration_on_fifty_instances():
    matched = 0
    for k in range(50):
        inst = gen_random_dense(10, 1000 + k)
        _, ground = brute_force_ground_state(inst)
        best = batch_best_of(inst, SolverConfig(steps=2000), tune(inst), 20, master_seed=k, workers=4)
        assert best.energy >= ground
        matched += best.energy == ground
    assert matched >= 48


def test_manifest(triangle_instance):
    result = run(triangle_instance, SolverConfig(steps=20, seed=7), tune(triangle_instance))
    doc = json.loads(json.dumps(run_manifest(result, triangle_instance, rle=True)))
    assert doc["seed"] == 7
    assert doc["cut"] == result.cut
    assert doc["config"]["steps"] == 20
    assert doc["spins_encoding"] == "rle"
    assert decode_spins(doc["spins"]).tolist() == result.final_spins.tolist()
    assert "version" in doc
