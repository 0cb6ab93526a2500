import math
from types import SimpleNamespace

import pytest

from lib.evaluate import (CycleModelError, SuccessStats, ZeroSuccessError, cycle_count, derive_target, is_hit,
                          success_probability, time_to_solution)


def results(energies, cuts=None):
    cuts = cuts or [None] * len(energies)
    return [SimpleNamespace(energy=e, cut=c) for e, c in zip(energies, cuts)]


def test_success_probability_half():
    stats = success_probability(results([-10.0] * 50 + [-8.0] * 50), target=-10.0)
    assert stats.p_s == 0.5
    assert stats.delta_p_s == pytest.approx(0.05)
    assert stats.hit_count == 50 and stats.n_rep == 100
    assert stats.mean_energy == -9.0 and stats.best_energy == -10.0


def test_success_probability_extremes():
    stats = success_probability(results([-3.0] * 10), target=-3.0)
    assert (stats.p_s, stats.delta_p_s) == (1.0, 0.0)
    stats = success_probability(results([-1.0] * 10), target=-3.0)
    assert (stats.p_s, stats.delta_p_s) == (0.0, 0.0)
    with pytest.raises(ZeroSuccessError):
        time_to_solution(1.0, stats)
    with pytest.raises(ValueError):
        success_probability([], target=0.0)


def test_success_probability_cut_target():
    stats = success_probability(results([-5.0, -3.0, -5.0], cuts=[11, 10, 11]), target=11, kind="cut_max")
    assert stats.hit_count == 2
    with pytest.raises(ValueError):
        success_probability(results([-5.0]), target=11, kind="cut_max")


def test_is_hit():
    assert is_hit(-10.0, -10.0)
    assert is_hit(-11.0, -10.0)
    assert not is_hit(-9.0, -10.0)
    assert is_hit(12, 11, "cut_max")
    assert is_hit(-0.3 + 1e-12, -0.3)
    assert not is_hit(-0.29, -0.3)
    with pytest.raises(ValueError):
        is_hit(1.0, 1.0, "maximize")


def test_derive_target():
    assert derive_target(results([-3.0, -7.0, -5.0])) == -7.0
    assert derive_target(results([0.0, 0.0], cuts=[4, 9]), "cut_max") == 9


def test_delta_p_s_peaks_at_half():
    deltas = [SuccessStats.from_counts(h, 100, 0.0).delta_p_s for h in range(101)]
    assert max(range(101), key=lambda h: deltas[h]) == 50


def test_tts_above_confidence():
    stats = SuccessStats.from_counts(999, 1000, 0.0)
    tts = time_to_solution(0.010, stats)
    assert tts.tts == 0.010
    assert tts.delta_tts == 0.0
    assert tts.formula_tts is not None


def test_tts_formula():
    stats = SuccessStats.from_counts(9, 10, 0.0)
    assert time_to_solution(1.0, stats).tts == pytest.approx(2.0, abs=1e-12)

    stats = SuccessStats.from_counts(500, 1000, 0.0)
    tts = time_to_solution(1.0, stats)
    assert tts.tts == pytest.approx(6.6439, abs=1e-4)
    assert tts.delta_tts == pytest.approx(0.3031, abs=1e-4)
    assert tts.tts == pytest.approx(math.log(0.01) / math.log(0.5))


def test_tts_branch_switch_at_confidence():
    exact = SuccessStats(p_s=0.99, delta_p_s=0.0, n_rep=100, target_value=0.0, hit_count=99)
    assert time_to_solution(1.0, exact).tts == pytest.approx(1.0)
    with pytest.raises(ValueError):
        time_to_solution(0.0, exact)


def test_cycle_count():
    model = cycle_count(2048, 8, 32, 128, 100)
    assert model.n_cyc == 260
    assert isinstance(model.n_cyc, int)
    assert cycle_count(4, 1, 1, 1, 0).n_cyc == 17
    timed = cycle_count(2048, 8, 32, 128, 100, f_sys=591e6)
    assert timed.step_time * 1e6 == pytest.approx(0.440, abs=0.001)


def test_cycle_count_errors():
    with pytest.raises(CycleModelError, match="N\\^2"):
        cycle_count(10, 3, 1, 1, 0)
    with pytest.raises(CycleModelError, match="P_b P_r/P_c"):
        cycle_count(8, 1, 4, 1, 0)
    with pytest.raises(ValueError):
        cycle_count(0, 1, 1, 1, 0)
    with pytest.raises(ValueError):
        cycle_count(4, 1, 1, 1, -1)
