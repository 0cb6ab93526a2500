""" Benchmark statistics.

Returns:
    SuccessStats : success probability P_S with its binomial error
    TtsResult    : time to solution at 99 % confidence with its error
    CycleModel   : clock cycles per time-evolution step of the pipelined accelerator
"""

# pylint: disable=C0103,C0301,R0902,R0913

##
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

TTS_CONFIDENCE = 0.99
KINDS = ('energy_min', 'cut_max')


class ZeroSuccessError(ValueError):
    """ TTS is undefined for P_S = 0. """


class CycleModelError(ValueError):
    """ A term of the cycle model does not divide evenly. """


##
@dataclass(frozen=True)
class SuccessStats:
    p_s: float
    delta_p_s: float
    n_rep: int
    target_value: float
    hit_count: int
    mean_energy: Optional[float] = None
    best_energy: Optional[float] = None

    @classmethod
    def from_counts(cls, hit_count: int, n_rep: int, target_value: float,
                    mean_energy: float = None, best_energy: float = None) -> 'SuccessStats':
        """ P_S = hits / N_rep and dP_S = sqrt((P_S - P_S^2) / N_rep). """
        if n_rep < 1:
            raise ValueError(f"need at least one repetition, got {n_rep}")
        if not 0 <= hit_count <= n_rep:
            raise ValueError(f"hit count {hit_count} outside [0, {n_rep}]")
        p_s = hit_count / n_rep
        return cls(p_s=p_s, delta_p_s=math.sqrt((p_s - p_s * p_s) / n_rep), n_rep=n_rep,
                   target_value=target_value, hit_count=hit_count,
                   mean_energy=mean_energy, best_energy=best_energy)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TtsResult:
    tts: float
    delta_tts: float
    t_com: float
    stats: SuccessStats
    formula_tts: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CycleModel:
    n: int
    p_r: int
    p_c: int
    p_b: int
    latency: int
    n_cyc: int
    f_sys: Optional[float] = None
    step_time: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


##
def _is_integral(values) -> bool:
    values = np.asarray(values, dtype=np.float64)
    return bool(np.all(values == np.round(values)))


def is_hit(value: float, target: float, kind: str = 'energy_min', exact: bool = None) -> bool:
    """ energy <= target (energy_min) or cut >= target (cut_max).

    Integral values are compared exactly, anything else with a 1e-9 relative slack.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown target kind {kind!r}")
    if exact is None:
        exact = _is_integral([value, target])
    slack = 0.0 if exact else 1e-9 * max(1.0, abs(target))
    if exact:
        value, target = round(value), round(target)
    if kind == 'energy_min':
        return value <= target + slack
    return value >= target - slack


def result_values(results: Sequence, kind: str) -> np.ndarray:
    """ Energies (energy_min) or cut values (cut_max) of a list of RunResults. """
    if kind == 'cut_max':
        if any(r.cut is None for r in results):
            raise ValueError("cut_max needs MAX-CUT results, some runs have no cut value")
        return np.asarray([r.cut for r in results], dtype=np.float64)
    return np.asarray([r.energy for r in results], dtype=np.float64)


def success_probability(results: Sequence, target: float, kind: str = 'energy_min') -> SuccessStats:
    """ Fraction of runs reaching the target.

    Args:
        results (Sequence[RunResult]): runs, at least one.
        target (float): best-known energy (energy_min) or cut (cut_max).
        kind (str): 'energy_min' or 'cut_max'.

    Returns:
        SuccessStats: P_S, dP_S and counts.
    """
    if len(results) == 0:
        raise ValueError("success probability needs at least one run")
    values = result_values(results, kind)
    exact = _is_integral(values) and _is_integral([target])
    hits = sum(is_hit(v, target, kind, exact) for v in values)
    energies = np.asarray([r.energy for r in results], dtype=np.float64)
    return SuccessStats.from_counts(int(hits), len(results), float(target),
                                    mean_energy=float(energies.mean()), best_energy=float(energies.min()))


def derive_target(results: Sequence, kind: str = 'energy_min') -> float:
    """ Best value found across runs, the reference target when no best-known value exists. """
    if len(results) == 0:
        raise ValueError("cannot derive a target from zero runs")
    values = result_values(results, kind)
    return float(values.min() if kind == 'energy_min' else values.max())


def time_to_solution(t_com: float, stats: SuccessStats) -> TtsResult:
    """ TTS = T_com ln(1 - 0.99) / ln(1 - P_S), or T_com when P_S > 0.99.

    dTTS = TTS dP_S / ((1 - P_S) |ln(1 - P_S)|), zero on the T_com branch.

    Raises:
        ZeroSuccessError: P_S = 0.
    """
    if not t_com > 0:
        raise ValueError(f"T_com must be positive, got {t_com}")
    p = stats.p_s
    if p == 0:
        raise ZeroSuccessError("TTS is undefined for a success probability of 0")
    formula = t_com * math.log(1 - TTS_CONFIDENCE) / math.log(1 - p) if p < 1 else None
    if p > TTS_CONFIDENCE:
        return TtsResult(tts=t_com, delta_tts=0.0, t_com=t_com, stats=stats, formula_tts=formula)
    delta = formula * stats.delta_p_s / ((1 - p) * abs(math.log(1 - p)))
    return TtsResult(tts=formula, delta_tts=delta, t_com=t_com, stats=stats, formula_tts=formula)


def cycle_count(n: int, p_r: int, p_c: int, p_b: int, latency: int, f_sys: float = None) -> CycleModel:
    """ N_cyc = N^2 / (P_r P_c P_b) + P_b P_r / P_c + latency, in exact integers.

    Args:
        n (int): spins.
        p_r, p_c, p_b (int): parallelization factors.
        latency (int): longest circulative path latency, in cycles.
        f_sys (float): optional clock frequency in Hz, sets step_time = N_cyc / f_sys.

    Raises:
        CycleModelError: a term does not divide evenly.

    Returns:
        CycleModel: cycle count per step.
    """
    for name, value in (('n', n), ('p_r', p_r), ('p_c', p_c), ('p_b', p_b)):
        if int(value) != value or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value}")
    if int(latency) != latency or latency < 0:
        raise ValueError(f"latency must be a non-negative integer, got {latency}")
    n, p_r, p_c, p_b, latency = int(n), int(p_r), int(p_c), int(p_b), int(latency)
    if (n * n) % (p_r * p_c * p_b):
        raise CycleModelError(f"N^2/(P_r P_c P_b) = {n * n}/{p_r * p_c * p_b} is not an integer")
    if (p_b * p_r) % p_c:
        raise CycleModelError(f"P_b P_r/P_c = {p_b * p_r}/{p_c} is not an integer")
    n_cyc = (n * n) // (p_r * p_c * p_b) + (p_b * p_r) // p_c + latency
    step_time = None
    if f_sys is not None:
        if not f_sys > 0:
            raise ValueError(f"f_sys must be positive, got {f_sys}")
        step_time = n_cyc / f_sys
    return CycleModel(n=n, p_r=p_r, p_c=p_c, p_b=p_b, latency=latency, n_cyc=n_cyc, f_sys=f_sys, step_time=step_time)
