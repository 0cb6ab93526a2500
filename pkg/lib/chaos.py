""" Edge-of-chaos diagnostics.

Two trajectories start 1e-6 apart (in the normalized distance below) and are
evolved with the same couplings and parameters. Their normalized distance

    delta(t) = sqrt( sum_i (x1_i - x2_i)^2 / (4 N) )

stays near 0 for regular dynamics and saturates near 1/sqrt(2) when every
position ends at a random +-1, i.e. when the dynamics is chaotic.
"""

# pylint: disable=C0103,R0913,R0914

##
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import torch
from scipy.stats import spearmanr
from tqdm import tqdm

from lib.ising import IsingInstance
from lib.models.engine import CHAOS_PROBE_AMPLITUDE, Interaction, SolverConfig, SolverState, step
from lib.rng import derive_seed, make_generator, random_signs
from lib.spectral import TuningResult

PERTURBATION = 2e-6
DEFAULT_STRIDE = 100
SATURATION = 1.0 / math.sqrt(2.0)
SCAN_COLUMNS = ['a', 'mean_final_delta', 'stderr', 'reps', 'seed']


@dataclass
class DivergenceRecord:
    """ delta(t_m) of one trajectory pair. """
    a: float
    deltas: List[Tuple[int, float]]
    final_delta: float
    seed: int


class ScanRow(NamedTuple):
    a: float
    mean_final_delta: float
    stderr: float


##
def _state(x: np.ndarray) -> SolverState:
    n = x.shape[0]
    return SolverState(x=torch.tensor(x, dtype=torch.float64), y=torch.zeros(n, dtype=torch.float64),
                       p=torch.ones(n, dtype=torch.float64), m=0)


def paired_initial_conditions(n: int, seed: int) -> Tuple[SolverState, SolverState]:
    """ Two initial states 2e-6 apart in every coordinate.

    The first is the engine's ``chaos_probe`` state for the same seed
    (x = +-0.1); the second adds +-2e-6 per coordinate with signs drawn from
    the same generator right after.

    Args:
        n (int): number of oscillators.
        seed (int): generator seed.

    Returns:
        (SolverState, SolverState): the pair, both with y = 0, p = 1, m = 0.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = make_generator(seed)
    x1 = CHAOS_PROBE_AMPLITUDE * random_signs(rng, n)
    x2 = x1 + PERTURBATION * random_signs(rng, n)
    return _state(x1), _state(x2)


def normalized_distance(x1, x2) -> float:
    """ sqrt(sum (x1 - x2)^2 / (4 N)), in [0, 1] for positions inside the walls. """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.shape != x2.shape or x1.ndim != 1:
        raise ValueError(f"position vectors must be 1-d and equally long, got {x1.shape} and {x2.shape}")
    if x1.size == 0:
        raise ValueError("position vectors are empty")
    diff = x1 - x2
    return float(np.sqrt(diff @ diff / (4.0 * x1.size)))


def _distance(s1: SolverState, s2: SolverState) -> float:
    diff = s1.x - s2.x
    return float(torch.sqrt(diff @ diff / (4.0 * s1.n)))


def divergence_run(instance: IsingInstance, cfg: SolverConfig, tuning: TuningResult, seed: int,
                   stride: Optional[int] = None) -> DivergenceRecord:
    """ Evolve a trajectory pair for M steps and record their distance.

    Args:
        instance (IsingInstance): problem.
        cfg (SolverConfig): solver settings, shared by both trajectories.
        tuning (TuningResult): tuned c and dt.
        seed (int): seed of the pair.
        stride (int): sampling stride, default cfg.sample_stride or 100.

    Returns:
        DivergenceRecord: delta at m = 0, every stride steps and m = M.
    """
    cfg = cfg.resolve(tuning)
    stride = stride or cfg.sample_stride or DEFAULT_STRIDE
    s1, s2 = paired_initial_conditions(instance.n, seed)
    deltas = [(0, _distance(s1, s2))]
    with Interaction(instance, workers=cfg.workers, precision=cfg.precision) as kernel:
        while s1.m < cfg.steps:
            s1 = step(s1, kernel, cfg)
            s2 = step(s2, kernel, cfg)
            if s1.m % stride == 0 or s1.m == cfg.steps:
                deltas.append((s1.m, _distance(s1, s2)))
    return DivergenceRecord(a=cfg.effective_a, deltas=deltas, final_delta=deltas[-1][1], seed=seed)


def chaos_scan(instance: IsingInstance, a_values: Sequence[float], reps: int, cfg_base: SolverConfig,
               tuning: TuningResult, workers: int = 1, visualizer=None, progress: bool = True) -> List[ScanRow]:
    """ Mean and standard error of delta(t_M) for every A.

    Repetition r of the i-th A value uses seed derive_seed(cfg_base.seed, i, r).

    Args:
        instance (IsingInstance): problem.
        a_values (Sequence[float]): A values, rows come back in this order.
        reps (int): trajectory pairs per A.
        cfg_base (SolverConfig): every other solver setting.
        tuning (TuningResult): tuned c and dt.
        workers (int): concurrent trajectory pairs.

    Returns:
        list[ScanRow]: (a, mean_final_delta, stderr) per A.
    """
    if reps < 1:
        raise ValueError(f"reps must be at least 1, got {reps}")
    rows = []
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for i, a in enumerate(tqdm(a_values, leave=False, disable=not progress, desc='chaos scan')):
            cfg = cfg_base.replace(a=float(a))
            seeds = [derive_seed(cfg_base.seed, i, r) for r in range(reps)]

            def one(s, cfg=cfg):
                return divergence_run(instance, cfg, tuning, s).final_delta

            finals = np.asarray(list(pool.map(one, seeds)) if pool else [one(s) for s in seeds])
            stderr = float(finals.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
            rows.append(ScanRow(a=float(a), mean_final_delta=float(finals.mean()), stderr=stderr))
            if visualizer is not None:
                visualizer.print_current_delta(rows[-1])
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


def sample_records(instance: IsingInstance, a_values: Sequence[float], cfg_base: SolverConfig,
                   tuning: TuningResult, count: int = 3) -> List[DivergenceRecord]:
    """ Full delta series of repetition 0 at up to ``count`` evenly spaced A values of a scan.

    Seeds follow chaos_scan, so each final delta is one of the values that scan averaged.
    """
    if not a_values:
        return []
    picks = sorted(set(np.linspace(0, len(a_values) - 1, min(count, len(a_values))).round().astype(int).tolist()))
    return [divergence_run(instance, cfg_base.replace(a=float(a_values[i])), tuning, derive_seed(cfg_base.seed, i, 0))
            for i in picks]


##
def scan_trend(rows: Sequence[ScanRow]) -> float:
    """ Spearman rank correlation of mean delta(t_M) against A. """
    if len(rows) < 2:
        raise ValueError("trend needs at least two scan rows")
    rho = spearmanr([r.a for r in rows], [r.mean_final_delta for r in rows]).correlation
    return float(rho)


def transition_band(rows: Sequence[ScanRow], low: float = 0.1, high: float = 0.6) -> List[float]:
    """ A values whose mean delta(t_M) lies in [low, high]. """
    if not low < high:
        raise ValueError(f"band needs low < high, got {low}, {high}")
    return [r.a for r in rows if low <= r.mean_final_delta <= high]


def scan_frame(rows: Sequence[ScanRow], reps: int, seed: int) -> pd.DataFrame:
    return pd.DataFrame([dict(r._asdict(), reps=reps, seed=seed) for r in rows], columns=SCAN_COLUMNS)


def write_scan_csv(rows: Sequence[ScanRow], path: str, reps: int, seed: int):
    scan_frame(rows, reps, seed).to_csv(path, index=False)
