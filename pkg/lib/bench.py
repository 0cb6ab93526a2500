""" Experiment drivers: replicated runs, batch best-of, and success-probability sweeps.

Sweeps stream one CSV row per finished cell, so an interrupted sweep resumes
by re-running the same command: cells already present in the CSV are read back
instead of recomputed. Rows record the target, kind, master seed and a config
fingerprint, and a CSV written under different ones is refused.
"""

# pylint: disable=C0103,C0301,R0902,R0913,R0914

##
import dataclasses
import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import torch
from tqdm import tqdm

from lib import __version__
from lib.evaluate import SuccessStats, success_probability
from lib.ising import IsingInstance
from lib.models.engine import RunResult, SolverConfig, run
from lib.rng import derive_seed
from lib.spectral import TuningResult, tune_dt

STATS_COLUMNS = ['reps', 'hits', 'p_s', 'delta_p_s', 'mean_energy', 'best_energy', 'mean_wall_time']
# what a row was computed against; a CSV only resumes when all of these match
RUN_COLUMNS = ['target', 'kind', 'seed', 'config']
GRID_COLUMNS = ['m', 'a'] + STATS_COLUMNS + RUN_COLUMNS
DT_GRID_COLUMNS = ['d_t', 't_final', 'dt', 'm'] + STATS_COLUMNS + RUN_COLUMNS


##
def run_replicas(instance: IsingInstance, cfg: SolverConfig, tuning: TuningResult, seeds: Sequence[int],
                 workers: int = 1) -> List[RunResult]:
    """ Independent runs differing only in seed, returned in seed order.

    Replicas share nothing mutable, so up to ``workers`` of them run at once.
    """
    cfgs = [cfg.replace(seed=int(s)) for s in seeds]
    if workers <= 1 or len(cfgs) <= 1:
        return [run(instance, c, tuning) for c in cfgs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: run(instance, c, tuning), cfgs))


def replica_seed(master_seed: int, r: int) -> int:
    """ Seed of batch replica r: the master seed itself for r = 0, derived otherwise. """
    return master_seed if r == 0 else derive_seed(master_seed, r)


def repetition_seeds(master_seed: int, reps: int) -> List[int]:
    """ Seeds of a plain repetition series, identical to a 1x1 sweep cell. """
    return [derive_seed(master_seed, 0, 0, r) for r in range(reps)]


def batch_best_of(instance: IsingInstance, cfg: SolverConfig, tuning: TuningResult, n_batch: int,
                  master_seed: int, workers: Optional[int] = None) -> RunResult:
    """ Run n_batch replicas side by side and keep the lowest-energy one.

    Args:
        instance (IsingInstance): problem.
        cfg (SolverConfig): solver settings (its seed is replaced per replica).
        tuning (TuningResult): tuned c and dt.
        n_batch (int): replicas, at least 1.
        master_seed (int): seed of replica 0; others are derived from it.
        workers (int): concurrent replicas, default n_batch.

    Returns:
        RunResult: best replica (ties -> lowest index) with wall_time of the whole batch.
    """
    if n_batch < 1:
        raise ValueError(f"n_batch must be at least 1, got {n_batch}")
    if n_batch == 1:
        return run(instance, cfg.replace(seed=master_seed), tuning)
    seeds = [replica_seed(master_seed, r) for r in range(n_batch)]
    start = time.perf_counter()
    results = run_replicas(instance, cfg, tuning, seeds, workers=n_batch if workers is None else workers)
    elapsed = time.perf_counter() - start
    best = min(range(n_batch), key=lambda r: (results[r].energy, r))
    extra = dict(results[best].extra, n_batch=n_batch, best_replica=best,
                 replica_seeds=seeds, replica_energies=[r.energy for r in results])
    return dataclasses.replace(results[best], wall_time=elapsed, extra=extra)


##
@dataclass
class SweepGrid:
    """ Success statistics over an (M, A) grid. """
    axis_m: List[int]
    axis_a: List[float]
    cells: List[List[SuccessStats]]
    instance_label: Optional[str]
    config_base: SolverConfig
    t_com: List[List[float]] = field(default_factory=list)
    kind: str = 'energy_min'
    target: Optional[float] = None
    fingerprint: Optional[str] = None

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.axis_m), len(self.axis_a)

    def p_s(self) -> np.ndarray:
        return np.array([[c.p_s for c in row] for row in self.cells])

    def best_cell(self) -> Tuple[int, int]:
        """ (i, j) of the highest P_S, first in row-major order on ties. """
        grid = self.p_s()
        return tuple(int(v) for v in np.unravel_index(np.argmax(grid), grid.shape))

    def run_identity(self) -> dict:
        return _run_identity(self.target, self.kind, self.config_base.seed, self.fingerprint)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for i, m in enumerate(self.axis_m):
            for j, a in enumerate(self.axis_a):
                rows.append(_grid_row({'m': m, 'a': a}, self.cells[i][j], self.t_com[i][j], self.run_identity()))
        return pd.DataFrame(rows, columns=GRID_COLUMNS)

    def to_dict(self) -> dict:
        return {'axis_m': self.axis_m, 'axis_a': self.axis_a, 'kind': self.kind, 'target': self.target,
                'fingerprint': self.fingerprint,
                'instance_label': self.instance_label, 'config_base': self.config_base.to_dict(),
                'cells': [[c.to_dict() for c in row] for row in self.cells], 't_com': self.t_com}


@dataclass
class DtSweepGrid:
    """ Success statistics over a (D_t, t_M) grid; M = round(t_M / dt) per cell. """
    axis_d_t: List[float]
    axis_t_final: List[float]
    dts: List[float]
    steps: List[List[int]]
    cells: List[List[SuccessStats]]
    instance_label: Optional[str]
    config_base: SolverConfig
    t_com: List[List[float]] = field(default_factory=list)
    kind: str = 'energy_min'
    target: Optional[float] = None
    fingerprint: Optional[str] = None

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.axis_d_t), len(self.axis_t_final)

    def p_s(self) -> np.ndarray:
        return np.array([[c.p_s for c in row] for row in self.cells])

    def run_identity(self) -> dict:
        return _run_identity(self.target, self.kind, self.config_base.seed, self.fingerprint)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for i, d_t in enumerate(self.axis_d_t):
            for j, t_final in enumerate(self.axis_t_final):
                key = {'d_t': d_t, 't_final': t_final, 'dt': self.dts[i], 'm': self.steps[i][j]}
                rows.append(_grid_row(key, self.cells[i][j], self.t_com[i][j], self.run_identity()))
        return pd.DataFrame(rows, columns=DT_GRID_COLUMNS)

    def to_dict(self) -> dict:
        return {'axis_d_t': self.axis_d_t, 'axis_t_final': self.axis_t_final, 'dts': self.dts,
                'steps': self.steps, 'kind': self.kind, 'target': self.target, 'fingerprint': self.fingerprint,
                'instance_label': self.instance_label, 'config_base': self.config_base.to_dict(),
                'cells': [[c.to_dict() for c in row] for row in self.cells], 't_com': self.t_com}


def _run_identity(target: float, kind: str, seed: int, fingerprint: str) -> dict:
    return {'target': None if target is None else float(target), 'kind': kind, 'seed': int(seed),
            'config': fingerprint}


def _grid_row(key: dict, stats: SuccessStats, t_com: float, identity: dict) -> dict:
    return dict(key, reps=stats.n_rep, hits=stats.hit_count, p_s=stats.p_s, delta_p_s=stats.delta_p_s,
                mean_energy=stats.mean_energy, best_energy=stats.best_energy, mean_wall_time=t_com, **identity)


def sweep_fingerprint(instance: IsingInstance, cfg_base: SolverConfig, tuning: TuningResult,
                      varied: Sequence[str] = ('steps', 'a')) -> str:
    """ Short hash of everything a cell depends on besides its axes, seed and target.

    Covers the couplings, every SolverConfig field not in ``varied`` (seed and
    workers excluded, results do not depend on the worker count) and the tuning.
    """
    settings = {k: v for k, v in cfg_base.to_dict().items() if k not in set(varied) | {'seed', 'workers'}}
    src = tuning.source
    settings['tuning'] = {'c': tuning.c, 'dt': tuning.dt, 'd_t_factor': tuning.d_t_factor,
                          'lambda_max': src.lambda_max, 'lambda_min': src.lambda_min, 'method': src.method}
    digest = hashlib.sha1(np.ascontiguousarray(instance.couplings).tobytes())
    digest.update(json.dumps(settings, sort_keys=True).encode('utf-8'))
    return digest.hexdigest()[:16]


##
class CsvSink:
    """ Append-only CSV of finished cells, keyed by some of its columns.

    Every row carries the run identity (target, kind, master seed, config
    fingerprint); an existing file written under another identity is refused.
    """

    def __init__(self, path: Optional[str], columns: List[str], keys: List[str], identity: dict):
        self.path = path
        self.columns = columns
        self.keys = keys
        self.identity = identity
        self.done: Dict[tuple, dict] = {}
        if path and os.path.isfile(path) and os.path.getsize(path) > 0:
            frame = pd.read_csv(path, dtype={'kind': str, 'config': str})
            missing = set(columns) - set(frame.columns)
            if missing:
                raise ValueError(f"{path}: cannot resume, missing columns {sorted(missing)}")
            for row in frame.to_dict('records'):
                self._check_identity(row)
                self.done[self._key(row)] = row

    def _check_identity(self, row: dict):
        for name, want in self.identity.items():
            have = row[name]
            if name == 'target':
                same = math.isclose(float(have), want, rel_tol=1e-12, abs_tol=1e-12)
            elif name == 'seed':
                same = int(have) == want
            else:
                same = str(have) == str(want)
            if not same:
                raise ValueError(f"{self.path}: cannot resume, written with {name}={have!r} but this sweep has "
                                 f"{name}={want!r}; remove the file or choose another --csv")

    def _key(self, row: dict) -> tuple:
        return tuple(round(float(row[k]), 12) for k in self.keys)

    def lookup(self, **key) -> Optional[dict]:
        return self.done.get(self._key(key))

    def append(self, row: dict):
        self.done[self._key(row)] = row
        if not self.path:
            return
        header = not (os.path.isfile(self.path) and os.path.getsize(self.path) > 0)
        pd.DataFrame([row], columns=self.columns).to_csv(self.path, mode='a', header=header, index=False)


def _stats_from_row(row: dict, target: float) -> Tuple[SuccessStats, float]:
    stats = SuccessStats.from_counts(int(row['hits']), int(row['reps']), target,
                                     mean_energy=float(row['mean_energy']), best_energy=float(row['best_energy']))
    return stats, float(row['mean_wall_time'])


def _run_cell(instance, cfg, tuning, seeds, target, kind, workers) -> Tuple[SuccessStats, float]:
    results = run_replicas(instance, cfg, tuning, seeds, workers)
    stats = success_probability(results, target, kind)
    return stats, float(np.mean([r.wall_time for r in results]))


def sweep(instance: IsingInstance, m_values: Sequence[int], a_values: Sequence[float], reps: int,
          cfg_base: SolverConfig, tuning: TuningResult, target: float, kind: str = 'energy_min',
          workers: int = 1, out_csv: Optional[str] = None, visualizer=None, progress: bool = True) -> SweepGrid:
    """ Success probability over every (M, A) pair.

    Replica r of cell (i, j) runs with seed derive_seed(cfg_base.seed, i, j, r).

    Args:
        instance (IsingInstance): problem.
        m_values (Sequence[int]): M axis.
        a_values (Sequence[float]): A axis.
        reps (int): runs per cell.
        cfg_base (SolverConfig): every other solver setting.
        tuning (TuningResult): tuned c and dt.
        target (float): energy (energy_min) or cut (cut_max) counted as success.
        workers (int): concurrent replicas.
        out_csv (str): optional append-only CSV, also used to resume; rewritten in grid order at the end.
        visualizer (Visualizer): optional sink for per-cell progress.

    Raises:
        ValueError: empty axes, reps < 1, or an out_csv written by a sweep with another
            target, kind, master seed or config.

    Returns:
        SweepGrid: statistics per cell.
    """
    if not m_values or not a_values:
        raise ValueError("sweep axes must not be empty")
    if reps < 1:
        raise ValueError(f"reps must be at least 1, got {reps}")
    fingerprint = sweep_fingerprint(instance, cfg_base, tuning, varied=('steps', 'a'))
    identity = _run_identity(target, kind, cfg_base.seed, fingerprint)
    sink = CsvSink(out_csv, GRID_COLUMNS, ['m', 'a'], identity)
    cells = [[None] * len(a_values) for _ in m_values]
    t_com = [[None] * len(a_values) for _ in m_values]
    pairs = [(i, j) for i in range(len(m_values)) for j in range(len(a_values))]
    for i, j in tqdm(pairs, leave=False, total=len(pairs), disable=not progress, desc='sweep'):
        m, a = int(m_values[i]), float(a_values[j])
        row = sink.lookup(m=m, a=a)
        if row is not None and int(row['reps']) == reps:
            cells[i][j], t_com[i][j] = _stats_from_row(row, target)
            continue
        cfg = cfg_base.replace(steps=m, a=a)
        seeds = [derive_seed(cfg_base.seed, i, j, r) for r in range(reps)]
        cells[i][j], t_com[i][j] = _run_cell(instance, cfg, tuning, seeds, target, kind, workers)
        sink.append(_grid_row({'m': m, 'a': a}, cells[i][j], t_com[i][j], identity))
        if visualizer is not None:
            visualizer.print_current_cell({'m': m, 'a': a}, cells[i][j])
    grid = SweepGrid(axis_m=[int(m) for m in m_values], axis_a=[float(a) for a in a_values], cells=cells,
                     instance_label=instance.label, config_base=cfg_base, t_com=t_com, kind=kind,
                     target=float(target), fingerprint=fingerprint)
    if out_csv:
        write_grid_csv(grid, out_csv)
    return grid


def dt_sweep(instance: IsingInstance, d_t_values: Sequence[float], t_final_values: Sequence[float], a: float,
             reps: int, tuning: TuningResult, target: float, cfg_base: Optional[SolverConfig] = None,
             kind: str = 'energy_min', workers: int = 1, out_csv: Optional[str] = None, visualizer=None,
             progress: bool = True) -> DtSweepGrid:
    """ Success probability over time-step factors D_t and final times t_M.

    Each row uses dt = tune_dt(lambda_min, lambda_max, D_t) from the tuning's
    spectral estimate; each cell runs GbSB with M = round(t_M / dt) so the
    physical final time stays fixed along a column.

    Raises:
        ValueError: non-positive axis values, or a cell whose M rounds to 0.

    Returns:
        DtSweepGrid: statistics per cell.
    """
    if not d_t_values or not t_final_values:
        raise ValueError("sweep axes must not be empty")
    if any(not v > 0 for v in d_t_values) or any(not v > 0 for v in t_final_values):
        raise ValueError("D_t and t_M values must be positive")
    if reps < 1:
        raise ValueError(f"reps must be at least 1, got {reps}")
    cfg_base = (cfg_base or SolverConfig()).replace(variant='gbsb', a=a, dt=None)
    src = tuning.source
    dts = [tune_dt(src.lambda_min, src.lambda_max, d_t) for d_t in d_t_values]
    steps = [[int(round(t / dt)) for t in t_final_values] for dt in dts]
    for i, row in enumerate(steps):
        for j, m in enumerate(row):
            if m < 1:
                raise ValueError(f"t_M={t_final_values[j]} with dt={dts[i]:.6g} gives M=0")

    fingerprint = sweep_fingerprint(instance, cfg_base, tuning, varied=('steps',))
    identity = _run_identity(target, kind, cfg_base.seed, fingerprint)
    sink = CsvSink(out_csv, DT_GRID_COLUMNS, ['d_t', 't_final'], identity)
    cells = [[None] * len(t_final_values) for _ in d_t_values]
    t_com = [[None] * len(t_final_values) for _ in d_t_values]
    pairs = [(i, j) for i in range(len(d_t_values)) for j in range(len(t_final_values))]
    for i, j in tqdm(pairs, leave=False, total=len(pairs), disable=not progress, desc='dt sweep'):
        d_t, t_final = float(d_t_values[i]), float(t_final_values[j])
        row = sink.lookup(d_t=d_t, t_final=t_final)
        if row is not None and int(row['reps']) == reps:
            cells[i][j], t_com[i][j] = _stats_from_row(row, target)
            continue
        cell_tuning = TuningResult(c=tuning.c, dt=dts[i], d_t_factor=d_t, source=src)
        cfg = cfg_base.replace(steps=steps[i][j])
        seeds = [derive_seed(cfg_base.seed, i, j, r) for r in range(reps)]
        cells[i][j], t_com[i][j] = _run_cell(instance, cfg, cell_tuning, seeds, target, kind, workers)
        key = {'d_t': d_t, 't_final': t_final, 'dt': dts[i], 'm': steps[i][j]}
        sink.append(_grid_row(key, cells[i][j], t_com[i][j], identity))
        if visualizer is not None:
            visualizer.print_current_cell(key, cells[i][j])
    grid = DtSweepGrid(axis_d_t=[float(v) for v in d_t_values], axis_t_final=[float(v) for v in t_final_values],
                       dts=dts, steps=steps, cells=cells, instance_label=instance.label, config_base=cfg_base,
                       t_com=t_com, kind=kind, target=float(target), fingerprint=fingerprint)
    if out_csv:
        write_grid_csv(grid, out_csv)
    return grid


##
def environment(workers: int, precision: str) -> dict:
    return {'version': __version__, 'torch': torch.__version__, 'numpy': np.__version__,
            'workers': workers, 'arithmetic': precision}


def grid_summary(grid, path: str, tuning: TuningResult, target: float, workers: int, extra: dict = None):
    """ Final JSON summary of a sweep: the grid, its config echo and the environment. """
    doc = {'grid': grid.to_dict(), 'tuning': tuning.to_dict(), 'target': target,
           'environment': environment(workers, grid.config_base.precision)}
    doc.update(extra or {})
    with open(path, 'w') as file:
        json.dump(doc, file, indent=2)
    return doc


def write_grid_csv(grid, path: str):
    """ Whole grid as CSV in grid order, same columns as the streamed sweep output.

    Sweeps call this when they finish, which drops rows superseded by a rerun at another reps.
    """
    grid.to_frame().to_csv(path, index=False)


def read_grid_csv(path: str) -> pd.DataFrame:
    """ Grid CSV written by a sweep (streamed or whole), one row per finished cell. """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"grid file not found: {path}")
    frame = pd.read_csv(path, dtype={'kind': str, 'config': str})
    if not ({'m', 'a'} <= set(frame.columns) or {'d_t', 't_final'} <= set(frame.columns)):
        raise ValueError(f"{path}: not a sweep grid, columns are {list(frame.columns)}")
    return frame
