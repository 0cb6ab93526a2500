""" Time evolution of the simulated-bifurcation oscillator network.

One step of bSB / dSB / GbSB, in this order:

    p-phase    p_i <- p_i - (1 - A x_i^2) p_i / (M - m)          (A = 0 for bSB, dSB)
    y-phase    y_i <- y_i - (p_i x_i - c sum_j J_ij g(x_j)) dt   (g = id, or sgn for dSB)
    x-phase    x_i <- x_i + y_i dt
    wall-phase if |x_i| > 1: x_i <- sgn(x_i), y_i <- 0

Every phase reads only the previous phase's output, so each one is a single
vectorized tensor operation.
"""

# pylint: disable=C0103,R0902,R0913,W0622

##
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import List, Optional, Tuple, Union

import numpy as np
import torch

from lib import __version__
from lib.ising import IsingInstance, SpinConfig, cut_value, ising_energy, signs_from_positions
from lib.rng import make_generator, random_signs
from lib.spectral import TuningResult

VARIANTS = ('bsb', 'dsb', 'gbsb')
INIT_MODES = ('uniform_random', 'chaos_probe')
PRECISIONS = ('fp64', 'fixed16')
CHAOS_PROBE_AMPLITUDE = 0.1
FIXED16_SCALE = 32767.0
BLOCK_ROWS = 256


class StepLimitError(ValueError):
    """ Stepping at or past the final step M. """


##
@dataclass(frozen=True)
class SolverConfig:
    """ Solver settings. ``dt`` and ``c`` left as None are filled from a TuningResult. """
    variant: str = 'gbsb'
    steps: int = 1000
    dt: Optional[float] = None
    c: Optional[float] = None
    a: float = 0.2
    seed: int = 0
    init_mode: str = 'uniform_random'
    sample_stride: int = 0
    track_best: bool = False
    precision: str = 'fp64'
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'variant', self.variant.lower())
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.steps < 1:
            raise ValueError(f"M must be at least 1, got {self.steps}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.c is not None and not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not self.a >= 0:
            raise ValueError(f"A must be non-negative, got {self.a}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"unknown init mode {self.init_mode!r}")
        if self.sample_stride < 0:
            raise ValueError(f"sample_stride must be non-negative, got {self.sample_stride}")
        if self.precision not in PRECISIONS:
            raise ValueError(f"unknown precision {self.precision!r}")
        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")

    @property
    def effective_a(self) -> float:
        """ A as used by the p-phase; bSB and dSB run the plain linear schedule. """
        return self.a if self.variant == 'gbsb' else 0.0

    def resolve(self, tuning: TuningResult) -> 'SolverConfig':
        """ Fill dt and c from the tuning unless explicitly set. """
        return replace(self,
                       dt=tuning.dt if self.dt is None else self.dt,
                       c=tuning.c if self.c is None else self.c)

    def replace(self, **changes) -> 'SolverConfig':
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolverState:
    """ Positions x, momenta y, bifurcation parameters p after m steps. """
    x: torch.Tensor
    y: torch.Tensor
    p: torch.Tensor
    m: int = 0

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def positions(self) -> np.ndarray:
        return self.x.numpy().copy()


@dataclass
class RunResult:
    """ Outcome of one run. """
    final_spins: SpinConfig
    energy: float
    cut: Optional[int]
    wall_time: float
    trajectory: Optional[List[Tuple[int, np.ndarray]]]
    config_echo: SolverConfig
    tuning_echo: TuningResult
    best_spins: Optional[SpinConfig] = None
    best_energy: Optional[float] = None
    extra: dict = field(default_factory=dict)


##
class Interaction:
    """ Local fields h = J g evaluated in fixed row blocks.

    Block boundaries depend only on ``block_rows``, never on ``workers``, so the
    result is the same for any number of worker threads.
    """

    def __init__(self, instance: IsingInstance, workers: int = 1, precision: str = 'fp64',
                 block_rows: int = BLOCK_ROWS):
        if precision not in PRECISIONS:
            raise ValueError(f"unknown precision {precision!r}")
        self.n = instance.n
        self.precision = precision
        self.J = torch.tensor(instance.couplings, dtype=torch.float64)
        self.bounds = [(s, min(s + block_rows, self.n)) for s in range(0, self.n, block_rows)]
        self.rows = [self.J[s:e] for s, e in self.bounds]
        self._pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 and len(self.bounds) > 1 else None

    def __call__(self, g: torch.Tensor) -> torch.Tensor:
        if g.shape[0] != self.n:
            raise ValueError(f"vector of length {g.shape[0]} does not match n={self.n}")
        if self.precision == 'fixed16':
            g = torch.round(g * FIXED16_SCALE) / FIXED16_SCALE
        out = torch.empty(self.n, dtype=torch.float64)

        def block(k):
            s, e = self.bounds[k]
            out[s:e] = torch.mv(self.rows[k], g)

        if self._pool is None:
            for k in range(len(self.bounds)):
                block(k)
        else:
            list(self._pool.map(block, range(len(self.bounds))))
        return out

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


##
def sgn(x: torch.Tensor) -> torch.Tensor:
    """ Sign with sgn(0) = +1. """
    return torch.where(x >= 0, torch.ones_like(x), -torch.ones_like(x))


def init_state(n: int, seed: int, mode: str = 'uniform_random') -> SolverState:
    """ Initial state: y = 0, p = 1, x uniform in (-1, 1) or +-0.1 with random sign.

    Args:
        n (int): number of oscillators.
        seed (int): generator seed.
        mode (str): 'uniform_random' or 'chaos_probe'.

    Returns:
        SolverState: state at m = 0.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = make_generator(seed)
    if mode == 'uniform_random':
        x = rng.uniform(-1.0, 1.0, size=n)
    elif mode == 'chaos_probe':
        x = CHAOS_PROBE_AMPLITUDE * random_signs(rng, n)
    else:
        raise ValueError(f"unknown init mode {mode!r}")
    return SolverState(x=torch.tensor(x, dtype=torch.float64),
                       y=torch.zeros(n, dtype=torch.float64),
                       p=torch.ones(n, dtype=torch.float64),
                       m=0)


def update_bifurcation(p, x, m: int, M: int, a: float):
    """ p - (1 - a x^2) p / (M - m); works on floats and tensors alike. """
    if not 0 <= m < M:
        raise StepLimitError(f"step index m={m} outside [0, M={M})")
    return p - (1.0 - a * x * x) * p / (M - m)


def update_momentum(y, x, p, local_field, c: float, dt: float):
    return y - (p * x - c * local_field) * dt


def update_position(x, y, dt: float):
    return x + y * dt


def apply_walls(x: torch.Tensor, y: torch.Tensor):
    """ Perfectly inelastic walls at +-1 (strict |x| > 1). Returns (x, y, fired mask). """
    hit = x.abs() > 1.0
    return torch.where(hit, sgn(x), x), torch.where(hit, torch.zeros_like(y), y), hit


def as_interaction(obj: Union[IsingInstance, Interaction], cfg: SolverConfig) -> Interaction:
    if isinstance(obj, Interaction):
        return obj
    return Interaction(obj, workers=1, precision=cfg.precision)


def step(state: SolverState, instance: Union[IsingInstance, Interaction], cfg: SolverConfig) -> SolverState:
    """ One full time-evolution step.

    Args:
        state (SolverState): state at step m.
        instance (IsingInstance | Interaction): couplings, or a prepared kernel.
        cfg (SolverConfig): resolved config (dt and c set).

    Raises:
        StepLimitError: state.m >= M.

    Returns:
        SolverState: state at step m + 1.
    """
    if state.m >= cfg.steps:
        raise StepLimitError(f"state is already at m={state.m} >= M={cfg.steps}")
    if cfg.dt is None or cfg.c is None:
        raise ValueError("config has no dt / c, resolve it against a TuningResult first")
    kernel = as_interaction(instance, cfg)
    if state.n != kernel.n:
        raise ValueError(f"state of size {state.n} does not match instance size {kernel.n}")

    p = update_bifurcation(state.p, state.x, state.m, cfg.steps, cfg.effective_a)
    g = sgn(state.x) if cfg.variant == 'dsb' else state.x
    y = update_momentum(state.y, state.x, p, kernel(g), cfg.c, cfg.dt)
    x = update_position(state.x, y, cfg.dt)
    x, y, _ = apply_walls(x, y)
    return SolverState(x=x, y=y, p=p, m=state.m + 1)


def sample_due(m: int, stride: int, steps: int) -> bool:
    """ Sampling points: every ``stride`` steps, always including m = 0 and m = M. """
    return stride > 0 and (m % stride == 0 or m == steps)


def run(instance: IsingInstance, cfg: SolverConfig, tuning: TuningResult) -> RunResult:
    """ Evolve from the seeded initial state for M steps and read out the spins.

    Args:
        instance (IsingInstance): problem.
        cfg (SolverConfig): solver settings; dt and c default to the tuning.
        tuning (TuningResult): tuned c and dt.

    Returns:
        RunResult: final spins, energy, cut (for MAX-CUT instances), timing and optional trajectory.
    """
    cfg = cfg.resolve(tuning)
    trajectory = [] if cfg.sample_stride > 0 else None
    best_spins, best_energy = None, None

    with Interaction(instance, workers=cfg.workers, precision=cfg.precision) as kernel:
        start = time.perf_counter()
        state = init_state(instance.n, cfg.seed, cfg.init_mode)
        for _ in range(cfg.steps + 1):
            if sample_due(state.m, cfg.sample_stride, cfg.steps):
                trajectory.append((state.m, state.positions()))
                if cfg.track_best:
                    spins = signs_from_positions(state.x.numpy())
                    energy = ising_energy(instance, spins)
                    if best_energy is None or energy < best_energy:
                        best_spins, best_energy = spins, energy
            if state.m == cfg.steps:
                break
            state = step(state, kernel, cfg)
        final_spins = signs_from_positions(state.x.numpy())
        wall_time = time.perf_counter() - start

    energy = ising_energy(instance, final_spins)
    if cfg.track_best and (best_energy is None or energy < best_energy):
        best_spins, best_energy = final_spins, energy
    cut = cut_value(instance.graph, final_spins) if instance.graph is not None else None
    return RunResult(final_spins=final_spins, energy=energy, cut=cut, wall_time=wall_time,
                     trajectory=trajectory, config_echo=cfg, tuning_echo=tuning,
                     best_spins=best_spins, best_energy=best_energy)


##
def encode_spins(spins: SpinConfig, rle: bool = False) -> list:
    """ Spins as a list, or run-length encoded as [[sign, count], ...]. """
    spins = [int(s) for s in spins]
    if not rle:
        return spins
    runs = []
    for s in spins:
        if runs and runs[-1][0] == s:
            runs[-1][1] += 1
        else:
            runs.append([s, 1])
    return runs


def decode_spins(encoded: list) -> SpinConfig:
    """ Inverse of ``encode_spins`` for either layout. """
    if encoded and isinstance(encoded[0], list):
        return np.concatenate([np.full(count, sign, dtype=np.int64) for sign, count in encoded])
    return np.asarray(encoded, dtype=np.int64)


def run_manifest(result: RunResult, instance: IsingInstance = None, rle: bool = False) -> dict:
    """ JSON-ready description of a run, enough to reproduce it. """
    manifest = {
        'version': __version__,
        'instance': None if instance is None else {'label': instance.label, 'n': instance.n},
        'config': result.config_echo.to_dict(),
        'tuning': result.tuning_echo.to_dict(),
        'seed': result.config_echo.seed,
        'energy': result.energy,
        'cut': result.cut,
        'wall_time': result.wall_time,
        'spins_encoding': 'rle' if rle else 'plain',
        'spins': encode_spins(result.final_spins, rle),
    }
    if result.best_energy is not None:
        manifest['best_energy'] = result.best_energy
    manifest.update(result.extra)
    return manifest
