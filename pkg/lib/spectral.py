"""
Spectral estimates of J and the solver parameters derived from them.

    c  = 1 / lambda_max
    dt = D_t * sqrt(2 / (1 - lambda_min / lambda_max))

lambda_max and lambda_min come either from shifted power iteration on J, from
the semicircle estimate +-2 sqrt(N) sigma, or from a dense eigensolver.
"""

# pylint: disable=C0103,R0913

##
import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
import torch

from lib.ising import IsingInstance

DEFAULT_TOL = 1e-6
DEFAULT_D_T = 1.25
EXACT_MAX_N = 4096
METHODS = ('power_iteration', 'wigner', 'exact_small')


class ConvergenceError(RuntimeError):
    """ Power iteration did not settle within the iteration budget.

    ``estimate`` is the last SpectralEstimate reached, flagged ``converged=False``.
    """
    def __init__(self, message: str, estimate: 'SpectralEstimate'):
        super().__init__(message)
        self.estimate = estimate
        self.iterations = estimate.iterations


class StabilityWarning(UserWarning):
    """ Time step at or above the symplectic-Euler stability bound. """


@dataclass(frozen=True)
class SpectralEstimate:
    """ Extreme eigenvalues of J. """
    lambda_max: float
    lambda_min: float
    method: str
    tolerance: float
    residual: float = 0.0
    iterations: int = 0
    converged: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown spectral method {self.method!r}")
        if not self.converged:
            # partial estimate attached to a ConvergenceError, signs not guaranteed yet
            return
        if not self.lambda_max > 0:
            raise ValueError(f"lambda_max must be positive, got {self.lambda_max}")
        if not self.lambda_min < 0:
            raise ValueError(f"lambda_min must be negative, got {self.lambda_min}")


@dataclass(frozen=True)
class TuningResult:
    """ Coupling scale c and time step dt for one instance. """
    c: float
    dt: float
    d_t_factor: float
    source: SpectralEstimate

    def __post_init__(self):
        if not (self.c > 0 and self.dt > 0):
            raise ValueError(f"c and dt must be positive, got c={self.c}, dt={self.dt}")

    def to_dict(self) -> dict:
        return asdict(self)


##
def _normalize(v: torch.Tensor) -> torch.Tensor:
    return v / v.norm()


def power_iteration(matmul: Callable[[torch.Tensor], torch.Tensor], v0: torch.Tensor, shift: float,
                    tol: float, maxiter: int):
    """ Dominant eigenpair of (A + shift I) for symmetric A given by ``matmul``.

    Stops when the Rayleigh quotient of A changes by at most ``tol * shift``
    between two iterations.

    Returns:
        (eigval, eigvec, iterations, converged): Rayleigh quotient of A, unit
        eigenvector, iterations used, and whether the stop rule was met within ``maxiter``.
    """
    v = _normalize(v0)
    av = matmul(v)
    eigval = float(v @ av)
    for it in range(1, maxiter + 1):
        w = av + shift * v
        norm = float(w.norm())
        if norm == 0.0:
            # v lies in the eigenspace of -shift, nothing left to iterate on
            return eigval, v, it, True
        v = w / norm
        av = matmul(v)
        new_eigval = float(v @ av)
        if abs(new_eigval - eigval) <= tol * shift:
            return new_eigval, v, it, True
        eigval = new_eigval
    return eigval, v, maxiter, False


def _dominant(J: torch.Tensor, sign: float, beta: float, tol: float, maxiter: int):
    """ Largest eigenvalue of sign * J, restarting from a perturbed vector on stagnation. """
    n = J.shape[0]

    def matmul(v):
        return sign * torch.mv(J, v)

    ones = torch.ones(n, dtype=torch.float64)
    eigval, vec, its, converged = power_iteration(matmul, ones, beta, tol, maxiter)
    if converged and eigval <= tol * beta:
        # all-ones was (close to) an eigenvector of a non-dominant eigenvalue
        perturbation = torch.cos(torch.arange(n, dtype=torch.float64) * 2.399963229728653)
        eigval, vec, more, converged = power_iteration(matmul, ones + perturbation, beta, tol, maxiter)
        its += more
    residual = float((matmul(vec) - eigval * vec).norm())
    return eigval, its, residual, converged


def extreme_eigenvalues(instance: IsingInstance, tol: float = DEFAULT_TOL, max_iters: Optional[int] = None,
                        method: str = 'power_iteration') -> SpectralEstimate:
    """ Largest and smallest eigenvalues of J.

    Power iteration runs on J + beta I and -J + beta I with beta the largest
    absolute row sum of J, which makes both shifted matrices positive
    semidefinite so the dominant eigenvalue is the wanted end of the spectrum.

    Args:
        instance (IsingInstance): n >= 2, J not all zero.
        tol (float): relative tolerance on the Rayleigh quotient.
        max_iters (int): iteration budget per end of the spectrum, default 10 n.
        method (str): 'power_iteration' or 'exact_small'.

    Raises:
        ValueError: invalid arguments or all-zero couplings.
        ConvergenceError: budget exhausted, carries the last estimate.

    Returns:
        SpectralEstimate: the two eigenvalues.
    """
    n = instance.n
    if n < 2:
        raise ValueError(f"spectral estimate needs n >= 2, got {n}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    J = torch.tensor(instance.couplings, dtype=torch.float64)
    beta = float(J.abs().sum(dim=1).max())
    if beta == 0.0:
        raise ValueError("couplings are all zero, the spectrum is degenerate")

    if method == 'exact_small':
        if n > EXACT_MAX_N:
            raise ValueError(f"exact eigensolver limited to n <= {EXACT_MAX_N}, got {n}")
        eigvals = torch.linalg.eigvalsh(J)
        return SpectralEstimate(float(eigvals[-1]), float(eigvals[0]), 'exact_small', tol)
    if method != 'power_iteration':
        raise ValueError(f"unknown spectral method {method!r}")

    max_iters = 10 * n if max_iters is None else max_iters
    lam_max, its_max, res_max, ok_max = _dominant(J, 1.0, beta, tol, max_iters)
    neg_min, its_min, res_min, ok_min = _dominant(J, -1.0, beta, tol, max_iters)
    estimate = SpectralEstimate(lambda_max=lam_max, lambda_min=-neg_min, method='power_iteration', tolerance=tol,
                                residual=max(res_max, res_min), iterations=its_max + its_min,
                                converged=ok_max and ok_min)
    if not estimate.converged:
        raise ConvergenceError(f"power iteration exceeded {max_iters} iterations per end of the spectrum", estimate)
    return estimate


def coupling_sigma(instance: IsingInstance) -> float:
    """ Sample standard deviation of the off-diagonal couplings.

    Dense +-1 instances are unit-variance by construction and get sigma = 1 exactly.
    """
    if instance.is_dense_pm1:
        return 1.0
    n = instance.n
    off = instance.couplings[~np.eye(n, dtype=bool)]
    return float(np.std(off, ddof=1)) if off.size > 1 else 0.0


def wigner_estimate(n: int, sigma: float) -> float:
    """ Semicircle-law estimate lambda_max = 2 sqrt(n) sigma (lambda_min is its negation). """
    if n < 2:
        raise ValueError(f"wigner estimate needs n >= 2, got {n}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return 2.0 * math.sqrt(n) * sigma


def wigner_spectrum(instance: IsingInstance) -> SpectralEstimate:
    sigma = coupling_sigma(instance)
    if sigma == 0.0:
        raise ValueError("off-diagonal couplings have zero spread, no semicircle estimate")
    lam = wigner_estimate(instance.n, sigma)
    return SpectralEstimate(lambda_max=lam, lambda_min=-lam, method='wigner', tolerance=0.0)


def tune_c(instance: IsingInstance, mode: str = 'wigner', tol: float = DEFAULT_TOL,
           max_iters: Optional[int] = None) -> float:
    """ Coupling scale c = 1 / lambda_max.

    Args:
        instance (IsingInstance): couplings, not all zero.
        mode (str): 'wigner' (semicircle estimate) or 'numerical' (power iteration).

    Returns:
        float: c.
    """
    if mode == 'wigner':
        return 1.0 / wigner_spectrum(instance).lambda_max
    if mode == 'numerical':
        return 1.0 / extreme_eigenvalues(instance, tol, max_iters).lambda_max
    raise ValueError(f"unknown tuning mode {mode!r}")


def stability_bound(lambda_min: float, lambda_max: float) -> float:
    """ Largest stable time step 2 / sqrt(1 - lambda_min / lambda_max), exclusive. """
    if not lambda_max > 0:
        raise ValueError(f"lambda_max must be positive, got {lambda_max}")
    if not lambda_min < 0:
        raise ValueError(f"lambda_min must be negative, got {lambda_min}")
    return 2.0 / math.sqrt(1.0 - lambda_min / lambda_max)


def oscillator_stable(k: float, dt: float) -> bool:
    """ Symplectic Euler keeps a unit-mass oscillator with spring constant k bounded iff dt < 2 / sqrt(k). """
    if not k > 0:
        raise ValueError(f"spring constant must be positive, got {k}")
    return dt < 2.0 / math.sqrt(k)


def tune_dt(lambda_min: float, lambda_max: float, d_t_factor: float = DEFAULT_D_T) -> float:
    """ Time step dt = D_t sqrt(2 / (1 - lambda_min / lambda_max)).

    Warns with ``StabilityWarning`` when dt reaches the stability bound, i.e. D_t >= sqrt(2).
    """
    if not d_t_factor > 0:
        raise ValueError(f"D_t must be positive, got {d_t_factor}")
    bound = stability_bound(lambda_min, lambda_max)
    dt = d_t_factor * math.sqrt(2.0 / (1.0 - lambda_min / lambda_max))
    if dt >= bound:
        warnings.warn(f"dt={dt:.6g} is not below the stability bound {bound:.6g} (D_t={d_t_factor})",
                      StabilityWarning, stacklevel=2)
    return dt


def tune(instance: IsingInstance, mode: str = 'auto', d_t_factor: float = DEFAULT_D_T,
         tol: float = DEFAULT_TOL, max_iters: Optional[int] = None) -> TuningResult:
    """ c and dt for an instance.

    Args:
        instance (IsingInstance): couplings.
        mode (str): 'wigner', 'numerical', 'exact' or 'auto' (wigner for dense +-1 instances, numerical otherwise).
        d_t_factor (float): D_t.

    Returns:
        TuningResult: tuned parameters with the spectral estimate they came from.
    """
    if mode == 'auto':
        mode = 'wigner' if instance.is_dense_pm1 else 'numerical'
    if mode == 'wigner':
        source = wigner_spectrum(instance)
    elif mode == 'numerical':
        source = extreme_eigenvalues(instance, tol, max_iters)
    elif mode == 'exact':
        source = extreme_eigenvalues(instance, tol, max_iters, method='exact_small')
    else:
        raise ValueError(f"unknown tuning mode {mode!r}")
    dt = tune_dt(source.lambda_min, source.lambda_max, d_t_factor)
    return TuningResult(c=1.0 / source.lambda_max, dt=dt, d_t_factor=d_t_factor, source=source)
