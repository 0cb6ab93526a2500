""" Ising instances and MAX-CUT graphs.

Energy convention: E(s) = -1/2 sum_i sum_j J_ij s_i s_j with J symmetric and
zero on the diagonal. A MAX-CUT graph with weights w maps to J_ij = -w_ij, and
then 2 * cut(s) + E(s) equals the total edge weight.
"""

# pylint: disable=C0103,R0902

##
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from lib.rng import make_generator, random_signs

Edge = Tuple[int, int, int]
SpinConfig = np.ndarray

BRUTE_FORCE_MAX_N = 24


##
def edge_error(n: int, edges: Sequence[Edge]) -> Optional[Tuple[int, str]]:
    """ Locate the first invalid edge.

    Args:
        n (int): vertex count.
        edges (Sequence[Edge]): (i, j, w) triples, 0-based.

    Returns:
        Optional[Tuple[int, str]]: (position, reason) of the first bad edge, None if all valid.
    """
    seen = set()
    for pos, (i, j, _) in enumerate(edges):
        if not (0 <= i < n and 0 <= j < n):
            return pos, f"vertex index out of range for n={n}: ({i}, {j})"
        if i == j:
            return pos, f"self-loop on vertex {i}"
        key = (min(i, j), max(i, j))
        if key in seen:
            return pos, f"duplicate edge ({key[0]}, {key[1]})"
        seen.add(key)
    return None


@dataclass(frozen=True)
class CutGraph:
    """ Undirected integer-weighted graph for MAX-CUT, 0-based vertices. """
    n: int
    edges: Tuple[Edge, ...]
    label: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, 'edges', tuple((int(i), int(j), int(w)) for i, j, w in self.edges))
        if self.n < 1:
            raise ValueError(f"graph needs at least one vertex, got n={self.n}")
        bad = edge_error(self.n, self.edges)
        if bad is not None:
            raise ValueError(f"edge {bad[0]}: {bad[1]}")

    @property
    def total_weight(self) -> int:
        return sum(w for _, _, w in self.edges)


@dataclass(frozen=True, eq=False)
class IsingInstance:
    """ Symmetric, zero-diagonal coupling matrix J (dense, float64, read-only).

    ``graph`` is set when the instance was built from a MAX-CUT graph, so runs
    can report cut values alongside energies.
    """
    couplings: np.ndarray
    label: Optional[str] = None
    graph: Optional[CutGraph] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        J = np.array(self.couplings, dtype=np.float64)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ValueError(f"couplings must be a square matrix, got shape {J.shape}")
        if J.shape[0] < 1:
            raise ValueError("instance needs at least one spin")
        if not np.all(np.isfinite(J)):
            raise ValueError("couplings must be finite")
        if not np.array_equal(J, J.T):
            raise ValueError("couplings must be symmetric")
        if np.any(np.diag(J) != 0):
            raise ValueError("couplings must have a zero diagonal")
        J.flags.writeable = False
        object.__setattr__(self, 'couplings', J)

    @property
    def n(self) -> int:
        return self.couplings.shape[0]

    @property
    def is_integral(self) -> bool:
        return bool(np.all(self.couplings == np.round(self.couplings)))

    @property
    def is_dense_pm1(self) -> bool:
        """ True when every off-diagonal entry is +1 or -1. """
        off = self.couplings[~np.eye(self.n, dtype=bool)]
        return off.size > 0 and bool(np.all(np.abs(off) == 1))

    def adjacency(self) -> List[List[Tuple[int, float]]]:
        """ Sparse adjacency-list view: row i lists (j, J_ij) for J_ij != 0. """
        rows = []
        for i in range(self.n):
            nz = np.nonzero(self.couplings[i])[0]
            rows.append([(int(j), float(self.couplings[i, j])) for j in nz])
        return rows


##
def check_spins(s, n: int) -> SpinConfig:
    """ Validate a spin vector of length n with entries in {+1, -1}. """
    s = np.asarray(s)
    if s.ndim != 1 or s.shape[0] != n:
        raise ValueError(f"spin vector of length {s.shape[0] if s.ndim == 1 else s.shape} does not match n={n}")
    if not np.all(np.abs(s) == 1):
        raise ValueError("spins must be +1 or -1")
    return s.astype(np.int64)


def ising_energy(instance: IsingInstance, s) -> float:
    """ Ising energy E = -1/2 s^T J s.

    Args:
        instance (IsingInstance): couplings.
        s (array-like): spin configuration.

    Returns:
        float: energy.
    """
    s = check_spins(s, instance.n).astype(np.float64)
    return float(-0.5 * (s @ instance.couplings @ s))


def cut_value(graph: CutGraph, s) -> int:
    """ Total weight of edges whose endpoints carry opposite spins. """
    s = check_spins(s, graph.n)
    if not graph.edges:
        return 0
    e = np.asarray(graph.edges, dtype=np.int64)
    crossing = s[e[:, 0]] != s[e[:, 1]]
    return int(e[crossing, 2].sum())


def maxcut_to_ising(graph: CutGraph) -> IsingInstance:
    """ Ising instance with J_ij = J_ji = -w_ij, so that minimizing E maximizes the cut. """
    bad = edge_error(graph.n, graph.edges)
    if bad is not None:
        raise ValueError(f"edge {bad[0]}: {bad[1]}")
    J = np.zeros((graph.n, graph.n), dtype=np.float64)
    for i, j, w in graph.edges:
        J[i, j] = J[j, i] = -w
    return IsingInstance(J, label=graph.label, graph=graph)


def gen_random_dense(n: int, seed: int) -> IsingInstance:
    """ All-to-all instance with independent fair +1/-1 couplings.

    Args:
        n (int): number of spins, at least 2.
        seed (int): generator seed.

    Returns:
        IsingInstance: deterministic in (n, seed).
    """
    if n < 2:
        raise ValueError(f"dense instance needs n >= 2, got {n}")
    rng = make_generator(seed)
    iu = np.triu_indices(n, k=1)
    J = np.zeros((n, n), dtype=np.float64)
    J[iu] = random_signs(rng, iu[0].size)
    J = J + J.T
    return IsingInstance(J, label=f"dense{n}_seed{seed}")


def signs_from_positions(x) -> SpinConfig:
    """ s_i = sgn(x_i) with sgn(0) = +1. """
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0, 1, -1).astype(np.int64)


def brute_force_ground_state(instance: IsingInstance, chunk: int = 1 << 14) -> Tuple[SpinConfig, float]:
    """ Exhaustive ground state for small instances.

    Configurations are enumerated as integers whose most significant bit is s_0
    (bit 0 -> +1, bit 1 -> -1), so the first minimum found is the
    lexicographically smallest one with +1 < -1.

    Args:
        instance (IsingInstance): at most 24 spins.
        chunk (int): configurations evaluated per block.

    Returns:
        Tuple[SpinConfig, float]: ground state and its energy.
    """
    n = instance.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    J = instance.couplings
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    best_k, best_e = 0, np.inf
    for start in range(0, 1 << n, chunk):
        k = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        S = 1.0 - 2.0 * ((k[:, None] >> shifts) & 1)
        energies = -0.5 * np.sum((S @ J) * S, axis=1)
        idx = int(np.argmin(energies))
        if energies[idx] < best_e:
            best_k, best_e = int(k[idx]), float(energies[idx])
    spins = (1 - 2 * ((best_k >> shifts) & 1)).astype(np.int64)
    return spins, ising_energy(instance, spins)
