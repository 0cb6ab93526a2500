""" Random streams.

Every random draw in the package comes from a NumPy ``Generator`` driven by the
counter-based Philox-4x64 bit generator, so a seed reproduces the same
trajectories on every platform NumPy supports.

Seed derivation
    ``derive_seed(master, *keys)`` feeds ``master`` as entropy and ``keys`` as
    the spawn key of a ``numpy.random.SeedSequence`` and returns its first
    64-bit word with the top bit cleared. Conventions used across the package:

    - sweep replica ``r`` of cell ``(i, j)``  -> ``derive_seed(master, i, j, r)``
    - batch replica ``r > 0``                  -> ``derive_seed(master, r)`` (replica 0 uses ``master``)
    - chaos repetition ``r`` of A index ``i``  -> ``derive_seed(master, i, r)``
"""

# pylint: disable=C0103

##
import numpy as np

SEED_MASK = (1 << 63) - 1


##
def make_generator(seed: int) -> np.random.Generator:
    """ Seeded Philox generator.

    Args:
        seed (int): non-negative seed.

    Returns:
        np.random.Generator: generator over a Philox bit generator.
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(seed))


def derive_seed(master: int, *keys: int) -> int:
    """ Derive a child seed from a master seed and an index path.

    Args:
        master (int): master seed.
        *keys (int): index path, e.g. (cell_row, cell_col, replica).

    Returns:
        int: 63-bit child seed.
    """
    if master < 0 or any(k < 0 for k in keys):
        raise ValueError("seeds and seed keys must be non-negative")
    sequence = np.random.SeedSequence(entropy=master, spawn_key=tuple(keys))
    # keep seeds within int64
    return int(sequence.generate_state(1, dtype=np.uint64)[0]) & SEED_MASK


def random_signs(rng: np.random.Generator, n: int) -> np.ndarray:
    """ n independent fair +1/-1 draws as float64. """
    return rng.integers(0, 2, size=n).astype(np.float64) * 2.0 - 1.0
