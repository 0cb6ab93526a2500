import numpy as np
import pytest

from lib.rng import derive_seed, make_generator, random_signs


def test_generator_reproducible():
    a = make_generator(12).uniform(size=5)
    b = make_generator(12).uniform(size=5)
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        make_generator(-1)


def test_derive_seed():
    assert derive_seed(3, 0, 1, 2) == derive_seed(3, 0, 1, 2)
    seeds = {derive_seed(3, i, j, r) for i in range(3) for j in range(3) for r in range(5)}
    assert len(seeds) == 45
    assert derive_seed(3, 1) != derive_seed(4, 1)
    assert all(0 <= s < 2 ** 63 for s in seeds)
    with pytest.raises(ValueError):
        derive_seed(3, -1)


def test_random_signs():
    signs = random_signs(make_generator(0), 1000)
    assert signs.dtype == np.float64
    assert set(np.unique(signs)) == {-1.0, 1.0}
