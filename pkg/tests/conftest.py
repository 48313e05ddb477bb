import numpy as np
import pytest

from moosolver import GameParams, build_tables
from moosolver.solver import make_engine

REDUCED = [
    GameParams(4, 2),
    GameParams(5, 2),
    GameParams(6, 2),
    GameParams(4, 3),
    GameParams(5, 3),
    GameParams(6, 3),
]

SMALL_REDUCED = REDUCED[:4]


@pytest.fixture(scope="session")
def tables():
    return build_tables()


@pytest.fixture(scope="session")
def engine():
    return make_engine()


@pytest.fixture(scope="session")
def full_indices(tables):
    return np.arange(tables.space_size, dtype=np.int32)


def random_subsets(space_size, count, rng_seed=20260810, min_size=2):
    rng = np.random.default_rng(rng_seed)
    for _ in range(count):
        k = int(rng.integers(min_size, space_size + 1))
        yield np.sort(
            rng.choice(space_size, size=k, replace=False)
        ).astype(np.int32)
