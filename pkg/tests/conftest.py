import itertools

import numpy as np
import pytest

from graf.field import CostMatrix, Permutation


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_permutation(rng: np.random.Generator, n: int) -> Permutation:
    return Permutation.from_zero_based(rng.permutation(n))


def random_matrix(rng: np.random.Generator, n: int) -> CostMatrix:
    return CostMatrix(rng.standard_normal((n, n)))


def all_permutations(n: int):
    """Independent tiny-scale walk of the group (not the package's table)."""
    for perm in itertools.permutations(range(1, n + 1)):
        yield Permutation(perm)
