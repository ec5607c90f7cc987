import random

import pytest
from hypothesis import settings

from permatch.core import RationalMatrix

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def random_int_matrix(rng: random.Random, n: int, choices=range(10), cols: int | None = None) -> RationalMatrix:
    return RationalMatrix.from_rows([[rng.choice(choices) for _ in range(cols or n)] for _ in range(n)])


@pytest.fixture
def rng():
    return random.Random(20240611)
