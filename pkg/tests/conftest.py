import numpy as np
import pytest

from ctcsim.quantum import Alphabet, PureState
from ctcsim.sampling import random_pure


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


def zero_plus_alphabet() -> Alphabet:
    return Alphabet((PureState.basis(2, 0), PureState.normalized([1, 1])))


def random_alphabet(rng, n: int) -> Alphabet:
    while True:
        try:
            return Alphabet(tuple(random_pure(rng, n) for _ in range(n)))
        except ValueError:
            continue  # rare near-coincident draw
