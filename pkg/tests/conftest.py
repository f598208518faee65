import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"


def random_dict_pmf(rng, width, max_entries=None, sparse=True):
    """Random PMF as a dict, with a random subset of the 2**width outcomes."""
    n = 2 ** width
    size = n if not sparse else int(rng.integers(1, min(n, max_entries or n) + 1))
    codes = rng.choice(n, size=size, replace=False)
    w = rng.random(size) + 1e-3
    w /= w.sum()
    return {format(int(c), f"0{width}b"): float(v) for c, v in zip(codes, w)}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
