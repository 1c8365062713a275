"""
Shared fixtures for the test suite.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add the repository root to the path so `src` imports resolve
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

SAMPLE_DIR = Path(__file__).resolve().parent.parent / "docs" / "sample_data"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sample_dir():
    return SAMPLE_DIR


def random_cvec(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)
