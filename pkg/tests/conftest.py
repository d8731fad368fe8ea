"""
Shared fixtures: seeded generator, sample paths and small measures
"""

from pathlib import Path

import numpy as np
import pytest

from core.form_models import DiscretePSFM, WeightSequence
from core.random_models import make_rng

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


@pytest.fixture
def rng():
    return make_rng(20241017)


@pytest.fixture
def samples_dir() -> Path:
    return SAMPLES


@pytest.fixture
def two_atom() -> DiscretePSFM:
    """Atoms 0.25 and 0.75 on a one-dimensional space"""
    return DiscretePSFM.from_matrices([[[0.25]], [[0.75]]], labels=["a", "b"])


@pytest.fixture
def alpha_half_quarter() -> WeightSequence:
    return WeightSequence(np.array([0.5, 0.25]))
