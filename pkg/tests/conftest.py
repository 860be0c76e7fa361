import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rxcoord import synth_planted


@pytest.fixture(scope="session")
def planted_small():
    """500-frame, 10-residue dataset with residue 4 carrying the signal."""
    return synth_planted(seed=11, n_frames=500, n_residues=10,
                         signal_residues=[4], noise_sigma=0.03)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
