import os

import numpy as np
import pytest
from hypothesis import settings

from noisy_pst.harness.config import load_config
from noisy_pst.harness.runner import compute_sweeps

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def experiments():
    """Sweeps of the four bundled experiments, computed once per session."""
    names = ["exp1", "exp2", "exp3", "exp4"]
    configs = [load_config(n) for n in names]
    return dict(zip(["noiseless", "depolarizing", "positive", "negative"], compute_sweeps(configs)))
