"""Shared fixtures: small seeded recovery problems."""
from __future__ import annotations

import pytest

from src.onebit.model.signal_model import generate_signal, make_ensemble
from src.onebit.recover.biht import RecoveryConfig
from utils.seeding import substream


@pytest.fixture
def small_problem():
    """n=64, k=4, m=48 instance drawn from a fixed substream."""
    rng = substream(123, (48, 0, 0))
    signal = generate_signal(64, 4, rng)
    return signal, make_ensemble(48, signal, rng)


@pytest.fixture
def fast_cfg():
    return RecoveryConfig(tau=0.01, k=4, max_iters=200, tol=1e-10)
