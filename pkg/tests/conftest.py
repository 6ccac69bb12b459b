from __future__ import annotations

import numpy as np
import pytest

from sapkit.pulse import HshParams

# Parameter envelope around the reference operating points (rad/us, us).
RANDOM_BOX = {
    "omega_max": (2.0, 4.0),
    "edge_shape_T": (0.3, 0.6),
    "edge_rate_r": (1.0, 3.0),
    "linear_rate_r1": (0.7, 3.0),
    "edge_duration_t1": (0.5, 1.0),
    "center_duration_t2": (3.0, 6.0),
}

PROFILE_A = HshParams(4.0, 0.5, 2.0, 2.0, 1.0, 4.0)


def random_params(rng: np.random.Generator) -> HshParams:
    return HshParams(**{k: float(rng.uniform(lo, hi)) for k, (lo, hi) in RANDOM_BOX.items()})


def random_sample(count: int, seed: int) -> list[HshParams]:
    rng = np.random.default_rng(seed)
    return [random_params(rng) for _ in range(count)]


@pytest.fixture
def profile_a() -> HshParams:
    return PROFILE_A


@pytest.fixture
def profile_b() -> HshParams:
    return HshParams.from_duration(2.0, 0.35, 1.2, 0.7, 1.0, 6.0)
