import math

import numpy as np
import pytest

from fermiline.model import Discretization, ModelParams, validate


@pytest.fixture
def rng():
    return np.random.default_rng(17)


def make_cfg(
    k_a=0.0225,
    k_b=0.0225,
    separation=math.pi,
    modes=64,
    omega_max=12.0,
    box_length=None,
    n_max=2,
    t_max=2 * math.pi,
    cutoff="sharp",
    omega_soft=None,
):
    """Small validated configuration for unit tests."""
    params = ModelParams(
        omega_a=1.0, omega_b=1.0, k_a=k_a, k_b=k_b, x_a=0.0, x_b=separation
    )
    if box_length is None:
        box_length = 2.0 * (separation + t_max) * 1.05
    disc = Discretization(
        modes=modes,
        omega_max=omega_max,
        box_length=box_length,
        n_max=n_max,
        t_max=t_max,
        cutoff=cutoff,
        omega_soft=omega_soft,
    )
    return validate(params, disc)
