"""Shared fixtures: the canonical potentials and their (expensive) solves.

Session-scoped so the acceptance suite and the module tests share one
spectral solve and one stepped kernel per potential.
"""
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from heatcone.evolution import default_snapshot_ladder, evolve
from heatcone.potentials import Potential, make_bump, make_square_well
from heatcone.spectral import ground_state

PROBE_TIMES = (2.0, 4.0, 6.0, 10.0)


@pytest.fixture(scope="session")
def well():
    return make_square_well(1, 2.0, 1.0)


@pytest.fixture(scope="session")
def bump1d():
    return make_bump(1, 2.0, 1.0)


@pytest.fixture(scope="session")
def zero_potential():
    return Potential(dim=1,
                     evaluate=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                     support_radius=1.0, smoothness="Cinf",
                     max_value=0.0, min_value=0.0)


@pytest.fixture(scope="session")
def well_spectral(well):
    return ground_state(well)


@pytest.fixture(scope="session")
def well_spectral_40(well):
    return ground_state(well, domain_radius=40.0)


@pytest.fixture(scope="session")
def bump_spectral(bump1d):
    return ground_state(bump1d)


@pytest.fixture(scope="session")
def well_kernel(well):
    ladder = default_snapshot_ladder(1e-3, 1e-3, 16.0, extra=PROBE_TIMES)
    return evolve(well, [0.0], t_max=16.0, dt=1e-3, snap_times=ladder)


@pytest.fixture(scope="session")
def bump_kernel(bump1d):
    ladder = default_snapshot_ladder(1e-3, 1e-3, 4.0)
    return evolve(bump1d, [0.0], t_max=4.0, dt=1e-3, snap_times=ladder)
