"""Shared fixtures: a few reference trajectories reused across modules."""

import pytest

from vines import SimState, SystemParams, coil_coefficient_from_relative
from vines.dynamics import simulate


@pytest.fixture(scope="session")
def closed_form_run():
    """Undamped host, free centered ball: first impact at tau = pi/6."""
    params = SystemParams(eps=0.05, lam=0.0, c_e=0.0, kappa=0.54, L_c=0.25)
    return simulate(params, SimState(0.0, 0.0, 0.5, 0.0, 0.0), 10.0)


@pytest.fixture(scope="session")
def signature_run():
    """The flagship strongly-modulated response configuration."""
    params = SystemParams(eps=0.05, lam=0.2,
                          c_e=coil_coefficient_from_relative(0.05, 0.05),
                          kappa=0.54, L_c=0.99)
    return simulate(params, SimState(0.0, 0.0, 0.5, 0.97, 0.0), 60.0)


@pytest.fixture(scope="session")
def conservative_run():
    """Elastic impacts, no damping or coil: energy is conserved."""
    params = SystemParams(eps=0.05, lam=0.0, c_e=0.0, kappa=1.0, L_c=1.0)
    return simulate(params, SimState(0.0, 0.0, 0.5, 0.97, 0.0), 30.0)
