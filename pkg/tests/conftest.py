import pytest
from hypothesis import HealthCheck, settings

from usc_laser import SystemParams, multistart_solve

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# the reference parameter set: g~ = 0.15, kappa = 0.01, gamma_down = 0.05,
# gamma_phi = 0.1, all in units of the atomic frequency
BASE = SystemParams()


@pytest.fixture(scope="session")
def base():
    return BASE


@pytest.fixture(scope="session")
def onset_root():
    """Lasing root at wc = wa, pump 0.05, Coulomb gauge."""
    p = BASE.replace(wc=1.0, z_pump=0.05)
    return p, multistart_solve(p, "coulomb")[0]


@pytest.fixture(scope="session")
def bistable_roots():
    """All roots at wc = 0.25 wa, pump 0.3, Coulomb gauge."""
    p = BASE.replace(wc=0.25, z_pump=0.3)
    return p, multistart_solve(p, "coulomb")
