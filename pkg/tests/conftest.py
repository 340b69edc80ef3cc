import numpy as np
import pytest

from slitflow.conformal import disk_identity_map, epsilon_map, segment_map
from slitflow.kernels import VelocityEvaluator
from slitflow.transport import InitialVorticity, discretize


@pytest.fixture(scope="session")
def plate():
    return segment_map()


@pytest.fixture(scope="session")
def disk():
    return disk_identity_map()


@pytest.fixture(scope="session")
def thick():
    return epsilon_map(segment_map(), 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


# a small generic flow used all over: three vortices of mixed sign plus
# boundary circulation, evaluated with the exact kernel
GENERIC_POS = np.array([[0.3, 1.0], [-0.5, 0.8], [0.2, -1.3]])
GENERIC_STR = np.array([0.5, 0.3, -0.2])
GENERIC_GAMMA = 0.4


@pytest.fixture(scope="session")
def generic_flow(plate):
    alpha = GENERIC_GAMMA + GENERIC_STR.sum()
    return VelocityEvaluator(plate, GENERIC_POS, GENERIC_STR, alpha,
                             blob_radius=0.0)


@pytest.fixture(scope="session")
def bump():
    return InitialVorticity(center=(0.0, 1.0), radius=0.35, amplitude=5.0,
                            power=4)


@pytest.fixture(scope="session")
def coarse_sample(bump):
    return discretize(bump, 0.05)


def random_exterior_points(rng, n, r_lo=1.05, r_hi=4.0):
    """Plate-exterior points sampled in mapped polar coordinates, bounded
    away from the cut."""
    from slitflow.conformal import segment_map
    m = segment_map()
    r = rng.uniform(r_lo, r_hi, n)
    th = rng.uniform(0.0, 2.0 * np.pi, n)
    return m.inverse(r * np.exp(1j * th))
