import numpy as np
import pytest

from kcbs_optics.optics import optimal_family
from kcbs_optics.states import SinglePhotonState


@pytest.fixture(scope="session")
def family():
    return optimal_family()


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_photon(rng, modes=3):
    z = rng.normal(size=modes) + 1j * rng.normal(size=modes)
    return SinglePhotonState(z / np.linalg.norm(z))


def random_unitary(rng, modes=3):
    z = rng.normal(size=(modes, modes)) + 1j * rng.normal(size=(modes, modes))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
