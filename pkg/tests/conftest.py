import os

os.environ.setdefault("ENVIRONMENT", "test")

import numpy as np
import pytest

from homsolve.core.monitoring import monitoring
from homsolve.logs.logging_config import reset_logging
from homsolve.models.scalar import Regime, Scalar
from homsolve.models.system import HomogeneousSystem, StateVector, enumerate_multi_indices
from homsolve.services.constraints import certify
from homsolve.services.generator import ScalarPool, random_solvable_instance


@pytest.fixture(autouse=True)
def clean_state():
    yield
    reset_logging()
    monitoring.clear_metrics()


@pytest.fixture
def hand_system():
    """z~1 = z1^2 + z1 z2 + z2^2, z~2 = 2 z1^2 + z2^2."""
    return HomogeneousSystem.from_flat(2, 2, [[1, 1, 1], [2, 0, 1]])


@pytest.fixture
def hand_z0():
    return StateVector.of([1, 1])


@pytest.fixture
def hand_instance(hand_system, hand_z0):
    return certify(hand_system, hand_z0, Scalar.exact(3), mode="hand")


@pytest.fixture
def exact_instance():
    return random_solvable_instance(3, 3, seed=11)


@pytest.fixture
def float_instance():
    return random_solvable_instance(2, 3, seed=5, regime=Regime.FLOAT)


def random_system(rng: np.random.Generator, n_vars: int, degree: int, regime: Regime = Regime.EXACT):
    pool = ScalarPool(rng, regime, 8)
    coeffs = {(n, mi): pool.draw() for n in range(1, n_vars + 1) for mi in enumerate_multi_indices(n_vars, degree)}
    return HomogeneousSystem(n_vars, degree, coeffs, regime), pool
