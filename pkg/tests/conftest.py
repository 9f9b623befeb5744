import numpy as np
import pytest

from qheatflow.properties import (
    random_rotations,
    random_system_and_unitary,
    random_two_qubit_system,
    random_two_qutrit_system,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture(scope="session")
def qubit_ensemble():
    """500 coherent locally-thermal two-qubit instances with exchange unitaries."""
    gen = np.random.default_rng(101)
    out = []
    for _ in range(500):
        sys, u, rots = random_system_and_unitary(gen, 2)
        out.append((sys, u, rots))
    return out


@pytest.fixture(scope="session")
def qutrit_ensemble():
    """200 coherent two-qutrit instances with exchange unitaries."""
    gen = np.random.default_rng(202)
    out = []
    for _ in range(200):
        sys, u, rots = random_system_and_unitary(gen, 3)
        out.append((sys, u, rots))
    return out
