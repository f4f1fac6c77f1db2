import importlib.util

import numpy as np
import pytest

from symham import kernels

HAVE_CYTHON = importlib.util.find_spec("symham._ckernels") is not None
BACKENDS = ["python"] + (["cython"] if HAVE_CYTHON else [])

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0 + 0j, -1.0]),
}


def kron_string(letters, coefficient=1.0):
    """Reference matrix: explicit Kronecker product, site 1 leftmost."""
    m = np.array([[1.0 + 0j]])
    for a in letters:
        m = np.kron(m, PAULI[a])
    return coefficient * m


@pytest.fixture(params=BACKENDS)
def backend(request):
    return kernels.get_backend(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
