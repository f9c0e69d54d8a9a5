"""Shared fixtures and small dense helpers written independently of the package."""
from functools import reduce

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


def dense(letters: str) -> np.ndarray:
    """Matrix of a Pauli string with qubit 0 as the least-significant bit."""
    return reduce(np.kron, [SINGLE[p] for p in reversed(letters)])


def dense_sum(op) -> np.ndarray:
    return sum(t.coefficient * dense(t.letters) for t in op.terms)


def expm_i(theta: float, letters: str) -> np.ndarray:
    """``exp(i theta P)`` from the spectral decomposition of the dense matrix."""
    w, v = np.linalg.eigh(dense(letters))
    return (v * np.exp(1j * theta * w)) @ v.conj().T


def random_state(rng, n: int) -> np.ndarray:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
