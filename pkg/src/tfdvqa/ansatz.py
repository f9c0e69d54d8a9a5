"""Product-of-Pauli-rotations ansatz ``U(theta) = prod_k exp(i theta_k R_k)``.

Generator ``R_1`` is applied first (innermost), ``R_N`` last.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._kernels import tangent_sweep
from .errors import ConfigError, ContractError, DimensionError
from .statevector import PauliSum, PauliTerm, StateVector, _apply_letters, _rotate, pauli_action


@dataclass(frozen=True)
class AnsatzCircuit:
    generators: tuple[PauliTerm, ...]
    n_qubits: int

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise ConfigError("ansatz needs at least one generator")
        for g in gens:
            if g.n_qubits != self.n_qubits:
                raise DimensionError(f"generator {g.letters} does not act on {self.n_qubits} qubits")
            if g.coefficient != 1.0:
                raise ContractError(f"generator {g.letters} must have unit coefficient")
        object.__setattr__(self, "generators", gens)

    @property
    def n_params(self) -> int:
        return len(self.generators)

    @property
    def letters(self) -> list[str]:
        return [g.letters for g in self.generators]

    def single_qubit_mask(self) -> np.ndarray:
        return np.array([len(g.support()) == 1 for g in self.generators])

    def gather_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-generator X masks and output phases for the compiled sweep."""
        cached = self.__dict__.get("_tables")
        if cached is None:
            xmasks = np.array([sum(1 << q for q, p in enumerate(g.letters) if p in "XY")
                               for g in self.generators], dtype=np.int64)
            phases = np.array([pauli_action(g.letters)[1] for g in self.generators])
            cached = (xmasks, phases)
            object.__setattr__(self, "_tables", cached)
        return cached

    def to_pauli_sum(self) -> PauliSum:
        return PauliSum(list(self.generators))

    def check_params(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.n_params:
            raise DimensionError(f"expected {self.n_params} parameters, got {theta.size}")
        return theta


def build_layered_ansatz(n_qubits: int, depth: int) -> AnsatzCircuit:
    """Layers of X and Z on every qubit followed by XX, YY, ZZ on every pair.

    Within a layer: X_0..X_{n-1}, Z_0..Z_{n-1}, then for each pair (i, j) with
    i < j in lexicographic order the three generators XX, YY, ZZ.
    """
    if n_qubits < 1:
        raise ConfigError(f"n_qubits must be >= 1, got {n_qubits}")
    if depth < 1:
        raise ConfigError(f"depth must be >= 1, got {depth}")
    layer = []
    for letter in "XZ":
        layer += [PauliTerm.from_sparse(n_qubits, {q: letter}) for q in range(n_qubits)]
    for i, j in combinations(range(n_qubits), 2):
        layer += [PauliTerm.from_sparse(n_qubits, {i: p, j: p}) for p in "XYZ"]
    return AnsatzCircuit(tuple(layer * depth), n_qubits)


def generator_count(n_qubits: int, depth: int) -> int:
    return depth * (2 * n_qubits + 3 * n_qubits * (n_qubits - 1) // 2)


def _check_initial(ansatz: AnsatzCircuit, initial: StateVector):
    if initial.n_qubits != ansatz.n_qubits:
        raise DimensionError(f"initial state has {initial.n_qubits} qubits, ansatz {ansatz.n_qubits}")


def prepare_state(ansatz: AnsatzCircuit, theta, initial: StateVector) -> StateVector:
    theta = ansatz.check_params(theta)
    _check_initial(ansatz, initial)
    amps = initial.amplitudes
    for g, t in zip(ansatz.generators, theta):
        if t != 0.0:
            amps = _rotate(amps, g.letters, t)
    return StateVector(amps)


def derivative_state(ansatz: AnsatzCircuit, theta, k: int, initial: StateVector) -> StateVector:
    """``d|psi(theta)>/d theta_k`` with ``k`` zero-based.

    Inserts ``i R_k`` right after the k-th rotation, which is exact because
    ``R_k`` commutes with its own exponential.
    """
    theta = ansatz.check_params(theta)
    _check_initial(ansatz, initial)
    if not 0 <= k < ansatz.n_params:
        raise IndexError(f"parameter index {k} out of range for {ansatz.n_params} parameters")
    amps = initial.amplitudes
    for idx, (g, t) in enumerate(zip(ansatz.generators, theta)):
        amps = _rotate(amps, g.letters, t)
        if idx == k:
            amps = 1j * _apply_letters(amps, g.letters)
    return StateVector(amps)


def tangent_vectors(ansatz: AnsatzCircuit, theta, initial: StateVector,
                    compiled: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(psi, D)`` with ``D[k] = d|psi>/d theta_k`` for every k.

    Single forward sweep: each rotation is applied once to the stack of all
    derivative vectors created so far, so the cost is O(N^2 * 2^n). The
    compiled kernel is used by default; ``compiled=False`` runs the same sweep
    with numpy gathers.
    """
    theta = ansatz.check_params(theta)
    _check_initial(ansatz, initial)
    # row 0 holds psi, row k+1 holds d psi / d theta_k
    work = np.empty((ansatz.n_params + 1, initial.amplitudes.size), dtype=np.complex128)
    work[0] = initial.amplitudes
    if compiled:
        xmasks, phases = ansatz.gather_tables()
        tangent_sweep(work, xmasks, phases, theta)
    else:
        for k, (g, t) in enumerate(zip(ansatz.generators, theta)):
            work[k + 1] = 1j * _apply_letters(work[0], g.letters)
            if t != 0.0:
                block = work[: k + 2]
                block[:] = _rotate(block, g.letters, t)
    return work[0].copy(), work[1:]
