"""Exact dense-matrix reference calculations.

Nothing here touches the ansatz or the variational flows, so a disagreement
between an oracle value and a variational one always points at the latter.
Matrices use the same qubit ordering as :mod:`tfdvqa.statevector` (qubit 0 is
the least-significant bit), assembled independently by Kronecker products.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DimensionError, RefinementRequiredError
from .statevector import PauliSum

DENSE_QUBIT_CAP = 12

_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass
class DenseOperator:
    matrix: np.ndarray
    n_qubits: int

    def __post_init__(self):
        dim = self.matrix.shape[0]
        if self.matrix.shape != (dim, dim) or dim != 2**self.n_qubits:
            raise DimensionError(f"matrix of shape {self.matrix.shape} is not 2^{self.n_qubits} square")

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, atol=atol, rtol=0))


def to_dense(p: PauliSum, cap: int = DENSE_QUBIT_CAP) -> DenseOperator:
    n = p.n_qubits
    if n > cap:
        raise ContractError(f"{n} qubits exceeds the dense cap of {cap}")
    mat = np.zeros((2**n, 2**n), dtype=np.complex128)
    for term in p.terms:
        # letters[0] is qubit 0 = least significant, i.e. the rightmost Kronecker factor
        block = np.array([[1.0 + 0j]])
        for letter in reversed(term.letters):
            block = np.kron(block, _PAULI[letter])
        mat += term.coefficient * block
    return DenseOperator(mat, n)


def _matrix(op) -> np.ndarray:
    if isinstance(op, PauliSum):
        return to_dense(op).matrix
    if isinstance(op, DenseOperator):
        return op.matrix
    return np.asarray(op, dtype=np.complex128)


def _check_hermitian(mat: np.ndarray, what: str):
    if not np.allclose(mat, mat.conj().T, atol=1e-10, rtol=0):
        raise ContractError(f"{what} must be Hermitian")


def expm_hermitian(h: np.ndarray, factor: complex) -> np.ndarray:
    """``exp(factor * h)`` for Hermitian ``h`` via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(factor * w)) @ v.conj().T


def identity_purification(n_physical: int) -> np.ndarray:
    """``sum_b |b>|b> / sqrt(2^n)`` with the fictitious copy in the high bits."""
    d = 2**n_physical
    psi = np.zeros(d * d, dtype=np.complex128)
    psi[np.arange(d) * (d + 1)] = 1.0 / np.sqrt(d)
    return psi


def reduce_to_physical(psi: np.ndarray, n_physical: int) -> np.ndarray:
    d = 2**n_physical
    m = psi.reshape(d, d)  # [fictitious, physical]
    return m.T @ m.conj()


def gibbs_state(H, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(rho_eq, |O(beta)>)``.

    ``|O(beta)>`` is the normalized ``(exp(-beta H / 2) (x) 1)|I>`` on the block
    layout ``[physical][fictitious]``.
    """
    h = _matrix(H)
    _check_hermitian(h, "Hamiltonian")
    n = int(round(np.log2(h.shape[0])))
    w, v = np.linalg.eigh(h)
    # shift by the ground energy so large beta does not overflow
    weights = np.exp(-beta * (w - w.min()))
    rho = (v * (weights / weights.sum())) @ v.conj().T
    half = (v * np.exp(-0.5 * beta * (w - w.min()))) @ v.conj().T
    d = h.shape[0]
    tfd = np.kron(np.eye(d), half) @ identity_purification(n)
    tfd /= np.linalg.norm(tfd)
    return rho, tfd


def evolve_lvn(H_of_t, rho0, t_grid, substeps: int = 20) -> np.ndarray:
    """Propagate ``i d rho/dt = [H, rho]`` and return ``rho`` at each grid time.

    A constant Hamiltonian (PauliSum, DenseOperator or matrix) is propagated by
    exact conjugation on each interval. A callable ``H_of_t(t) -> matrix`` is
    integrated with classical RK4 using ``substeps`` steps per interval.
    """
    rho = np.array(_matrix(rho0), dtype=np.complex128)
    _check_hermitian(rho, "initial density matrix")
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise ContractError(f"initial density matrix has trace {np.trace(rho).real:.12f}")
    t_grid = np.asarray(t_grid, dtype=float)
    out = np.empty((t_grid.size,) + rho.shape, dtype=np.complex128)
    if not callable(H_of_t):
        h = _matrix(H_of_t)
        w, v = np.linalg.eigh(h)
        rho_eig = v.conj().T @ rho @ v
        for i, t in enumerate(t_grid - t_grid[0]):
            phase = np.exp(-1j * w * t)
            out[i] = v @ (phase[:, None] * rho_eig * phase.conj()[None, :]) @ v.conj().T
        return out

    def rhs(t, r):
        h = _matrix(H_of_t(t))
        return -1j * (h @ r - r @ h)

    # trace is conserved by any RK stage; purity is not, so it flags a coarse step
    purity0 = np.vdot(rho, rho).real
    out[0] = rho
    for i in range(1, t_grid.size):
        t0, t1 = t_grid[i - 1], t_grid[i]
        dt = (t1 - t0) / substeps
        for s in range(substeps):
            t = t0 + s * dt
            k1 = rhs(t, rho)
            k2 = rhs(t + dt / 2, rho + dt / 2 * k1)
            k3 = rhs(t + dt / 2, rho + dt / 2 * k2)
            k4 = rhs(t + dt, rho + dt * k3)
            rho = rho + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = abs(np.vdot(rho, rho).real - purity0)
        if drift > 1e-8:
            raise RefinementRequiredError(f"purity drifted by {drift:.3e} at t={t1}; increase substeps")
        out[i] = rho
    return out


def propagate_state(H, psi0, t_grid) -> np.ndarray:
    """Exact ``exp(-i H t)|psi0>`` for each ``t`` in ``t_grid``."""
    h = _matrix(H)
    w, v = np.linalg.eigh(h)
    c = v.conj().T @ np.asarray(psi0, dtype=np.complex128)
    t = np.asarray(t_grid, dtype=float)
    return (v @ (np.exp(-1j * np.outer(w, t)) * c[:, None])).T


def exact_correlation(H, A, B, beta: float, t_grid, hbar: float = 1.0) -> np.ndarray:
    """``C(t) = Tr{rho_eq exp(iHt/hbar) A exp(-iHt/hbar) B}`` in the energy eigenbasis."""
    h, a, b = _matrix(H), _matrix(A), _matrix(B)
    _check_hermitian(a, "A")
    _check_hermitian(b, "B")
    w, v = np.linalg.eigh(h)
    p = np.exp(-beta * (w - w.min()))
    p /= p.sum()
    a_e = v.conj().T @ a @ v
    b_e = v.conj().T @ b @ v
    # C(t) = sum_{m,n} p_m A_mn B_nm exp(i (E_m - E_n) t)
    weight = p[:, None] * a_e * b_e.T
    t = np.asarray(t_grid, dtype=float) / hbar
    phases = np.exp(1j * np.outer(t, w))
    return np.sum((phases @ weight) * phases.conj(), axis=1)


def thermal_average(H, A, beta: float) -> float:
    rho, _ = gibbs_state(H, beta)
    return float(np.real(np.trace(rho @ _matrix(A))))


def imaginary_time_state(H, psi0, tau: float) -> np.ndarray:
    """Normalized ``exp(-tau H)|psi0>``."""
    h = _matrix(H)
    w, v = np.linalg.eigh(h)
    c = v.conj().T @ np.asarray(psi0, dtype=np.complex128)
    out = v @ (np.exp(-tau * (w - w.min())) * c)
    return out / np.linalg.norm(out)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)

