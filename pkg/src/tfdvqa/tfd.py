"""Thermofield doubling of an n-qubit system.

Register layout is block-wise: physical qubit ``i`` sits at index ``i`` and its
fictitious partner at ``n + i``. With qubit 0 as the least-significant bit, the
amplitude index is ``b_phys + 2^n * b_fict``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .ansatz import AnsatzCircuit, build_layered_ansatz, prepare_state
from .errors import ContractError, DimensionError
from .statevector import PauliSum, PauliTerm, StateVector
from .vqa import FlowConfig, evolve


@dataclass
class TFDSystem:
    n_physical: int
    H_physical: PauliSum
    H_hat: PauliSum = field(init=False)

    def __post_init__(self):
        if self.n_physical < 1:
            raise ContractError("need at least one physical qubit")
        if self.H_physical.n_qubits != self.n_physical:
            raise DimensionError(
                f"H acts on {self.H_physical.n_qubits} qubits, system has {self.n_physical}")
        self.H_hat = build_H_hat(self.H_physical, self)

    @property
    def n_total(self) -> int:
        return 2 * self.n_physical

    @property
    def dimension(self) -> int:
        return 2**self.n_physical

    def physical_index(self, i: int) -> int:
        return i

    def fictitious_index(self, i: int) -> int:
        return self.n_physical + i

    def lift(self, op: PauliSum) -> PauliSum:
        return lift_physical(op, self)


def _n_physical(sys) -> int:
    return sys if isinstance(sys, int) else sys.n_physical


def prepare_identity_state(n_physical: int) -> StateVector:
    """``|I> = sum_b |b>|b> / sqrt(2^n)``.

    Equivalent to a Hadamard on every physical qubit followed by a CNOT from
    each physical qubit to its fictitious partner.
    """
    if n_physical < 1:
        raise ContractError("need at least one physical qubit")
    d = 2**n_physical
    amps = np.zeros(d * d, dtype=np.complex128)
    amps[np.arange(d) * (d + 1)] = 1.0 / np.sqrt(d)
    return StateVector(amps)


def lift_physical(op: PauliSum, sys) -> PauliSum:
    """Pad every term with identities on the fictitious register."""
    n = _n_physical(sys)
    if op.n_qubits != n:
        raise DimensionError(f"operator acts on {op.n_qubits} qubits, physical register has {n}")
    return PauliSum([PauliTerm(t.letters + "I" * n, t.coefficient) for t in op.terms])


def mirror_fictitious(op: PauliSum, sys) -> PauliSum:
    """Copy of ``op`` acting on the fictitious register with identical coefficients."""
    n = _n_physical(sys)
    if op.n_qubits != n:
        raise DimensionError(f"operator acts on {op.n_qubits} qubits, physical register has {n}")
    return PauliSum([PauliTerm("I" * n + t.letters, t.coefficient) for t in op.terms])


def build_H_hat(H: PauliSum, sys) -> PauliSum:
    """``H (x) 1 - 1 (x) H`` on the doubled register.

    Mirroring with the same coefficients equals the transpose only for real
    Hamiltonians, so strings with an odd number of Y letters are rejected.
    """
    if not H.is_hermitian():
        raise ContractError("H must be Hermitian")
    odd_y = [t.letters for t in H.terms if t.letters.count("Y") % 2]
    if odd_y:
        raise ContractError(f"terms with an odd number of Y letters are not real: {odd_y}")
    return (lift_physical(H, sys) - mirror_fictitious(H, sys)).simplify(atol=1e-15)


def partial_trace_fictitious(state: StateVector, sys=None) -> np.ndarray:
    if state.n_qubits % 2:
        raise DimensionError(f"doubled register must have an even qubit count, got {state.n_qubits}")
    n = state.n_qubits // 2 if sys is None else _n_physical(sys)
    if 2 * n != state.n_qubits:
        raise DimensionError(f"state has {state.n_qubits} qubits, expected {2 * n}")
    d = 2**n
    m = state.amplitudes.reshape(d, d)  # rows: fictitious bits, cols: physical bits
    return m.T @ m.conj()


@dataclass
class ThermalPrepResult:
    theta: np.ndarray
    beta: float
    ansatz: AnsatzCircuit
    state: StateVector
    fidelity_vs_oracle: float | None = None
    energies: np.ndarray | None = None


def initial_parameters(ansatz: AnsatzCircuit, seed: int = 0, scale: float = 1e-3) -> np.ndarray:
    """Zero parameters except a seeded ``+-scale`` kick on single-qubit generators.

    The kick moves the flow off the symmetric point theta = 0, where many
    derivative vectors coincide.
    """
    rng = np.random.default_rng(seed)
    theta = np.zeros(ansatz.n_params)
    mask = ansatz.single_qubit_mask()
    theta[mask] = scale * rng.uniform(-1.0, 1.0, size=int(mask.sum()))
    return theta


def prepare_thermal_state(H: PauliSum, beta: float, ansatz: AnsatzCircuit | int = 2,
                          cfg: FlowConfig | None = None, seed: int = 0,
                          with_oracle: bool = True, oracle_cap: int = 12) -> ThermalPrepResult:
    """Imaginary-time flow from ``|I>`` under the lifted physical Hamiltonian to ``tau = beta/2``.

    ``ansatz`` may be an :class:`AnsatzCircuit` on ``2n`` qubits or an integer
    depth for :func:`build_layered_ansatz`.
    """
    if beta < 0:
        raise ContractError(f"beta must be >= 0, got {beta}")
    sys = TFDSystem(H.n_qubits, H)
    if isinstance(ansatz, int):
        ansatz = build_layered_ansatz(sys.n_total, ansatz)
    if ansatz.n_qubits != sys.n_total:
        raise DimensionError(f"thermal ansatz must act on {sys.n_total} qubits")
    cfg = cfg or FlowConfig()
    initial = prepare_identity_state(sys.n_physical)
    theta0 = initial_parameters(ansatz, seed)
    traj = evolve(ansatz, theta0, initial, sys.lift(H), "imaginary", beta / 2.0, cfg)
    theta = traj.thetas[-1]
    state = prepare_state(ansatz, theta, initial)
    fid = None
    if with_oracle and sys.n_total <= oracle_cap:
        _, exact = oracle.gibbs_state(H, beta)
        fid = min(1.0, oracle.fidelity(exact, state.amplitudes))
    return ThermalPrepResult(theta, beta, ansatz, state, fid, traj.energies)


def density_matrix_to_csv(rho: np.ndarray, path):
    """Row-major ``re,im`` pairs, one matrix row per line."""
    with open(path, "w") as fh:
        for row in rho:
            fh.write(",".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) + "\n")


def density_matrix_from_csv(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            vals = [float(x) for x in line.strip().split(",")]
            rows.append(np.array(vals[0::2]) + 1j * np.array(vals[1::2]))
    return np.array(rows)
