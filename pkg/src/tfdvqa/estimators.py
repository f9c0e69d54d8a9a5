"""Hadamard-test circuits for M, V and transition amplitudes.

Each circuit uses one ancilla prepared in ``(|0> + e^{i phi}|1>)/sqrt(2)``,
controlled Pauli insertions (and, for transition amplitudes, branch-controlled
rotations), then a Hadamard and a Z measurement on the ancilla. With branch
states ``b0`` and ``b1`` the ancilla gives ``<X> = Re(e^{i phi} <b0|b1>)``, so
``phi = 0`` yields the real part and ``phi = pi/2`` minus the imaginary part.

The ancilla is the most-significant qubit of the ``n + 1`` qubit register; the
simulator stores the register as two rows, one per ancilla value.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .ansatz import AnsatzCircuit, prepare_state
from .errors import ContractError, DimensionError
from .statevector import PauliSum, PauliTerm, StateVector, _apply_letters, _rotate, apply_sum_array
from .tfd import lift_physical, prepare_identity_state

Control = Literal[0, 1] | None


@dataclass
class ShotConfig:
    """``shots=None`` selects exact ancilla expectations."""

    shots: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.shots is not None and self.shots < 1:
            raise ContractError(f"shots must be >= 1, got {self.shots}")

    @property
    def exact(self) -> bool:
        return self.shots is None


@dataclass
class Op:
    letters: str
    angle: float | None = None  # None: bare Pauli string, else exp(i angle P)
    control: Control = None


@dataclass
class HadamardTestPlan:
    ancilla_phase: float
    controlled_sequence: list[Op]
    base_preparation: StateVector
    circuit_id: tuple[int, ...] = field(default=())

    def run_state(self) -> np.ndarray:
        """Register before the final ancilla Hadamard, shape ``(2, 2^n)``."""
        psi0 = self.base_preparation.amplitudes
        rows = np.stack([psi0, np.exp(1j * self.ancilla_phase) * psi0]) / np.sqrt(2.0)
        for op in self.controlled_sequence:
            target = rows if op.control is None else rows[op.control]
            if op.angle is None:
                if set(op.letters) != {"I"}:
                    target[...] = _apply_letters(target, op.letters)
            elif op.angle != 0.0:
                target[...] = _rotate(target, op.letters, op.angle)
        return rows

    def to_statevector(self) -> StateVector:
        return StateVector(self.run_state().reshape(-1))

    def probability_zero(self) -> float:
        rows = self.run_state()
        return float(0.5 * np.linalg.norm(rows[0] + rows[1]) ** 2)

    def measure(self, shots: ShotConfig) -> float:
        """Ancilla ``<X>``: exact, or a Bernoulli estimate from ``shots.shots`` draws."""
        p0 = min(1.0, max(0.0, self.probability_zero()))
        if shots.exact:
            return 2.0 * p0 - 1.0
        rng = np.random.default_rng([shots.seed, *self.circuit_id])
        zeros = rng.binomial(shots.shots, p0)
        return 2.0 * zeros / shots.shots - 1.0


PHASES = (0.0, np.pi / 2)


def _complex_from_pair(plans: Sequence[HadamardTestPlan], shots: ShotConfig) -> complex:
    re = plans[0].measure(shots)
    im = -plans[1].measure(shots)
    return complex(re, im)


def _rotations(ansatz: AnsatzCircuit, theta, start: int, stop: int, control: Control = None) -> list[Op]:
    return [Op(g.letters, float(t), control) for g, t in zip(ansatz.generators[start:stop], theta[start:stop])]


def m_element_plans(ansatz: AnsatzCircuit, theta, k: int, l: int, initial: StateVector,
                    circuit_id: tuple[int, ...] = ()) -> list[HadamardTestPlan]:
    theta = ansatz.check_params(theta)
    gens = ansatz.generators
    seq = (_rotations(ansatz, theta, 0, k + 1)
           + [Op(gens[k].letters, None, 0)]
           + _rotations(ansatz, theta, k + 1, l + 1)
           + [Op(gens[l].letters, None, 1)])
    return [HadamardTestPlan(phi, seq, initial, (0, k, l, i, *circuit_id)) for i, phi in enumerate(PHASES)]


def estimate_M_element(ansatz: AnsatzCircuit, theta, k: int, l: int, shots: ShotConfig | None = None,
                       initial: StateVector | None = None, circuit_id: tuple[int, ...] = ()) -> complex:
    """``M_kl`` (zero-based, ``k < l``) from the Hadamard test.

    Diagonal elements are 1 by unitarity and ``k > l`` follows from Hermiticity,
    so both are rejected here.
    """
    if not 0 <= k < l < ansatz.n_params:
        raise ContractError(f"estimate_M_element needs 0 <= k < l < {ansatz.n_params}, got ({k}, {l})")
    shots = shots or ShotConfig()
    initial = initial or StateVector.zero(ansatz.n_qubits)
    return _complex_from_pair(m_element_plans(ansatz, theta, k, l, initial, circuit_id), shots)


def v_element_plans(ansatz: AnsatzCircuit, theta, k: int, term: PauliTerm, initial: StateVector,
                    circuit_id: tuple[int, ...] = ()) -> list[HadamardTestPlan]:
    theta = ansatz.check_params(theta)
    seq = (_rotations(ansatz, theta, 0, k + 1)
           + [Op(ansatz.generators[k].letters, None, 1)]
           + _rotations(ansatz, theta, k + 1, ansatz.n_params)
           + [Op(term.letters, None, 0)])
    return [HadamardTestPlan(phi, seq, initial, (1, k, *circuit_id, i)) for i, phi in enumerate(PHASES)]


def estimate_V_element(ansatz: AnsatzCircuit, theta, k: int, H: PauliSum, shots: ShotConfig | None = None,
                       initial: StateVector | None = None, circuit_id: tuple[int, ...] = ()) -> complex:
    """``V_k = i sum_j c_j <psi0|U^dag h_j U_N..R_k U_k..U_1|psi0>``, one circuit pair per term."""
    if not H.is_hermitian():
        raise ContractError("H must be Hermitian")
    if H.n_qubits != ansatz.n_qubits:
        raise DimensionError(f"H acts on {H.n_qubits} qubits, ansatz on {ansatz.n_qubits}")
    if not 0 <= k < ansatz.n_params:
        raise IndexError(f"parameter index {k} out of range")
    shots = shots or ShotConfig()
    initial = initial or StateVector.zero(ansatz.n_qubits)
    total = 0.0j
    for j, term in enumerate(H.terms):
        plans = v_element_plans(ansatz, theta, k, term, initial, (j, *circuit_id))
        total += term.coefficient.real * _complex_from_pair(plans, shots)
    return 1j * total


BoundCircuit = tuple[AnsatzCircuit, np.ndarray]


def transition_plans(prep: BoundCircuit, branch1: BoundCircuit, branch2: BoundCircuit,
                     A: PauliSum, B: PauliSum, initial: StateVector,
                     circuit_id: tuple[int, ...] = ()) -> list[tuple[complex, list[HadamardTestPlan]]]:
    """One ``(alpha_a * beta_b, [plan_re, plan_im])`` entry per Pauli pair of the lifted A and B."""
    (pa, pt), (a1, t1), (a2, t2) = prep, branch1, branch2
    pt, t1, t2 = pa.check_params(pt), a1.check_params(t1), a2.check_params(t2)
    n_phys = A.n_qubits
    A_l, B_l = lift_physical(A, n_phys), lift_physical(B, n_phys)
    base = _rotations(pa, pt, 0, pa.n_params)
    out = []
    for ia, pterm in enumerate(A_l.terms):
        for ib, qterm in enumerate(B_l.terms):
            seq = (base
                   + [Op(qterm.letters, None, 1)]
                   + _rotations(a1, t1, 0, a1.n_params, control=1)
                   + _rotations(a2, t2, 0, a2.n_params, control=0)
                   + [Op(pterm.letters, None, 1)])
            plans = [HadamardTestPlan(phi, seq, initial, (2, ia, ib, i, *circuit_id)) for i, phi in enumerate(PHASES)]
            out.append((pterm.coefficient.real * qterm.coefficient.real, plans))
    return out


def estimate_transition_amplitude(prep: BoundCircuit, branch1: BoundCircuit, branch2: BoundCircuit,
                                  A: PauliSum, B: PauliSum, shots: ShotConfig | None = None,
                                  initial: StateVector | None = None, circuit_id: int | tuple = ()) -> complex:
    """``<I| U^dag U2^dag A U1 B U |I>`` with ``A`` and ``B`` acting on the physical register.

    ``prep``, ``branch1`` and ``branch2`` are ``(ansatz, theta)`` pairs on the
    doubled register. ``B`` and ``A`` enter by Pauli linearity, one circuit pair
    per ``(P_a, Q_b)`` combination.
    """
    for name, op in (("A", A), ("B", B)):
        if not op.is_hermitian():
            raise ContractError(f"{name} must be Hermitian")
    shots = shots or ShotConfig()
    if isinstance(circuit_id, int):
        circuit_id = (circuit_id,)
    initial = initial or prepare_identity_state(A.n_qubits)
    total = 0.0j
    for weight, plans in transition_plans(prep, branch1, branch2, A, B, initial, circuit_id):
        total += weight * _complex_from_pair(plans, shots)
    return total


def direct_transition_amplitude(prep: BoundCircuit, branch1: BoundCircuit, branch2: BoundCircuit,
                                A: PauliSum, B: PauliSum, initial: StateVector | None = None) -> complex:
    """Same quantity by plain statevector algebra, for cross-checks."""
    n_phys = A.n_qubits
    initial = initial or prepare_identity_state(n_phys)
    base = prepare_state(prep[0], prep[1], initial)
    b_psi = StateVector(apply_sum_array(base.amplitudes, lift_physical(B, n_phys)))
    psi1 = prepare_state(branch1[0], branch1[1], b_psi)
    psi2 = prepare_state(branch2[0], branch2[1], base)
    return complex(np.vdot(psi2.amplitudes, apply_sum_array(psi1.amplitudes, lift_physical(A, n_phys))))


def assemble_with_circuits(ansatz: AnsatzCircuit, theta, initial: StateVector, H: PauliSum, cfg):
    """McLachlan system with every off-diagonal M and every V element from circuits."""
    from .vqa import McLachlanSystem

    shots = ShotConfig(cfg.shots, cfg.seed)
    theta = ansatz.check_params(theta)
    n = ansatz.n_params
    M = np.eye(n, dtype=np.complex128)
    for k in range(n):
        for l in range(k + 1, n):
            M[k, l] = estimate_M_element(ansatz, theta, k, l, shots, initial)
            M[l, k] = np.conj(M[k, l])
    V = np.array([estimate_V_element(ansatz, theta, k, H, shots, initial) for k in range(n)])
    state = prepare_state(ansatz, theta, initial)
    energy = float(np.vdot(state.amplitudes, apply_sum_array(state.amplitudes, H)).real)
    return McLachlanSystem(M, V, state, energy)
