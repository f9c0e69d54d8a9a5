"""McLachlan variational flows in real and imaginary time.

Real time solves ``Re(M) theta_dot = -Im(V)`` and imaginary time solves
``Re(M) theta_dot = -Re(V)`` with

    M_kl = <d_k psi | d_l psi>,    V_k = <psi | H | d_k psi>.

The plain equations are used as written, without a global-phase correction.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal

import numpy as np

from .ansatz import AnsatzCircuit, prepare_state, tangent_vectors
from .errors import ConfigError, ContractError, DimensionError, FlowSingularityError
from .statevector import PauliSum, StateVector, apply_sum_array

logger = logging.getLogger(__name__)

Mode = Literal["real", "imaginary"]


@dataclass
class McLachlanSystem:
    M: np.ndarray
    V: np.ndarray
    state: StateVector | None = None
    energy: float = float("nan")


@dataclass
class FlowConfig:
    step_size: float = 0.01
    regularization: float = 1e-6
    integrator: Literal["euler", "rk4"] = "rk4"
    max_steps: int = 1_000_000
    pinv_cutoff: float = 1e-10
    estimator: Literal["direct", "circuit"] = "direct"
    shots: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.step_size > 0:
            raise ConfigError(f"step_size must be > 0, got {self.step_size}")
        if self.regularization < 0:
            raise ConfigError(f"regularization must be >= 0, got {self.regularization}")
        if self.integrator not in ("euler", "rk4"):
            raise ConfigError(f"unknown integrator {self.integrator!r}")
        if self.estimator not in ("direct", "circuit"):
            raise ConfigError(f"unknown estimator {self.estimator!r}")


def _require_hermitian(H: PauliSum):
    if not H.is_hermitian():
        raise ContractError("Hamiltonian must be Hermitian (real Pauli coefficients)")


def compute_M(ansatz: AnsatzCircuit, theta, initial: StateVector) -> np.ndarray:
    _, D = tangent_vectors(ansatz, theta, initial)
    M = D.conj() @ D.T
    herm_err = np.max(np.abs(M - M.conj().T))
    if herm_err > 1e-10:
        raise FlowSingularityError(f"M lost Hermiticity by {herm_err:.3e}")
    return M


def compute_V(ansatz: AnsatzCircuit, theta, initial: StateVector, H: PauliSum) -> np.ndarray:
    _require_hermitian(H)
    if H.n_qubits != ansatz.n_qubits:
        raise DimensionError(f"H acts on {H.n_qubits} qubits, ansatz on {ansatz.n_qubits}")
    psi, D = tangent_vectors(ansatz, theta, initial)
    # H is Hermitian, so <psi|H|d_k> = (H psi)^dagger d_k
    return D @ apply_sum_array(psi, H).conj()


def assemble(ansatz: AnsatzCircuit, theta, initial: StateVector, H: PauliSum,
             cfg: FlowConfig | None = None, full_M: bool = True) -> McLachlanSystem:
    """Build M and V at ``theta`` sharing one derivative sweep.

    With ``full_M=False`` only ``Re(M)`` is formed (a real GEMM), which is all
    the flow equations need.
    """
    if cfg is not None and cfg.estimator == "circuit":
        from .estimators import assemble_with_circuits

        return assemble_with_circuits(ansatz, theta, initial, H, cfg)
    psi, D = tangent_vectors(ansatz, theta, initial)
    h_psi = apply_sum_array(psi, H)
    if full_M:
        M = D.conj() @ D.T
    else:
        Dr = D.view(np.float64)
        M = Dr @ Dr.T
    V = D @ h_psi.conj()
    energy = float(np.vdot(psi, h_psi).real)
    return McLachlanSystem(M, V, StateVector(psi), energy)


def solve_flow(A: np.ndarray, rhs: np.ndarray, regularization: float, cutoff: float = 1e-10) -> np.ndarray:
    """Solve ``(A + lambda I) x = rhs`` for symmetric ``A`` by eigendecomposition.

    Eigenvalues below ``cutoff * max`` are dropped (pseudo-inverse fallback).
    """
    A = A + regularization * np.eye(A.shape[0])
    if not np.all(np.isfinite(A)) or not np.all(np.isfinite(rhs)):
        raise FlowSingularityError("non-finite entries in the McLachlan system")
    try:
        w, Q = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise FlowSingularityError(f"eigendecomposition failed: {exc}") from exc
    top = w.max()
    cond = top / w.min() if w.min() > 0 else float("inf")
    if not top > 0:
        raise FlowSingularityError("Re(M) has no positive eigenvalue", cond)
    keep = w > cutoff * top
    Qk = Q[:, keep]
    x = Qk @ ((Qk.T @ rhs) / w[keep])
    if not np.all(np.isfinite(x)):
        raise FlowSingularityError("non-finite parameter velocity", cond)
    return x


def theta_dot(system: McLachlanSystem, mode: Mode, cfg: FlowConfig) -> np.ndarray:
    rhs = -system.V.imag if mode == "real" else -system.V.real
    return solve_flow(system.M.real, rhs, cfg.regularization, cfg.pinv_cutoff)


def _step(theta, system, cfg, mode, assemble_at, h):
    theta = np.asarray(theta, dtype=float)
    k1 = theta_dot(system, mode, cfg)
    if cfg.integrator == "euler":
        return theta + h * k1
    if assemble_at is None:
        raise ContractError("rk4 needs an assemble callable to re-evaluate M and V at internal stages")
    k2 = theta_dot(assemble_at(theta + 0.5 * h * k1), mode, cfg)
    k3 = theta_dot(assemble_at(theta + 0.5 * h * k2), mode, cfg)
    k4 = theta_dot(assemble_at(theta + h * k3), mode, cfg)
    return theta + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def step_real_time(theta, system: McLachlanSystem, cfg: FlowConfig,
                   assemble_at: Callable[[np.ndarray], McLachlanSystem] | None = None,
                   h: float | None = None) -> np.ndarray:
    """Advance ``theta`` by one step of ``Re(M) theta_dot = -Im(V)``.

    ``system`` must be assembled at ``theta``; ``assemble_at`` rebuilds it at the
    intermediate RK4 stages.
    """
    return _step(theta, system, cfg, "real", assemble_at, cfg.step_size if h is None else h)


def step_imag_time(theta, system: McLachlanSystem, cfg: FlowConfig,
                   assemble_at: Callable[[np.ndarray], McLachlanSystem] | None = None,
                   h: float | None = None) -> np.ndarray:
    """Advance ``theta`` by one step of ``Re(M) theta_dot = -Re(V)``."""
    return _step(theta, system, cfg, "imaginary", assemble_at, cfg.step_size if h is None else h)


@dataclass
class Trajectory:
    times: np.ndarray
    thetas: np.ndarray
    energies: np.ndarray
    final_state: StateVector | None = field(default=None, repr=False)

    def to_csv(self, path):
        n = self.thetas.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "time"] + [f"theta_{k}" for k in range(n)] + ["energy"])
            for step, (t, th, e) in enumerate(zip(self.times, self.thetas, self.energies)):
                w.writerow([step, repr(float(t))] + [repr(float(x)) for x in th] + [repr(float(e))])


def evolve(ansatz: AnsatzCircuit, theta0, initial: StateVector, H: PauliSum, mode: Mode,
           duration: float, cfg: FlowConfig | None = None,
           callbacks: Iterable[Callable] = ()) -> Trajectory:
    """Fixed-step integration of the McLachlan flow over ``duration``.

    Every callback is invoked as ``cb(step, time, theta, state)`` at the start
    and after each step.
    """
    cfg = cfg or FlowConfig()
    if mode not in ("real", "imaginary"):
        raise ConfigError(f"mode must be 'real' or 'imaginary', got {mode!r}")
    if duration < 0:
        raise ConfigError(f"duration must be >= 0, got {duration}")
    _require_hermitian(H)
    theta = ansatz.check_params(theta0).copy()
    n_steps = int(np.ceil(duration / cfg.step_size - 1e-9)) if duration > 0 else 0
    if n_steps > cfg.max_steps:
        raise ConfigError(f"{n_steps} steps exceeds max_steps={cfg.max_steps}")
    h = duration / n_steps if n_steps else 0.0
    callbacks = list(callbacks)

    def assemble_at(th):
        return assemble(ansatz, th, initial, H, cfg, full_M=False)

    thetas = [theta.copy()]
    energies = []
    system = assemble_at(theta)
    for step in range(n_steps + 1):
        energies.append(system.energy)
        for cb in callbacks:
            cb(step, step * h, theta, system.state)
        if step == n_steps:
            break
        theta = _step(theta, system, cfg, mode, assemble_at, h)
        thetas.append(theta.copy())
        system = assemble_at(theta)
        norm = system.state.norm()
        if abs(norm - 1.0) > 1e-10:
            raise FlowSingularityError(f"state norm drifted to {norm:.12f} at step {step + 1}")
    logger.debug("evolve(%s): %d steps, final energy %.6f", mode, n_steps, energies[-1])
    return Trajectory(np.arange(n_steps + 1) * h, np.array(thetas), np.array(energies), system.state)


def final_state(ansatz: AnsatzCircuit, trajectory: Trajectory, initial: StateVector) -> StateVector:
    return prepare_state(ansatz, trajectory.thetas[-1], initial)
