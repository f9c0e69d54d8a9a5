"""End-to-end finite-temperature experiments.

* :func:`run_quench` - thermal state of one transverse field, evolved under another.
* :func:`compute_correlation` - equilibrium ``C(t) = Tr{rho A(t) B}`` from two
  variationally propagated branches.
* :func:`spectrum` - damped Fourier transform of a correlation series.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Literal

import numpy as np
from scipy.signal import find_peaks

from . import oracle
from .ansatz import build_layered_ansatz, prepare_state
from .errors import ConfigError, ContractError, DegenerateOperatorError
from .models import TFIConfig, build_tfi
from .statevector import PauliSum, PauliTerm, StateVector, apply_sum_array, expectation
from .tfd import TFDSystem, build_H_hat, lift_physical, prepare_identity_state, prepare_thermal_state
from .vqa import FlowConfig, evolve

logger = logging.getLogger(__name__)


def default_observables(n_sites: int) -> list[tuple[str, PauliSum]]:
    """``zz_i_j`` and ``xx_i_j`` for every pair ``i < j``."""
    obs = []
    for letter in "zx":
        for i, j in combinations(range(n_sites), 2):
            term = PauliTerm.from_sparse(n_sites, {i: letter.upper(), j: letter.upper()})
            obs.append((f"{letter}{letter}_{i}_{j}", PauliSum([term])))
    return obs


@dataclass
class QuenchConfig:
    n_sites: int = 4
    h_i: float = 1.5
    h_f: float = 2.5
    beta: float = 0.5
    t_max: float = 5.0
    dt: float = 0.01
    observables: list[tuple[str, PauliSum]] | None = None

    def __post_init__(self):
        if not self.t_max > 0 or not self.dt > 0:
            raise ConfigError("t_max and dt must be positive")
        if self.observables is None:
            self.observables = default_observables(self.n_sites)


@dataclass
class QuenchResult:
    times: np.ndarray
    vqa: dict[str, np.ndarray]
    exact: dict[str, np.ndarray]
    thermal_fidelity: float | None = None

    def max_deviation(self) -> float:
        return max(float(np.max(np.abs(self.vqa[k] - self.exact[k]))) for k in self.vqa)

    def to_csv(self, path):
        labels = list(self.vqa)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"{lab}_{kind}" for lab in labels for kind in ("vqa", "exact")])
            for i, t in enumerate(self.times):
                row = [repr(float(t))]
                for lab in labels:
                    row += [repr(float(self.vqa[lab][i])), repr(float(self.exact[lab][i]))]
                w.writerow(row)


def _record_stride(dt: float, step: float) -> tuple[int, float]:
    """Number of flow steps per recording interval and the matching flow step."""
    stride = max(1, int(round(dt / step)))
    return stride, dt / stride


def _grid(t_max: float, dt: float) -> np.ndarray:
    n = int(round(t_max / dt))
    if abs(n * dt - t_max) > 1e-9 * max(1.0, t_max):
        raise ConfigError(f"t_max={t_max} is not a multiple of dt={dt}")
    return np.arange(n + 1) * dt


def run_quench(cfg: QuenchConfig, ansatz_depth: int = 2, flow_cfg: FlowConfig | None = None,
               thermal_cfg: FlowConfig | None = None, seed: int = 0) -> QuenchResult:
    """Thermal prep at ``h_i``, real-time flow under ``H_hat(h_f)``, oracle from the LvN equation."""
    flow_cfg = flow_cfg or FlowConfig()
    H_i = build_tfi(TFIConfig(cfg.n_sites, cfg.h_i))
    H_f = build_tfi(TFIConfig(cfg.n_sites, cfg.h_f))
    sys = TFDSystem(cfg.n_sites, H_f)
    times = _grid(cfg.t_max, cfg.dt)
    stride, h = _record_stride(cfg.dt, flow_cfg.step_size)

    thermal = prepare_thermal_state(H_i, cfg.beta, ansatz_depth, thermal_cfg or flow_cfg, seed=seed)
    logger.info("thermal prep fidelity %s", thermal.fidelity_vs_oracle)

    lifted = [(label, sys.lift(op)) for label, op in cfg.observables]
    vqa = {label: [] for label, _ in lifted}

    def record(step, t, theta, state):
        if step % stride == 0:
            for label, op in lifted:
                vqa[label].append(expectation(state, op))

    dyn = build_layered_ansatz(sys.n_total, ansatz_depth)
    step_cfg = FlowConfig(**{**flow_cfg.__dict__, "step_size": h})
    evolve(dyn, np.zeros(dyn.n_params), thermal.state, sys.H_hat, "real", cfg.t_max, step_cfg, [record])

    rho0, _ = oracle.gibbs_state(H_i, cfg.beta)
    rhos = oracle.evolve_lvn(H_f, rho0, times)
    exact = {}
    for label, op in cfg.observables:
        a = oracle.to_dense(op).matrix
        exact[label] = np.einsum("tij,ji->t", rhos, a).real
    return QuenchResult(times, {k: np.array(v) for k, v in vqa.items()}, exact, thermal.fidelity_vs_oracle)


@dataclass
class CorrelationSeries:
    times: np.ndarray
    values: np.ndarray
    norm_factor: float
    exact: np.ndarray | None = None
    thermal_fidelity: float | None = None

    def __post_init__(self):
        steps = np.diff(self.times)
        if steps.size and not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ConfigError("correlation times must be on a uniform grid")
        if not np.all(np.isfinite(self.values)):
            raise ContractError("correlation values must be finite")

    def to_csv(self, path):
        exact = self.exact if self.exact is not None else np.full_like(self.values, np.nan)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "re_C", "im_C", "re_C_exact", "im_C_exact"])
            for t, c, e in zip(self.times, self.values, exact):
                w.writerow([repr(float(t)), repr(float(c.real)), repr(float(c.imag)),
                            repr(float(e.real)), repr(float(e.imag))])


def compute_correlation(H: PauliSum, A: PauliSum, B: PauliSum, beta: float, t_grid,
                        ansatz_depth: int = 2, flow_cfg: FlowConfig | None = None,
                        estimator: Literal["direct", "circuit"] = "direct",
                        hbar: float = 1.0, thermal_cfg: FlowConfig | None = None,
                        thermal_depth: int | None = None, shots=None, seed: int = 0,
                        with_oracle: bool = True) -> CorrelationSeries:
    """Two-branch variational estimate of ``C(t) = Tr{rho_eq A(t) B}``.

    Branch 1 starts from ``B|O>`` (normalized, norm kept as ``norm_factor``),
    branch 2 from ``|O>``; both carry their own parameters on a fresh dynamic
    ansatz appended after the frozen thermal block and evolve under
    ``H_hat / hbar``. ``t_grid`` is in the time unit implied by ``hbar``.
    """
    for name, op in (("A", A), ("B", B)):
        if not op.is_hermitian():
            raise ContractError(f"{name} must be Hermitian")
    flow_cfg = flow_cfg or FlowConfig()
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 1:
        raise ConfigError("empty time grid")
    dt = float(t_grid[1] - t_grid[0]) if t_grid.size > 1 else flow_cfg.step_size
    stride, h = _record_stride(dt, flow_cfg.step_size)
    duration = float(t_grid[-1] - t_grid[0])

    sys = TFDSystem(H.n_qubits, H)
    thermal = prepare_thermal_state(H, beta, thermal_depth or ansatz_depth, thermal_cfg or FlowConfig(),
                                    seed=seed)
    A_l, B_l = lift_physical(A, sys), lift_physical(B, sys)
    psi_b = apply_sum_array(thermal.state.amplitudes, B_l)
    norm = float(np.linalg.norm(psi_b))
    if norm < 1e-12:
        raise DegenerateOperatorError("B|O(beta)> vanishes; correlation branch cannot be normalized")
    branch1_init = StateVector(psi_b / norm)

    dyn = build_layered_ansatz(sys.n_total, ansatz_depth)
    H_dyn = sys.H_hat.scaled(1.0 / hbar)
    step_cfg = FlowConfig(**{**flow_cfg.__dict__, "step_size": h})
    traj1 = evolve(dyn, np.zeros(dyn.n_params), branch1_init, H_dyn, "real", duration, step_cfg)
    traj2 = evolve(dyn, np.zeros(dyn.n_params), thermal.state, H_dyn, "real", duration, step_cfg)
    theta1 = traj1.thetas[::stride]
    theta2 = traj2.thetas[::stride]

    values = np.empty(t_grid.size, dtype=np.complex128)
    if estimator == "direct":
        for i, (t1, t2) in enumerate(zip(theta1, theta2)):
            psi1 = prepare_state(dyn, t1, branch1_init).amplitudes
            psi2 = prepare_state(dyn, t2, thermal.state).amplitudes
            values[i] = norm * np.vdot(psi2, apply_sum_array(psi1, A_l))
    elif estimator == "circuit":
        from .estimators import ShotConfig, estimate_transition_amplitude

        shot_cfg = shots if isinstance(shots, ShotConfig) else ShotConfig(shots=shots, seed=seed)
        identity = prepare_identity_state(sys.n_physical)
        for i, (t1, t2) in enumerate(zip(theta1, theta2)):
            values[i] = estimate_transition_amplitude(
                (thermal.ansatz, thermal.theta), (dyn, t1), (dyn, t2), A, B, shot_cfg,
                initial=identity, circuit_id=i)
    else:
        raise ConfigError(f"unknown estimator {estimator!r}")

    exact = None
    if with_oracle and sys.n_total <= oracle.DENSE_QUBIT_CAP:
        exact = oracle.exact_correlation(H, A, B, beta, t_grid - t_grid[0], hbar=hbar)
    return CorrelationSeries(t_grid, values, norm, exact, thermal.fidelity_vs_oracle)


@dataclass
class SpectrumSeries:
    omegas: np.ndarray
    intensity: np.ndarray
    damping_tau: float
    intensity_exact: np.ndarray | None = field(default=None, repr=False)

    def bin_width(self) -> float:
        return float(self.omegas[1] - self.omegas[0])

    def peaks(self, rel_prominence: float = 0.05, omega_min: float | None = None,
              omega_max: float | None = None) -> np.ndarray:
        return spectral_peaks(self.omegas, self.intensity, rel_prominence, omega_min, omega_max)

    def to_csv(self, path, scale: float = 1.0):
        """Write ``omega,intensity,intensity_exact``; ``scale`` multiplies omega (e.g. hbar for eV)."""
        exact = self.intensity_exact if self.intensity_exact is not None else np.full_like(self.intensity, np.nan)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["omega", "intensity", "intensity_exact"])
            for om, val, ex in zip(self.omegas, self.intensity, exact):
                w.writerow([repr(float(om * scale)), repr(float(val)), repr(float(ex))])


def damped_transform(times: np.ndarray, values: np.ndarray, tau: float, pad_factor: int = 1):
    """``I(w) = dt * sum_t exp(i w t) C(t) exp(-|t|/tau)`` over the symmetric grid.

    Negative times use ``C(-t) = conj(C(t))``. Returns ``(omegas, intensity)``
    with omegas ascending; the imaginary residue is checked and dropped.
    """
    times = np.asarray(times, dtype=float)
    steps = np.diff(times)
    if steps.size == 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise ConfigError("spectrum needs a uniform time grid with at least two points")
    if abs(times[0]) > 1e-12 * max(1.0, abs(steps[0])):
        raise ConfigError("correlation series must start at t = 0")
    dt = steps[0]
    K = times.size
    damped = np.asarray(values, dtype=np.complex128) * np.exp(-np.abs(times) / tau)
    N = (2 * K - 1) * pad_factor
    g = np.zeros(N, dtype=np.complex128)
    g[:K] = damped
    g[N - K + 1:] = np.conj(damped[1:][::-1])
    spec = N * np.fft.ifft(g) * dt
    scale = max(1.0, float(np.max(np.abs(spec))))
    residue = float(np.max(np.abs(spec.imag)))
    if residue > 1e-8 * scale:
        raise ContractError(f"spectrum has imaginary residue {residue:.3e}")
    omegas = 2 * np.pi * np.fft.fftfreq(N, d=dt)
    order = np.argsort(omegas)
    return omegas[order], spec.real[order]


def spectrum(series: CorrelationSeries, tau: float, pad_factor: int = 1) -> SpectrumSeries:
    omegas, intensity = damped_transform(series.times - series.times[0], series.values, tau, pad_factor)
    exact = None
    if series.exact is not None:
        _, exact = damped_transform(series.times - series.times[0], series.exact, tau, pad_factor)
    return SpectrumSeries(omegas, intensity, tau, exact)


def spectral_peaks(omegas, intensity, rel_prominence: float = 0.05, omega_min=None, omega_max=None) -> np.ndarray:
    """Frequencies of local maxima whose prominence exceeds ``rel_prominence`` of the in-window maximum.

    Prominence rather than height keeps truncation ripple on a line's tail from
    counting as a peak.
    """
    omegas = np.asarray(omegas)
    window = np.ones(omegas.size, dtype=bool)
    if omega_min is not None:
        window &= omegas >= omega_min
    if omega_max is not None:
        window &= omegas <= omega_max
    om, val = omegas[window], np.asarray(intensity)[window]
    idx, _ = find_peaks(val, prominence=rel_prominence * val.max())
    return om[idx]


def lorentzian_line(omegas, center: float, tau: float) -> np.ndarray:
    """Continuous transform of ``exp(-i center t - |t|/tau)``: ``2 tau / (1 + tau^2 (w - center)^2)``."""
    return 2.0 * tau / (1.0 + (tau * (np.asarray(omegas) - center)) ** 2)
