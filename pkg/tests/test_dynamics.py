import csv

import numpy as np
import pytest

from tfdvqa import oracle
from tfdvqa.dynamics import (CorrelationSeries, QuenchConfig, compute_correlation, damped_transform,
                             default_observables, lorentzian_line, run_quench, spectral_peaks, spectrum)
from tfdvqa.errors import ConfigError, ContractError, DegenerateOperatorError
from tfdvqa.models import HBAR_EV_FS, MonomerData, TFIConfig, build_dipole_operator, build_exciton_hamiltonian, build_tfi
from tfdvqa.statevector import PauliSum, PauliTerm

SIGMA_X0 = PauliSum([PauliTerm("XI")])


def test_default_observables():
    labels = [label for label, _ in default_observables(3)]
    assert labels == ["zz_0_1", "zz_0_2", "zz_1_2", "xx_0_1", "xx_0_2", "xx_1_2"]


class TestQuench:
    def test_equilibrium_and_initial_values(self, tmp_path):
        cfg = QuenchConfig(n_sites=2, h_i=1.5, h_f=1.5, beta=0.5, t_max=1.0, dt=0.05)
        res = run_quench(cfg, ansatz_depth=3)
        rho0, _ = oracle.gibbs_state(build_tfi(TFIConfig(2, 1.5)), 0.5)
        for label, op in cfg.observables:
            series = res.vqa[label]
            assert np.max(np.abs(series - series[0])) < 0.01
            assert series[0] == pytest.approx(np.trace(rho0 @ oracle.to_dense(op).matrix).real, abs=0.01)
            assert np.allclose(res.exact[label], res.exact[label][0], atol=1e-10)
        path = tmp_path / "q.csv"
        res.to_csv(path)
        rows = list(csv.reader(open(path)))
        assert rows[0] == ["t", "zz_0_1_vqa", "zz_0_1_exact", "xx_0_1_vqa", "xx_0_1_exact"]
        assert len(rows) == 22

    def test_small_quench_tracks_oracle(self):
        res = run_quench(QuenchConfig(n_sites=2, h_i=1.5, h_f=2.5, beta=0.5, t_max=1.0, dt=0.1), ansatz_depth=2)
        assert res.thermal_fidelity > 0.99
        assert res.max_deviation() < 0.05

    def test_bad_grid(self):
        with pytest.raises(ConfigError):
            QuenchConfig(t_max=0.0)
        with pytest.raises(ConfigError):
            run_quench(QuenchConfig(n_sites=2, t_max=1.0, dt=0.3))


class TestCorrelation:
    def test_zero_time_anchor(self):
        H = build_tfi(TFIConfig(2, 1.5))
        series = compute_correlation(H, SIGMA_X0, SIGMA_X0, 0.5, np.arange(6) * 0.1)
        rho, _ = oracle.gibbs_state(H, 0.5)
        static = np.trace(rho @ oracle.to_dense(SIGMA_X0).matrix @ oracle.to_dense(SIGMA_X0).matrix)
        assert abs(series.exact[0] - static) < 1e-10
        assert abs(series.values[0] - static) < 1e-2
        assert np.max(np.abs(series.values - series.exact)) < 0.05

    def test_zero_time_anchor_distinct_operators(self):
        H = build_tfi(TFIConfig(2, 1.5))
        A = PauliSum([PauliTerm("XI")])
        B = PauliSum([PauliTerm("ZZ"), PauliTerm("IX", 0.5)])
        series = compute_correlation(H, A, B, 0.5, np.arange(3) * 0.01, ansatz_depth=3)
        rho, _ = oracle.gibbs_state(H, 0.5)
        static = np.trace(rho @ oracle.to_dense(A).matrix @ oracle.to_dense(B).matrix)
        assert abs(series.exact[0] - static) < 1e-10
        assert abs(series.values[0] - static) < 1e-2

    def test_identity_operators(self):
        eye = PauliSum([PauliTerm("II")])
        series = compute_correlation(build_tfi(TFIConfig(2, 1.0)), eye, eye, 0.5, np.arange(5) * 0.1)
        assert np.allclose(series.values, 1.0, atol=1e-10)

    def test_two_level_phase_rotation(self):
        eps = 4.0
        mon = MonomerData(eps, [0, 0, 0], [0, 0, 0], [1.5, 0, 0], [0, 0, 0])
        H = build_exciton_hamiltonian([mon])
        mu = build_dipole_operator([mon], "x")
        times = np.arange(41) * 0.05
        series = compute_correlation(H, mu, mu, 100.0, times, ansatz_depth=1, hbar=HBAR_EV_FS,
                                     flow_cfg=None, thermal_cfg=None)
        assert np.allclose(np.abs(series.values), 2.25, atol=1e-3)
        slope = np.polyfit(times, np.unwrap(np.angle(series.values)), 1)[0]
        assert slope == pytest.approx(-eps / HBAR_EV_FS, rel=1e-3)

    def test_circuit_estimator_matches_direct(self):
        H = build_tfi(TFIConfig(1, 1.2))
        A = PauliSum([PauliTerm("X")])
        B = PauliSum([PauliTerm("Z", 0.5), PauliTerm("X")])
        times = np.arange(4) * 0.1
        direct = compute_correlation(H, A, B, 0.7, times, ansatz_depth=1)
        circuit = compute_correlation(H, A, B, 0.7, times, ansatz_depth=1, estimator="circuit")
        assert np.max(np.abs(direct.values - circuit.values)) < 1e-10

    def test_degenerate_branch(self):
        zero = PauliSum([PauliTerm("X", 0.0)])
        with pytest.raises(DegenerateOperatorError):
            compute_correlation(build_tfi(TFIConfig(1, 1.0)), zero, zero, 0.5, [0.0, 0.1])

    def test_series_validation(self, tmp_path):
        with pytest.raises(ConfigError):
            CorrelationSeries(np.array([0.0, 0.1, 0.3]), np.ones(3, complex), 1.0)
        with pytest.raises(ContractError):
            CorrelationSeries(np.array([0.0, 0.1]), np.array([1.0, np.nan]), 1.0)
        s = CorrelationSeries(np.array([0.0, 0.1]), np.array([1.0, 0.5j]), 1.0)
        s.to_csv(tmp_path / "c.csv")
        assert open(tmp_path / "c.csv").readline().strip() == "t,re_C,im_C,re_C_exact,im_C_exact"


class TestSpectrum:
    def series(self, eps, tau_max=60.0, dt=0.05):
        t = np.arange(int(round(tau_max / dt)) + 1) * dt
        return CorrelationSeries(t, np.exp(-1j * eps * t), 1.0)

    def test_single_lorentzian(self):
        eps, tau = 3.0, 8.0
        spec = spectrum(self.series(eps), tau)
        peaks = spec.peaks()
        assert len(peaks) == 1
        assert abs(peaks[0] - eps) <= spec.bin_width()
        ref = lorentzian_line(spec.omegas, eps, tau)
        assert np.max(np.abs(spec.intensity / spec.intensity.max() - ref / ref.max())) < 0.02

    def test_long_tau_narrows_to_resolution(self):
        spec = spectrum(self.series(2.0, tau_max=20.0), 1e6)
        above_half = spec.omegas[spec.intensity > 0.5 * spec.intensity.max()]
        assert above_half.max() - above_half.min() <= 2 * spec.bin_width()

    def test_real_and_sorted(self):
        spec = spectrum(self.series(1.0, tau_max=5.0), 2.0, pad_factor=2)
        assert np.all(np.diff(spec.omegas) > 0)
        assert spec.intensity.dtype == float

    def test_grid_errors(self):
        with pytest.raises(ConfigError):
            damped_transform(np.array([0.0, 0.1, 0.3]), np.ones(3), 1.0)
        with pytest.raises(ConfigError):
            damped_transform(np.array([0.5, 0.6]), np.ones(2), 1.0)

    def test_peak_window(self):
        om = np.linspace(-5, 5, 1001)
        line = lorentzian_line(om, -2.0, 3.0) + 0.5 * lorentzian_line(om, 2.0, 3.0)
        assert np.allclose(spectral_peaks(om, line), [-2.0, 2.0])
        assert np.allclose(spectral_peaks(om, line, omega_min=0.0), [2.0])
