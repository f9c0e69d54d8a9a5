import json
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import dense_sum
from tfdvqa.errors import ConfigError, ContractError
from tfdvqa.models import (DIPOLE_COUPLING_EV, HBAR_EV_FS, MonomerData, TFIConfig, beta_from_temperature,
                           build_dipole_operator, build_exciton_hamiltonian, build_tfi, dipole_coupling,
                           dump_monomers, exciton_coefficients, load_monomers, monomers_from_json,
                           synth_monomers)
from tfdvqa.statevector import PauliSum, PauliTerm

vec3 = st.lists(st.floats(-3, 3), min_size=3, max_size=3)


def embed(op2, site, n):
    """Place a 2x2 operator on ``site`` (qubit 0 = least-significant bit)."""
    mats = [np.eye(2)] * n
    mats[site] = op2
    out = np.eye(1)
    for m in reversed(mats):
        out = np.kron(out, m)
    return out


def molecular_hamiltonian(monomers):
    """Dense ``sum eps |e><e| + sum_{m<n} mu^m . T_mn . mu^n`` from 2x2 dipole matrices."""
    n = len(monomers)
    H = np.zeros((2**n, 2**n))
    for i, m in enumerate(monomers):
        H += m.excitation_energy * embed(np.diag([0.0, 1.0]), i, n)
    dip = [[np.array([[m.mu_gg[a], m.mu_ge[a]], [m.mu_ge[a], m.mu_ee[a]]]) for a in range(3)] for m in monomers]
    for i, j in combinations(range(n), 2):
        r = monomers[j].position - monomers[i].position
        d = np.linalg.norm(r)
        T = DIPOLE_COUPLING_EV * (np.eye(3) - 3 * np.outer(r, r) / d**2) / d**3
        for a in range(3):
            for b in range(3):
                H += T[a, b] * embed(dip[i][a], i, n) @ embed(dip[j][b], j, n)
    return H


def monomer(eps=4.0, gg=(0, 0, 0), ee=(0, 0, 0), ge=(0, 0, 0), pos=(0, 0, 0)):
    return MonomerData(eps, np.array(gg, float), np.array(ee, float), np.array(ge, float), np.array(pos, float))


class TestTFI:
    def test_two_sites(self):
        H = build_tfi(TFIConfig(2, 1.0))
        assert {(t.letters, t.coefficient) for t in H.terms} == {("XI", -1), ("IX", -1), ("ZZ", -1)}

    def test_four_sites(self):
        H = build_tfi(TFIConfig(4, 1.5))
        field = [t for t in H.terms if set(t.letters) <= {"I", "X"}]
        bonds = [t for t in H.terms if "Z" in t.letters]
        assert len(field) == 4 and all(t.coefficient == -1.5 for t in field)
        assert len(bonds) == 3 and all(t.coefficient == -1 for t in bonds)

    def test_classical_limit_degenerate_ground(self):
        w, v = np.linalg.eigh(dense_sum(build_tfi(TFIConfig(4, 0.0))))
        assert w[0] == pytest.approx(w[1]) and w[2] > w[0] + 1
        ground = np.abs(v[:, :2]) ** 2
        assert set(np.flatnonzero(ground.sum(axis=1) > 0.5)) == {0, 15}

    def test_single_site_field_only(self):
        assert [t.letters for t in build_tfi(TFIConfig(1, 0.3)).terms] == ["X"]


class TestDipoleCoupling:
    def test_parallel_perpendicular(self):
        assert dipole_coupling([0, 0, 1], [0, 0, 1], [1, 0, 0], scale=1.0) == pytest.approx(1.0)

    def test_head_to_tail(self):
        assert dipole_coupling([1, 0, 0], [1, 0, 0], [1, 0, 0], scale=1.0) == pytest.approx(-2.0)

    def test_inverse_cube(self):
        a = dipole_coupling([1, 2, 0], [0, 1, 1], [1.0, 0.5, 0.2])
        b = dipole_coupling([1, 2, 0], [0, 1, 1], [2.0, 1.0, 0.4])
        assert b == pytest.approx(a / 8)

    @given(vec3, vec3, vec3)
    def test_exchange_symmetry(self, a, b, r):
        if np.linalg.norm(r) < 1e-3:
            return
        assert dipole_coupling(a, b, r) == pytest.approx(dipole_coupling(b, a, -np.array(r)), rel=1e-12, abs=1e-12)

    def test_zero_separation(self):
        with pytest.raises(ContractError):
            dipole_coupling([1, 0, 0], [1, 0, 0], [0, 0, 0])

    def test_unit_constant(self):
        # hartree * bohr^3 in eV angstrom^3
        assert DIPOLE_COUPLING_EV == pytest.approx(4.0324, rel=1e-4)


class TestExcitonHamiltonian:
    def test_single_monomer(self):
        H = build_exciton_hamiltonian([monomer(4.0)]).simplify()
        assert H.coefficient_of("I") == pytest.approx(2.0)
        assert H.coefficient_of("Z") == pytest.approx(-2.0)
        assert len(H.terms) == 2
        assert np.allclose(np.linalg.eigvalsh(dense_sum(H)), [0.0, 4.0])

    def test_uncoupled_subset_sums(self):
        eps = [3.9, 4.2, 4.35]
        mons = [monomer(e, pos=(5.0 * i, 0, 0)) for i, e in enumerate(eps)]
        H = dense_sum(build_exciton_hamiltonian(mons))
        assert np.allclose(H, np.diag(np.diag(H)))
        sums = sorted(sum(e for e, bit in zip(eps, bits) if bit) for bits in np.ndindex(2, 2, 2))
        assert np.allclose(np.sort(np.diag(H).real), sums)

    def test_transition_dipoles_only(self):
        a = monomer(4.0, ge=(1.0, 0.5, 0.0), pos=(0, 0, 0))
        b = monomer(4.1, ge=(0.2, 1.5, 0.3), pos=(3.0, 4.0, 0.0))
        c = exciton_coefficients([a, b])
        r = np.array([3.0, 4.0, 0.0])
        hand = DIPOLE_COUPLING_EV * ((a.mu_ge @ b.mu_ge) - 3 * (a.mu_ge @ r) * (b.mu_ge @ r) / 25) / 125
        assert c.XX[1, 0] == pytest.approx(hand)
        assert c.XZ[1, 0] == c.ZX[1, 0] == c.ZZ[1, 0] == 0.0
        assert np.all(c.X == 0)

    def test_matches_molecular_hamiltonian(self):
        mons = synth_monomers(3, 3)
        H = build_exciton_hamiltonian(mons)
        assert H.is_hermitian()
        assert np.max(np.abs(dense_sum(H) - molecular_hamiltonian(mons))) < 1e-12

    def test_swap_identical_monomers(self):
        a = monomer(4.0, gg=(0.1, 0, 0), ee=(0.3, 0.1, 0), ge=(1, 0.2, 0), pos=(0, 0, 0))
        b = monomer(4.0, gg=(0.1, 0, 0), ee=(0.3, 0.1, 0), ge=(1, 0.2, 0), pos=(4, 1, 0))
        ab = exciton_coefficients([a, b])
        ba = exciton_coefficients([b, a])
        assert ab.E_scalar == pytest.approx(ba.E_scalar)
        assert np.allclose(ab.Z, ba.Z[::-1]) and np.allclose(ab.X, ba.X[::-1])
        assert ab.XX[1, 0] == pytest.approx(ba.XX[1, 0])
        assert ab.XZ[1, 0] == pytest.approx(ba.ZX[1, 0])

    def test_shared_position_rejected(self):
        with pytest.raises(ContractError):
            build_exciton_hamiltonian([monomer(4.0), monomer(4.1)])


class TestDipoleOperator:
    def test_symmetric_case_has_no_z(self):
        op = build_dipole_operator([monomer(gg=(0.4, 0, 0), ee=(0.4, 0, 0), ge=(1, 0, 0))], "x")
        assert op.coefficient_of("Z") == 0.0

    def test_example(self):
        op = build_dipole_operator([monomer(gg=(1, 0, 0), ge=(0.5, 0, 0))], "x")
        assert op.coefficient_of("I") == 0.5 and op.coefficient_of("Z") == 0.5 and op.coefficient_of("X") == 0.5
        assert np.allclose(dense_sum(op), [[1.0, 0.5], [0.5, 0.0]])

    def test_hermitian_and_bad_axis(self):
        mons = synth_monomers(1, 4)
        for axis in "xyz":
            assert build_dipole_operator(mons, axis).is_hermitian()
        with pytest.raises(ConfigError):
            build_dipole_operator(mons, "w")


class TestMonomerIO:
    def test_round_trip(self, tmp_path):
        mons = synth_monomers(7, 4)
        path = tmp_path / "m.json"
        path.write_text(dump_monomers(mons))
        back = load_monomers(path)
        assert dump_monomers(back) == dump_monomers(mons)

    def test_unknown_key_rejected_with_path(self):
        data = json.loads(dump_monomers(synth_monomers(0, 2)))
        data[1]["charge"] = 0
        with pytest.raises(ConfigError, match="1"):
            monomers_from_json(data)

    def test_wrong_vector_length(self):
        data = json.loads(dump_monomers(synth_monomers(0, 1)))
        data[0]["mu_ge"] = [1.0, 2.0]
        with pytest.raises(ConfigError, match="0/mu_ge"):
            monomers_from_json(data)

    def test_bad_values(self):
        with pytest.raises(ConfigError):
            monomer(eps=-1.0)
        with pytest.raises(ConfigError):
            MonomerData(4.0, [np.nan, 0, 0], [0, 0, 0], [0, 0, 0], [0, 0, 0])


class TestSynthetic:
    def test_deterministic(self):
        assert dump_monomers(synth_monomers(5, 4)) == dump_monomers(synth_monomers(5, 4))
        assert dump_monomers(synth_monomers(5, 4)) != dump_monomers(synth_monomers(6, 4))

    @pytest.mark.parametrize("seed", range(5))
    def test_ranges_and_weak_coupling(self, seed):
        mons = synth_monomers(seed, 4)
        assert all(3.8 <= m.excitation_energy <= 4.4 for m in mons)
        assert all(1.0 <= np.linalg.norm(m.mu_ge) <= 3.0 for m in mons)
        for a, b in combinations(mons, 2):
            assert np.linalg.norm(a.position - b.position) >= 4.0
        c = exciton_coefficients(mons)
        pair = np.concatenate([c.XX.ravel(), c.XZ.ravel(), c.ZX.ravel(), c.ZZ.ravel()])
        assert np.all(np.isfinite(pair))
        assert np.max(np.abs(pair)) < min(m.excitation_energy for m in mons)


def test_thermal_units():
    assert beta_from_temperature(300) == pytest.approx(38.68, rel=1e-3)
    assert HBAR_EV_FS == pytest.approx(0.6582119569)


def test_exciton_builder_accepts_synthetic_tetramer():
    H = build_exciton_hamiltonian(synth_monomers(0, 4))
    assert isinstance(H, PauliSum) and H.n_qubits == 4
    assert all(isinstance(t, PauliTerm) for t in H.terms)
