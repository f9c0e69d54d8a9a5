"""Model Hamiltonians as Pauli sums.

Units for the exciton model: energies in eV, dipoles in atomic units (e * a0),
positions in angstrom. Dipole-dipole couplings come out in eV.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .errors import ConfigError, ContractError
from .statevector import PauliSum, PauliTerm

HARTREE_EV = 27.211386245988
BOHR_ANGSTROM = 0.529177210903
# (e a0)^2 / angstrom^3 -> eV
DIPOLE_COUPLING_EV = HARTREE_EV * BOHR_ANGSTROM**3
HBAR_EV_FS = 0.6582119569
KB_EV_PER_K = 8.617333262e-5


def beta_from_temperature(kelvin: float) -> float:
    """Inverse temperature in 1/eV."""
    return 1.0 / (KB_EV_PER_K * kelvin)


@dataclass(frozen=True)
class TFIConfig:
    n_sites: int
    h: float


def build_tfi(cfg: TFIConfig) -> PauliSum:
    """``-h sum_i X_i - sum_i Z_i Z_{i+1}`` on an open chain."""
    n = cfg.n_sites
    if n < 1:
        raise ConfigError(f"n_sites must be >= 1, got {n}")
    terms = [PauliTerm.from_sparse(n, {i: "X"}, -cfg.h) for i in range(n)]
    terms += [PauliTerm.from_sparse(n, {i: "Z", i + 1: "Z"}, -1.0) for i in range(n - 1)]
    return PauliSum(terms)


@dataclass(frozen=True)
class MonomerData:
    excitation_energy: float
    mu_gg: np.ndarray
    mu_ee: np.ndarray
    mu_ge: np.ndarray
    position: np.ndarray

    def __post_init__(self):
        for name in ("mu_gg", "mu_ee", "mu_ge", "position"):
            vec = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if vec.shape != (3,) or not np.all(np.isfinite(vec)):
                raise ConfigError(f"{name} must be a finite 3-vector, got {getattr(self, name)!r}")
            object.__setattr__(self, name, vec)
        if not self.excitation_energy > 0:
            raise ConfigError(f"excitation_energy must be > 0, got {self.excitation_energy}")

    def to_json(self) -> dict:
        return {
            "excitation_energy_ev": float(self.excitation_energy),
            "mu_gg": [float(x) for x in self.mu_gg],
            "mu_ee": [float(x) for x in self.mu_ee],
            "mu_ge": [float(x) for x in self.mu_ge],
            "position_angstrom": [float(x) for x in self.position],
        }


def dipole_coupling(mu_a, mu_b, r_ab, scale: float = DIPOLE_COUPLING_EV) -> float:
    """Point-dipole interaction ``[mu_a.mu_b - 3 (mu_a.r)(mu_b.r)] / |r|^3`` times ``scale``.

    ``scale`` defaults to the a.u.^2/angstrom^3 -> eV factor; pass 1.0 for
    raw dimensionless values.
    """
    mu_a, mu_b, r = (np.asarray(v, dtype=float) for v in (mu_a, mu_b, r_ab))
    dist = np.linalg.norm(r)
    if dist == 0.0:
        raise ContractError("dipole coupling at zero separation")
    rhat = r / dist
    return scale * (mu_a @ mu_b - 3.0 * (mu_a @ rhat) * (mu_b @ rhat)) / dist**3


@dataclass
class ExcitonCoefficients:
    E_scalar: float
    Z: np.ndarray
    X: np.ndarray
    # pair arrays are indexed [m, n] and only n < m is populated
    XX: np.ndarray
    XZ: np.ndarray
    ZX: np.ndarray
    ZZ: np.ndarray


def exciton_coefficients(monomers: list[MonomerData], scale: float = DIPOLE_COUPLING_EV) -> ExcitonCoefficients:
    """Pauli coefficients of the aggregate electronic Hamiltonian.

    One-body: ``(0|h|0) = (0|h|1) = 0`` and ``(1|h|1) = eps``, so ``S = eps/2``,
    ``D = -eps/2``, ``X = 0``. Two-body integrals use the point-dipole form with
    the effective dipoles of the S, D and T densities:
    ``mu_S = (mu_gg + mu_ee)/2``, ``mu_D = (mu_gg - mu_ee)/2``, ``mu_T = mu_ge``.
    """
    if not monomers:
        raise ConfigError("need at least one monomer")
    n = len(monomers)
    eps = np.array([m.excitation_energy for m in monomers])
    S, D = eps / 2.0, -eps / 2.0
    X1 = np.zeros(n)
    mu = {
        "S": [(m.mu_gg + m.mu_ee) / 2.0 for m in monomers],
        "D": [(m.mu_gg - m.mu_ee) / 2.0 for m in monomers],
        "T": [m.mu_ge for m in monomers],
    }

    def pair(a, m, b, k):
        r = monomers[k].position - monomers[m].position
        if np.linalg.norm(r) == 0.0:
            raise ContractError(f"monomers {m} and {k} share a position")
        return dipole_coupling(mu[a][m], mu[b][k], r, scale)

    E = S.sum()
    Zc = D.copy()
    Xc = X1.copy()
    XX, XZ, ZX, ZZ = (np.zeros((n, n)) for _ in range(4))
    for m in range(n):
        for k in range(n):
            if k == m:
                continue
            Zc[m] += pair("D", m, "S", k)
            Xc[m] += pair("T", m, "S", k)
            if k < m:
                E += pair("S", m, "S", k)
                XX[m, k] = pair("T", m, "T", k)
                XZ[m, k] = pair("T", m, "D", k)
                ZX[m, k] = pair("D", m, "T", k)
                ZZ[m, k] = pair("D", m, "D", k)
    return ExcitonCoefficients(float(E), Zc, Xc, XX, XZ, ZX, ZZ)


def build_exciton_hamiltonian(monomers: list[MonomerData], scale: float = DIPOLE_COUPLING_EV,
                              drop_atol: float = 0.0) -> PauliSum:
    c = exciton_coefficients(monomers, scale)
    n = len(monomers)
    terms = [PauliTerm("I" * n, c.E_scalar)]
    for m in range(n):
        terms.append(PauliTerm.from_sparse(n, {m: "Z"}, c.Z[m]))
        terms.append(PauliTerm.from_sparse(n, {m: "X"}, c.X[m]))
    for k, m in combinations(range(n), 2):
        # k < m; the first letter of each product acts on monomer m
        for name, (pm, pk) in (("XX", "XX"), ("XZ", "XZ"), ("ZX", "ZX"), ("ZZ", "ZZ")):
            terms.append(PauliTerm.from_sparse(n, {m: pm, k: pk}, getattr(c, name)[m, k]))
    return PauliSum([t for t in terms if abs(t.coefficient) > drop_atol])


_AXES = {"x": 0, "y": 1, "z": 2}


def build_dipole_operator(monomers: list[MonomerData], axis: str = "x") -> PauliSum:
    """``sum_m [mu_I I + mu_Z Z_m + mu_X X_m]`` for one Cartesian component."""
    if axis not in _AXES:
        raise ConfigError(f"axis must be one of x, y, z; got {axis!r}")
    k = _AXES[axis]
    n = len(monomers)
    identity = sum((m.mu_gg[k] + m.mu_ee[k]) / 2.0 for m in monomers)
    terms = [PauliTerm("I" * n, identity)]
    for i, m in enumerate(monomers):
        terms.append(PauliTerm.from_sparse(n, {i: "Z"}, (m.mu_gg[k] - m.mu_ee[k]) / 2.0))
        terms.append(PauliTerm.from_sparse(n, {i: "X"}, m.mu_ge[k]))
    return PauliSum(terms)


MONOMER_SCHEMA = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "object",
        "additionalProperties": False,
        "required": ["excitation_energy_ev", "mu_gg", "mu_ee", "mu_ge", "position_angstrom"],
        "properties": {
            "excitation_energy_ev": {"type": "number", "exclusiveMinimum": 0},
            **{key: {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
               for key in ("mu_gg", "mu_ee", "mu_ge", "position_angstrom")},
        },
    },
}


def monomers_from_json(data) -> list[MonomerData]:
    import jsonschema

    try:
        jsonschema.validate(data, MONOMER_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"monomer file invalid at {where}: {exc.message}") from exc
    return [
        MonomerData(d["excitation_energy_ev"], d["mu_gg"], d["mu_ee"], d["mu_ge"], d["position_angstrom"])
        for d in data
    ]


def load_monomers(path) -> list[MonomerData]:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return monomers_from_json(data)


def dump_monomers(monomers: list[MonomerData]) -> str:
    return json.dumps([m.to_json() for m in monomers], indent=2) + "\n"


def _random_direction(rng) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def synth_monomers(seed: int, count: int, spacing: float = 5.0, jitter: float = 0.4,
                   min_separation: float = 4.0) -> list[MonomerData]:
    """Deterministic stand-in for per-molecule electronic-structure data.

    Energies are drawn from 3.8-4.4 eV and transition dipoles from 1-3 a.u.,
    with roughly co-aligned transition dipoles as in a molecular crystal. Sites
    sit on a jittered cubic lattice, rejecting draws closer than
    ``min_separation``.
    """
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    side = int(np.ceil(count ** (1.0 / 3.0)))
    lattice = np.array([(i, j, k) for k in range(side) for j in range(side) for i in range(side)][:count],
                       dtype=float) * spacing
    axis = _random_direction(rng)
    monomers = []
    positions = []
    for site in lattice:
        while True:
            pos = site + rng.uniform(-jitter, jitter, size=3)
            if all(np.linalg.norm(pos - p) >= min_separation for p in positions):
                break
        positions.append(pos)
        eps = rng.uniform(3.8, 4.4)
        direction = axis + 0.3 * rng.normal(size=3)
        mu_ge = rng.uniform(1.0, 3.0) * direction / np.linalg.norm(direction)
        mu_gg = 0.3 * rng.normal(size=3)
        mu_ee = mu_gg + 0.5 * rng.normal(size=3)
        monomers.append(MonomerData(eps, mu_gg, mu_ee, mu_ge, pos))
    return monomers
