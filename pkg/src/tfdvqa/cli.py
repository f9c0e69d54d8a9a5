"""Command-line front end: ``tfdvqa run --config cfg.json`` and ``tfdvqa synth-monomers``.

A run reads one JSON document, validates it, merges it over :data:`DEFAULTS`,
executes the command and writes CSV results plus ``manifest.json`` (resolved
config, package versions, wall-clock timing) into the output directory.

Exit codes: 0 success, 2 invalid configuration or input data, 3 numerical failure.

Defaults (every key can be overridden in the config file):

==========================  ===========  =========================================
key                         default      meaning
==========================  ===========  =========================================
model.kind                  tfi          ``tfi`` or ``exciton``
model.n_sites               4            TFI chain length
model.h                     1.5          TFI transverse field (initial field for quench)
model.monomers              null         exciton: path to a monomer JSON file
model.synthetic_seed        0            exciton without a file: seed for synthetic data
model.count                 4            exciton synthetic: number of monomers
physics.h_f                 2.5          quench: final transverse field
physics.beta                0.5          inverse temperature (1/energy); TFI
physics.temperature_K       300.0        exciton: temperature, overrides beta
physics.betas               [0,.25,.5,1] thermal-fidelity: beta sweep
physics.t_max               null         5.0 (spin, hbar=1) or 100 fs (exciton)
physics.dt                  null         0.01 (spin) or 0.1 fs (exciton)
physics.tau                 20.0         spectrum damping time (fs for exciton)
physics.axis                x            exciton dipole axis; TFI uses sigma^x
physics.site                0            TFI spectrum: site of the sigma^x probe
vqa.depth                   2            layered-ansatz depth for the dynamics
vqa.thermal_depth           null         thermal-prep depth (null: same as depth)
vqa.step                    null         flow step (null: dt for exciton, 0.01 spin)
vqa.thermal_step            null         imaginary-time step (null: 0.01 spin, 0.02/eV)
vqa.regularization          1e-6         Tikhonov shift on Re(M)
vqa.thermal_regularization  null         thermal-prep shift (null: regularization; 1e-4 exciton)
vqa.integrator              rk4          ``rk4`` or ``euler``
vqa.estimator               direct       ``direct`` or ``circuit`` (Hadamard tests)
vqa.shots                   null         circuit estimator shots (null: exact)
vqa.seed                    0            seed for initial kicks and shot noise
output.directory            out          where files go (``--output-dir`` wins)
output.formats              [csv]        add ``json`` for a summary.json
==========================  ===========  =========================================
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, oracle
from .dynamics import QuenchConfig, compute_correlation, run_quench, spectrum
from .errors import ConfigError, TFDError
from .models import (HBAR_EV_FS, TFIConfig, beta_from_temperature, build_dipole_operator,
                     build_exciton_hamiltonian, build_tfi, dump_monomers, load_monomers, synth_monomers)
from .statevector import PauliSum, PauliTerm
from .tfd import TFDSystem, prepare_thermal_state
from .vqa import FlowConfig

logger = logging.getLogger("tfdvqa")

DEFAULTS = {
    "command": None,
    "model": {"kind": "tfi", "n_sites": 4, "h": 1.5, "monomers": None, "synthetic_seed": 0, "count": 4},
    "physics": {"h_f": 2.5, "beta": 0.5, "temperature_K": 300.0, "betas": [0.0, 0.25, 0.5, 1.0],
                "t_max": None, "dt": None, "tau": 20.0, "axis": "x", "site": 0},
    "vqa": {"depth": 2, "thermal_depth": None, "step": None, "thermal_step": None, "regularization": 1e-6,
            "thermal_regularization": None, "integrator": "rk4", "estimator": "direct",
            "shots": None, "seed": 0},
    "output": {"directory": "out", "formats": ["csv"]},
}

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_opt_pos = {"type": ["number", "null"], "exclusiveMinimum": 0}
_opt_int = {"type": ["integer", "null"], "minimum": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command"],
    "properties": {
        "command": {"enum": ["quench", "spectrum", "thermal-fidelity", "oracle-compare"]},
        "model": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["tfi", "exciton"]},
                "n_sites": {"type": "integer", "minimum": 1, "maximum": 6},
                "h": _num,
                "monomers": {"type": ["string", "null"]},
                "synthetic_seed": {"type": "integer", "minimum": 0},
                "count": {"type": "integer", "minimum": 1, "maximum": 6},
            },
        },
        "physics": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "h_f": _num,
                "beta": {"type": "number", "minimum": 0},
                "temperature_K": _pos,
                "betas": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                "t_max": _opt_pos,
                "dt": _opt_pos,
                "tau": _pos,
                "axis": {"enum": ["x", "y", "z"]},
                "site": {"type": "integer", "minimum": 0},
            },
        },
        "vqa": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "depth": {"type": "integer", "minimum": 1},
                "thermal_depth": _opt_int,
                "step": _opt_pos,
                "thermal_step": _opt_pos,
                "regularization": {"type": "number", "minimum": 0},
                "thermal_regularization": {"type": ["number", "null"], "minimum": 0},
                "integrator": {"enum": ["rk4", "euler"]},
                "estimator": {"enum": ["direct", "circuit"]},
                "shots": _opt_int,
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "output": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "directory": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["csv", "json"]}, "uniqueItems": True},
            },
        },
    },
}


def _key_path(err: jsonschema.ValidationError) -> str:
    path = list(err.absolute_path)
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        path += extra[:1]
    elif err.validator == "required":
        path += [err.message.split("'")[1]]
    return ".".join(str(p) for p in path) or "<root>"


def validate_config(raw) -> None:
    errors = sorted(jsonschema.Draft202012Validator(CONFIG_SCHEMA).iter_errors(raw), key=lambda e: [str(p) for p in e.path])
    if errors:
        err = errors[0]
        raise ConfigError(f"config key '{_key_path(err)}': {err.message}")


def resolve_config(raw: dict) -> dict:
    """Validate ``raw`` and merge it over the defaults, then fill unit-dependent values."""
    validate_config(raw)
    cfg = copy.deepcopy(DEFAULTS)
    for key, value in raw.items():
        if isinstance(value, dict):
            cfg[key].update(value)
        else:
            cfg[key] = value
    phys, vqa = cfg["physics"], cfg["vqa"]
    molecular = cfg["model"]["kind"] == "exciton"
    if phys["t_max"] is None:
        phys["t_max"] = 100.0 if molecular else 5.0
    if phys["dt"] is None:
        phys["dt"] = 0.1 if molecular else 0.01
    if vqa["step"] is None:
        vqa["step"] = phys["dt"] if molecular else 0.01
    if vqa["thermal_step"] is None:
        vqa["thermal_step"] = 0.02 if molecular else 0.01
    if vqa["thermal_depth"] is None:
        vqa["thermal_depth"] = vqa["depth"]
    if vqa["thermal_regularization"] is None:
        # the long 300 K imaginary-time run needs a firmer shift than the real-time flow
        vqa["thermal_regularization"] = 1e-4 if molecular else vqa["regularization"]
    if molecular:
        phys["beta"] = beta_from_temperature(phys["temperature_K"])
    if cfg["command"] in ("quench", "oracle-compare") and molecular:
        raise ConfigError(f"config key 'model.kind': command {cfg['command']} needs the tfi model")
    if cfg["model"]["kind"] == "tfi" and cfg["command"] == "spectrum" \
            and phys["site"] >= cfg["model"]["n_sites"]:
        raise ConfigError("config key 'physics.site': outside the chain")
    return cfg


def _flow(cfg: dict, thermal: bool = False) -> FlowConfig:
    v = cfg["vqa"]
    return FlowConfig(step_size=v["thermal_step"] if thermal else v["step"],
                      regularization=v["thermal_regularization"] if thermal else v["regularization"],
                      integrator=v["integrator"], estimator="direct" if thermal else v["estimator"],
                      shots=v["shots"], seed=v["seed"])


def _model(cfg: dict, base_dir: Path):
    """Physical Hamiltonian, probe operator and hbar for the configured model."""
    m, phys = cfg["model"], cfg["physics"]
    if m["kind"] == "tfi":
        H = build_tfi(TFIConfig(m["n_sites"], m["h"]))
        probe = PauliSum([PauliTerm.from_sparse(m["n_sites"], {phys["site"]: "X"})])
        return H, probe, 1.0
    if m["monomers"] is not None:
        path = Path(m["monomers"])
        monomers = load_monomers(path if path.is_absolute() else base_dir / path)
    else:
        monomers = synth_monomers(m["synthetic_seed"], m["count"])
    return build_exciton_hamiltonian(monomers), build_dipole_operator(monomers, phys["axis"]), HBAR_EV_FS


def _grid(t_max: float, dt: float) -> np.ndarray:
    n = int(round(t_max / dt))
    return np.arange(n + 1) * dt


def _run_quench(cfg, out: Path, base_dir: Path) -> dict:
    m, phys, v = cfg["model"], cfg["physics"], cfg["vqa"]
    q = QuenchConfig(m["n_sites"], m["h"], phys["h_f"], phys["beta"], phys["t_max"], phys["dt"])
    res = run_quench(q, v["depth"], _flow(cfg), _flow(cfg, thermal=True), seed=v["seed"])
    res.to_csv(out / "quench.csv")
    return {"files": ["quench.csv"], "max_deviation": res.max_deviation(),
            "thermal_fidelity": res.thermal_fidelity}


def _run_spectrum(cfg, out: Path, base_dir: Path) -> dict:
    phys, v = cfg["physics"], cfg["vqa"]
    H, probe, hbar = _model(cfg, base_dir)
    series = compute_correlation(H, probe, probe, phys["beta"], _grid(phys["t_max"], phys["dt"]),
                                 ansatz_depth=v["depth"], flow_cfg=_flow(cfg), estimator=v["estimator"],
                                 hbar=hbar, thermal_cfg=_flow(cfg, thermal=True),
                                 thermal_depth=v["thermal_depth"], shots=v["shots"], seed=v["seed"])
    spec = spectrum(series, phys["tau"])
    series.to_csv(out / "correlation.csv")
    spec.to_csv(out / "spectrum.csv", scale=hbar)
    summary = {"files": ["correlation.csv", "spectrum.csv"], "thermal_fidelity": series.thermal_fidelity,
               "norm_factor": series.norm_factor}
    if series.exact is not None:
        c0 = abs(series.exact[0]) or 1.0
        summary["max_rel_deviation"] = float(np.max(np.abs(series.values - series.exact)) / c0)
    return summary


def _run_thermal(cfg, out: Path, base_dir: Path) -> dict:
    v = cfg["vqa"]
    H, _, _ = _model(cfg, base_dir)
    betas = cfg["physics"]["betas"] if cfg["model"]["kind"] == "tfi" else [cfg["physics"]["beta"]]
    rows = []
    for beta in betas:
        res = prepare_thermal_state(H, beta, v["thermal_depth"], _flow(cfg, thermal=True), seed=v["seed"])
        fid = float("nan") if res.fidelity_vs_oracle is None else res.fidelity_vs_oracle
        rows.append((beta, fid, float(res.energies[-1])))
    with open(out / "thermal_fidelity.csv", "w") as fh:
        fh.write("beta,fidelity,final_energy\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    return {"files": ["thermal_fidelity.csv"], "min_fidelity": min(r[1] for r in rows)}


def _run_oracle_compare(cfg, out: Path, base_dir: Path) -> dict:
    """Doubled-space exact propagation, partial-traced, against the Liouville-von Neumann oracle."""
    m, phys = cfg["model"], cfg["physics"]
    H_i = build_tfi(TFIConfig(m["n_sites"], m["h"]))
    H_f = build_tfi(TFIConfig(m["n_sites"], phys["h_f"]))
    times = _grid(phys["t_max"], phys["dt"])
    rho0, tfd0 = oracle.gibbs_state(H_i, phys["beta"])
    rhos = oracle.evolve_lvn(H_f, rho0, times)
    psis = oracle.propagate_state(TFDSystem(m["n_sites"], H_f).H_hat, tfd0, times)
    diffs = [float(np.max(np.abs(oracle.reduce_to_physical(p, m["n_sites"]) - r))) for p, r in zip(psis, rhos)]
    with open(out / "oracle_compare.csv", "w") as fh:
        fh.write("t,max_abs_rho_difference\n")
        for t, d in zip(times, diffs):
            fh.write(f"{float(t)!r},{d!r}\n")
    return {"files": ["oracle_compare.csv"], "max_abs_rho_difference": max(diffs)}


COMMANDS = {"quench": _run_quench, "spectrum": _run_spectrum,
            "thermal-fidelity": _run_thermal, "oracle-compare": _run_oracle_compare}


def _versions() -> dict:
    out = {"python": platform.python_version(), "tfdvqa": __version__}
    for pkg in ("numpy", "scipy", "numba", "jsonschema"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def run(config_path, output_dir=None) -> int:
    """Execute one experiment; returns the process exit status."""
    config_path = Path(config_path)
    try:
        raw = json.loads(config_path.read_text())
    except OSError as exc:
        logger.error("cannot read config: %s", exc)
        return 2
    except json.JSONDecodeError as exc:
        logger.error("config is not valid JSON: %s", exc)
        return 2
    try:
        cfg = resolve_config(raw)
        if output_dir is not None:
            cfg["output"]["directory"] = str(output_dir)
        out = Path(cfg["output"]["directory"])
        out.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        summary = COMMANDS[cfg["command"]](cfg, out, config_path.parent)
        elapsed = time.perf_counter() - start
    except ConfigError as exc:
        logger.error("%s", exc)
        return 2
    except (TFDError, ArithmeticError, np.linalg.LinAlgError) as exc:
        logger.error("numerical failure (%s): %s", type(exc).__name__, exc)
        return 3
    manifest = {"config": cfg, "versions": _versions(), "wall_clock_s": elapsed, "summary": summary}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=float) + "\n")
    if "json" in cfg["output"]["formats"]:
        (out / "summary.json").write_text(json.dumps(summary, indent=2, default=float) + "\n")
    logger.info("%s finished in %.1f s; outputs in %s", cfg["command"], elapsed, out)
    return 0


def synth(seed: int, count: int, out) -> int:
    if count < 1:
        logger.error("count must be >= 1")
        return 2
    Path(out).write_text(dump_monomers(synth_monomers(seed, count)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tfdvqa", description="Variational thermofield-dynamics experiments")
    sub = parser.add_subparsers(dest="cmd", required=True)
    p_run = sub.add_parser("run", help="run the experiment described by a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--output-dir", default=None)
    p_run.add_argument("--verbose", action="store_true")
    p_syn = sub.add_parser("synth-monomers", help="write a synthetic monomer JSON file")
    p_syn.add_argument("--seed", type=int, required=True)
    p_syn.add_argument("--count", type=int, required=True)
    p_syn.add_argument("--out", required=True)
    p_syn.add_argument("--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.cmd == "run":
        return run(args.config, args.output_dir)
    return synth(args.seed, args.count, args.out)


if __name__ == "__main__":
    sys.exit(main())
