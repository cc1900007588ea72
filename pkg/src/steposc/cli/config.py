"""Experiment configuration: nested YAML with defaults, validation and hashing."""
from __future__ import annotations

import copy
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from ..errors import ConfigError
from ..potentials import PotentialSpec, StepRegion
from ..schrodinger.hamiltonian import EXCLUDED, PENALTY

DEFAULTS: dict = {
    "potentials": {
        "omega": [1.0, math.sqrt(2.0)],
        "eps": [0.0, 0.0],
        "eps_sweep": None,  # list of [eps1, eps2]; spectrum runs each member
        "tabulated": None,  # {"axis1": csv, "axis2": csv} with columns q,V on q >= 0
    },
    "step": {"enabled": True, "q1_wall": 0.0, "q2_wall": 0.0, "mode": EXCLUDED},
    "grid": {"ppw": 8.0, "confinement": 1.8, "e_max": None, "memory_budget": 3.0e9},
    "solver": {"levels": 100, "tol": 1e-8, "slice_size": 140, "max_attempts": 8,
               "write_vectors": True, "csv_fields": False},
    "classical": {
        "energies": [5.625, 5.5],
        "angles": [0.3, 0.2],
        "state": None,  # explicit [q1, q2, p1, p2] instead of energies and angles
        "t_max": 200.0,
        "max_impacts": None,
        "dt": 1e-3,
        "dense_dt": 0.01,
        "periodicity_tol": 1e-8,
        "resonances": [],  # m values whose families are checked by a phase scan
    },
    "analysis": {
        "input": None,  # spectrum bundle directory or CSV for stats/concentration
        "unfolding": "mean-spacing",
        "local_window": None,
        "trim": 0.1,
        "collapse": "auto",
        "degeneracy_tol": 1e-6,
        "ks_method": "sample-points",
        "bins": 40,
        "windows": [[281, 300]],
        "threshold": 0.7,
        "log_density": True,
        "N": [151, 301],
        "dN": 10,
        "J": 400,
        "delta": 0.01,
        "x_scaled": [0.0, 0.05, 0.1, 0.25, 0.5, 1.0],
        "eps_ratio": 0.5,
        "ref_index": 301,
    },
    "output": {"dir": "out"},
    "seed": 0,
    "threads": 1,
}

_UNFOLDING = ("mean-spacing", "weyl", "polynomial")
_KS = ("sample-points", "two-sided")


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        p = f"{path}.{k}" if path else k
        if k not in base:
            raise ConfigError(f"{p}: unknown key")
        if isinstance(base[k], dict) and v is not None:
            if not isinstance(v, dict):
                raise ConfigError(f"{p}: expected a mapping")
            out[k] = _merge(base[k], v, p)
        else:
            out[k] = v
    return out


def _num(cfg, path, lo=None, hi=None, integer=False, allow_none=False, strict_lo=False):
    node = cfg
    for part in path.split("."):
        node = node[part]
    if node is None and allow_none:
        return
    ok = isinstance(node, (int, float)) and not isinstance(node, bool)
    if integer:
        ok = ok and float(node).is_integer()
    if not ok or not math.isfinite(float(node)):
        raise ConfigError(f"{path}: expected {'an integer' if integer else 'a number'}, got {node!r}")
    if lo is not None and (node <= lo if strict_lo else node < lo):
        raise ConfigError(f"{path}: must be {'>' if strict_lo else '>='} {lo}, got {node}")
    if hi is not None and node > hi:
        raise ConfigError(f"{path}: must be <= {hi}, got {node}")


def _pair(cfg, path, positive=False):
    sec, key = path.split(".")
    v = cfg[sec][key]
    if not (isinstance(v, (list, tuple)) and len(v) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
        raise ConfigError(f"{path}: expected two numbers, got {v!r}")
    if positive and any(x <= 0 for x in v):
        raise ConfigError(f"{path}: entries must be positive")


def validate(cfg: dict) -> dict:
    _pair(cfg, "potentials.omega", positive=True)
    _pair(cfg, "potentials.eps")
    sweep = cfg["potentials"]["eps_sweep"]
    if sweep is not None:
        if not isinstance(sweep, list) or not sweep:
            raise ConfigError("potentials.eps_sweep: expected a nonempty list of pairs")
        for i, e in enumerate(sweep):
            if not (isinstance(e, (list, tuple)) and len(e) == 2):
                raise ConfigError(f"potentials.eps_sweep[{i}]: expected [eps1, eps2]")
    tab = cfg["potentials"]["tabulated"]
    if tab is not None and not (isinstance(tab, dict) and set(tab) <= {"axis1", "axis2"}):
        raise ConfigError("potentials.tabulated: expected {axis1: path, axis2: path}")
    st = cfg["step"]
    for w in ("q1_wall", "q2_wall"):
        _num(cfg, f"step.{w}", hi=0.0)
    if st["mode"] not in (EXCLUDED, PENALTY):
        raise ConfigError(f"step.mode: expected {EXCLUDED!r} or {PENALTY!r}, got {st['mode']!r}")
    _num(cfg, "grid.ppw", lo=4.0)
    _num(cfg, "grid.confinement", lo=1.0, strict_lo=True)
    _num(cfg, "grid.e_max", lo=0.0, strict_lo=True, allow_none=True)
    _num(cfg, "grid.memory_budget", lo=0.0, strict_lo=True)
    _num(cfg, "solver.levels", lo=1, integer=True)
    _num(cfg, "solver.tol", lo=0.0, strict_lo=True)
    _num(cfg, "solver.slice_size", lo=2, integer=True)
    _num(cfg, "solver.max_attempts", lo=1, integer=True)
    c = cfg["classical"]
    if c["state"] is None:
        _pair(cfg, "classical.energies", positive=True)
        _pair(cfg, "classical.angles")
    elif not (isinstance(c["state"], list) and len(c["state"]) == 4):
        raise ConfigError("classical.state: expected [q1, q2, p1, p2]")
    _num(cfg, "classical.t_max", lo=0.0, strict_lo=True)
    _num(cfg, "classical.max_impacts", lo=1, integer=True, allow_none=True)
    _num(cfg, "classical.dt", lo=0.0, strict_lo=True)
    _num(cfg, "classical.dense_dt", lo=0.0, strict_lo=True)
    if not all(isinstance(m, int) and m > 0 for m in c["resonances"]):
        raise ConfigError("classical.resonances: expected positive integers")
    a = cfg["analysis"]
    if a["unfolding"] not in _UNFOLDING:
        raise ConfigError(f"analysis.unfolding: expected one of {_UNFOLDING}")
    if a["ks_method"] not in _KS:
        raise ConfigError(f"analysis.ks_method: expected one of {_KS}")
    if a["collapse"] not in ("auto", True, False):
        raise ConfigError("analysis.collapse: expected auto, true or false")
    _num(cfg, "analysis.trim", lo=0.0, hi=0.9)
    _num(cfg, "analysis.degeneracy_tol", lo=0.0)
    _num(cfg, "analysis.bins", lo=1, integer=True)
    _num(cfg, "analysis.local_window", lo=2, integer=True, allow_none=True)
    _num(cfg, "analysis.threshold", lo=0.0)
    _num(cfg, "analysis.dN", lo=1, integer=True)
    _num(cfg, "analysis.J", lo=1, integer=True)
    _num(cfg, "analysis.delta", lo=0.0, strict_lo=True, hi=1.0)
    _num(cfg, "analysis.eps_ratio", lo=0.0)
    _num(cfg, "analysis.ref_index", lo=1, integer=True)
    for i, w in enumerate(a["windows"]):
        if not (isinstance(w, (list, tuple)) and len(w) == 2 and all(isinstance(x, int) for x in w)
                and 1 <= w[0] <= w[1]):
            raise ConfigError(f"analysis.windows[{i}]: expected [first, last] with 1 <= first <= last")
    if not a["N"] or not all(isinstance(n, int) and n >= 1 for n in a["N"]):
        raise ConfigError("analysis.N: expected positive integers")
    if not all(isinstance(x, (int, float)) and x >= 0 for x in a["x_scaled"]):
        raise ConfigError("analysis.x_scaled: expected nonnegative numbers")
    _num(cfg, "seed", lo=0, integer=True)
    _num(cfg, "threads", lo=1, integer=True)
    return cfg


def build_config(overrides: Optional[dict] = None) -> dict:
    cfg = _merge(DEFAULTS, overrides or {})
    return validate(cfg)


def load_config(path: Optional[str] = None, base: Optional[dict] = None) -> dict:
    """Defaults, then ``base`` (e.g. a preset), then the file at ``path``."""
    cfg = _merge(DEFAULTS, base or {})
    if path is not None:
        p = Path(path)
        try:
            data = yaml.safe_load(p.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"{p}: not valid YAML ({exc})") from exc
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{p}: top level must be a mapping")
        cfg = _merge(cfg, data)
    return validate(cfg)


def canonical_json(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=float)


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def _read_table(path) -> PotentialSpec:
    from ..io import read_csv_columns
    cols = read_csv_columns(path, ["q", "V"])
    return PotentialSpec.tabulated(cols["q"], cols["V"])


def potentials(cfg: dict, eps=None):
    """``(V1, V2)`` for the configuration, optionally at another ``eps``."""
    pc = cfg["potentials"]
    e = pc["eps"] if eps is None else eps
    tab = pc["tabulated"] or {}
    out = []
    for i, key in enumerate(("axis1", "axis2")):
        if key in tab:
            out.append(_read_table(tab[key]))
        else:
            out.append(PotentialSpec.harmonic(float(pc["omega"][i]), float(e[i])))
    return tuple(out)


def step(cfg: dict) -> Optional[StepRegion]:
    s = cfg["step"]
    if not s["enabled"]:
        return None
    return StepRegion(float(s["q1_wall"]), float(s["q2_wall"]))


def is_resonant(cfg: dict) -> bool:
    w1, w2 = cfg["potentials"]["omega"]
    r = max(w1, w2) / min(w1, w2)
    return abs(r - round(r)) < 1e-12


def to_builtin(obj: Any):
    if isinstance(obj, dict):
        return {k: to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
