"""YAML run configuration: schema, loading, digests and overrides.

Schema (documented here and in the README; unknown keys are rejected):

    qubits:
      omega_a: 1.0          # angular frequency, natural units
      omega_b: 1.0
      k_a: 0.0225           # dimensionless coupling ratios
      k_b: 0.0225
      x_a: 0.0              # positions, natural length units
      x_b: 3.141592653589793
    field:
      modes: 512            # total mode count before the cutoff
      omega_max: 30.0       # angular-frequency cutoff
      box_length: 25.132741228718345
      n_max: 2              # total photon-number truncation
      cutoff: sharp         # or soft
      omega_soft: null      # soft-cutoff scale, defaults to omega_max
    run:
      t_max: 6.283185307179586
      steps: 256
      tol: 1.0e-10
      initial_state: ea_gb_vacuum
    causality:              # optional, cmd_causality only
      guard_fraction: 0.95
      compare_perturbative: false
      convergence_ladder:   # optional list of field overrides
        - {modes: 1024, omega_max: 60.0}
    perturbation:           # optional, cmd_perturb only
      include_interference: true
    sweep:                  # optional, cmd_sweep only
      command: simulate
      axes:
        - key: qubits.x_b
          values: [1.57, 3.14, 6.28]
    design: {...}           # cmd_design, SI units (see expdesign)
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import yaml

from .dynamics import TimeGrid
from .errors import ConfigError
from .model import Discretization, ModelParams, RunConfig, validate

_TOP_LEVEL = {"qubits", "field", "run", "causality", "perturbation", "sweep", "design"}
_SECTION_KEYS = {
    "qubits": {"omega_a", "omega_b", "k_a", "k_b", "x_a", "x_b"},
    "field": {"modes", "omega_max", "box_length", "n_max", "cutoff", "omega_soft"},
    "run": {"t_max", "steps", "tol", "initial_state"},
    "causality": {"guard_fraction", "compare_perturbative", "convergence_ladder"},
    "perturbation": {"include_interference"},
    "sweep": {"command", "axes"},
}


@dataclass(frozen=True)
class RunSettings:
    grid: TimeGrid
    tol: float
    initial_state: str


def load_config(path) -> dict:
    """Parse and structurally check a YAML configuration file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError([f"config is not valid YAML: {exc}"]) from None
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a mapping of sections"])
    bad = []
    for key in raw:
        if key not in _TOP_LEVEL:
            bad.append(f"unknown section {key!r}")
    for section, allowed in _SECTION_KEYS.items():
        body = raw.get(section)
        if body is None:
            continue
        if not isinstance(body, dict):
            bad.append(f"section {section!r} must be a mapping")
            continue
        for key in body:
            if key not in allowed:
                bad.append(f"unknown key {section}.{key}")
    if bad:
        raise ConfigError(bad)
    return raw


def config_digest(raw: dict) -> str:
    """Content hash of a configuration (canonical JSON, sha256)."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=float)
    return hashlib.sha256(canon.encode()).hexdigest()


def _require(raw, section, key):
    body = raw.get(section) or {}
    if key not in body:
        raise ConfigError([f"missing required key {section}.{key}"])
    return body[key]


def build_run(raw: dict) -> tuple[RunConfig, RunSettings]:
    """Validated RunConfig plus grid/tolerance settings from a parsed config."""
    qubits = raw.get("qubits") or {}
    params = ModelParams(
        omega_a=float(_require(raw, "qubits", "omega_a")),
        omega_b=float(qubits.get("omega_b", qubits.get("omega_a"))),
        k_a=float(_require(raw, "qubits", "k_a")),
        k_b=float(qubits.get("k_b", qubits.get("k_a"))),
        x_a=float(qubits.get("x_a", 0.0)),
        x_b=float(qubits.get("x_b", math.pi)),
    )
    field = raw.get("field") or {}
    disc = Discretization(
        modes=int(_require(raw, "field", "modes")),
        omega_max=float(_require(raw, "field", "omega_max")),
        box_length=float(_require(raw, "field", "box_length")),
        n_max=int(_require(raw, "field", "n_max")),
        t_max=float(_require(raw, "run", "t_max")),
        cutoff=str(field.get("cutoff", "sharp")),
        omega_soft=None if field.get("omega_soft") is None else float(field["omega_soft"]),
    )
    cfg = validate(params, disc)
    run = raw.get("run") or {}
    settings = RunSettings(
        grid=TimeGrid(t_max=disc.t_max, steps=int(_require(raw, "run", "steps"))),
        tol=float(run.get("tol", 1e-10)),
        initial_state=str(run.get("initial_state", "ea_gb_vacuum")),
    )
    return cfg, settings


def apply_overrides(raw: dict, overrides: dict) -> dict:
    """A deep copy of raw with dotted-key overrides applied."""
    out = json.loads(json.dumps(raw, default=float))
    for dotted, value in overrides.items():
        node = out
        parts = dotted.split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                node[part] = {}
            node = node[part]
        node[parts[-1]] = value
    return out
