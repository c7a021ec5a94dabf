"""Sectioned key=value run configuration with strict validation.

The format is deliberately flat: `[section]` headers, `key = value`
lines, `#` comments. Unknown sections or keys are errors, every
diagnostic carries a line number, and a resolved config re-parses to an
identical structure.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from .core import (BoundaryData, GridSpec, KappaModel, PhysParams, PRESETS,
                   InvalidStateError)
from .solver import TimeConfig


class ConfigError(ValueError):
    pass


_SCHEMA = {
    "grid": {"n_cells": int},
    "physics": {"lambda": float, "mu": float, "nu": float, "gamma": float,
                "c_v": float, "kappa1": float, "kappa2": float, "q": float},
    "initial": {"preset": str},
    "boundary": {"preset": str, "amplitude": float, "ramp_period": float},
    "time": {"t_end": float, "cfl": float, "dt_max": float, "dt_min": float,
             "snapshot_stride": int},
    "output": {"directory": str, "formats": str},
    "sweep": {"mu_values": str, "bl_tol": float, "interior_deltas": str},
}

_DEFAULTS = {
    "grid": {},
    "physics": {"lambda": 1.0, "mu": 0.1, "nu": 1.0, "gamma": 1.4,
                "c_v": 1.0, "kappa1": 1.0, "kappa2": 0.0, "q": 2.0},
    "initial": {"preset": "uniform"},
    "boundary": {"preset": "zero", "amplitude": 1.0, "ramp_period": 0.25},
    "time": {"cfl": 0.4, "dt_max": 1e-2, "dt_min": 1e-10,
             "snapshot_stride": 1},
    "output": {"directory": "out", "formats": "csv,json"},
    "sweep": {"mu_values": "1e-2,1e-3,1e-4,1e-5", "bl_tol": -1.0,
              "interior_deltas": "0.05,0.1,0.2"},
}

_REQUIRED = {"grid": ("n_cells",), "time": ("t_end",)}

_BOUNDARY_PRESETS = ("zero", "constant", "cosine-ramp")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration, one attribute group per section."""

    raw: Dict[str, Dict[str, object]]

    def __getitem__(self, section: str) -> Dict[str, object]:
        return self.raw[section]

    def grid_spec(self) -> GridSpec:
        return GridSpec(self.raw["grid"]["n_cells"])

    def phys_params(self) -> PhysParams:
        p = self.raw["physics"]
        return PhysParams(lam=p["lambda"], mu=p["mu"], nu=p["nu"],
                          gamma=p["gamma"], c_v=p["c_v"],
                          kappa_model=KappaModel(kappa1=p["kappa1"],
                                                 kappa2=p["kappa2"],
                                                 q=p["q"]))

    def boundary_data(self) -> BoundaryData:
        b = self.raw["boundary"]
        if b["preset"] == "zero":
            return BoundaryData.zero()
        if b["preset"] == "constant":
            return BoundaryData.constant([b["amplitude"], 0.0])
        return BoundaryData.cosine_ramp(amplitude=b["amplitude"],
                                        ramp_period=b["ramp_period"])

    def time_config(self) -> TimeConfig:
        t = self.raw["time"]
        return TimeConfig(t_end=t["t_end"], cfl=t["cfl"],
                          dt_max=t["dt_max"], dt_min=t["dt_min"],
                          snapshot_stride=t["snapshot_stride"])

    def mu_values(self) -> Tuple[float, ...]:
        return tuple(float(v) for v in
                     str(self.raw["sweep"]["mu_values"]).split(","))

    def interior_deltas(self) -> Tuple[float, ...]:
        return tuple(float(v) for v in
                     str(self.raw["sweep"]["interior_deltas"]).split(","))

    def bl_tol(self) -> float:
        tol = self.raw["sweep"]["bl_tol"]
        if tol <= 0:       # default: relative to the boundary amplitude
            return 0.05 * max(self.raw["boundary"]["amplitude"], 1e-12)
        return tol


def parse_config(text: str) -> RunConfig:
    """Parse and validate, resolving all defaults."""
    values: Dict[str, Dict[str, object]] = {s: dict(d)
                                            for s, d in _DEFAULTS.items()}
    seen: Dict[str, Dict[str, int]] = {s: {} for s in _SCHEMA}
    section: Optional[str] = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section "
                                  f"[{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got "
                              f"{line!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any section")
        key, _, val = (s.strip() for s in line.partition("="))
        if key not in _SCHEMA[section]:
            raise ConfigError(f"line {lineno}: unknown key "
                              f"{section}.{key}")
        if key in seen[section]:
            raise ConfigError(f"line {lineno}: duplicate key "
                              f"{section}.{key} (first at line "
                              f"{seen[section][key]})")
        seen[section][key] = lineno
        typ = _SCHEMA[section][key]
        try:
            values[section][key] = typ(val)
        except ValueError:
            raise ConfigError(f"line {lineno}: {section}.{key} must be "
                              f"{typ.__name__}, got {val!r}") from None
    for section, keys in _REQUIRED.items():
        for key in keys:
            if key not in values[section]:
                raise ConfigError(f"missing required key {section}.{key}")
    _validate(values, seen)
    return RunConfig(raw=values)


def _validate(values, seen):
    def where(section, key):
        line = seen[section].get(key)
        return f"line {line}: " if line is not None else ""

    cfg = RunConfig(raw=values)
    try:
        cfg.grid_spec()
    except InvalidStateError as exc:
        raise ConfigError(f"{where('grid', 'n_cells')}grid.n_cells: "
                          f"{exc}") from None
    phys = values["physics"]
    for key in ("lambda", "nu", "gamma", "c_v", "kappa1", "q"):
        if phys[key] <= 0:
            raise ConfigError(f"{where('physics', key)}physics.{key} "
                              f"must be positive")
    if phys["mu"] < 0:
        raise ConfigError(f"{where('physics', 'mu')}physics.mu must be "
                          f"nonnegative")
    if phys["kappa2"] < 0:
        raise ConfigError(f"{where('physics', 'kappa2')}physics.kappa2 "
                          f"must be nonnegative")
    if values["initial"]["preset"] not in PRESETS:
        raise ConfigError(f"{where('initial', 'preset')}initial.preset "
                          f"must be one of {PRESETS}")
    if values["boundary"]["preset"] not in _BOUNDARY_PRESETS:
        raise ConfigError(f"{where('boundary', 'preset')}boundary.preset "
                          f"must be one of {_BOUNDARY_PRESETS}")
    if values["boundary"]["ramp_period"] <= 0:
        raise ConfigError(f"{where('boundary', 'ramp_period')}"
                          f"boundary.ramp_period must be positive")
    try:
        cfg.time_config()
    except ValueError as exc:
        raise ConfigError(f"time section invalid: {exc}") from None
    try:
        mus = cfg.mu_values()
    except ValueError:
        raise ConfigError(f"{where('sweep', 'mu_values')}sweep.mu_values "
                          f"must be a comma list of floats") from None
    if any(m <= 0 for m in mus):
        raise ConfigError(f"{where('sweep', 'mu_values')}sweep.mu_values "
                          f"must be strictly positive")
    if any(b >= a for a, b in zip(mus, mus[1:])):
        raise ConfigError(f"{where('sweep', 'mu_values')}sweep.mu_values "
                          f"must be strictly decreasing")


def render_config(cfg: RunConfig) -> str:
    """Canonical text form; re-parsing yields an identical structure."""
    lines = []
    for section in _SCHEMA:
        lines.append(f"[{section}]")
        for key in _SCHEMA[section]:
            if key not in cfg.raw[section]:
                continue
            val = cfg.raw[section][key]
            if isinstance(val, float):
                val = f"{val:.17g}"
            lines.append(f"{key} = {val}")
        lines.append("")
    return "\n".join(lines)


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(render_config(cfg).encode()).hexdigest()[:12]
