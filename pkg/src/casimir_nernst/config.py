"""Run configuration: a flat file of dotted keys with units in the key names.

Example::

    material.model = "drude"
    material.omega_p_mev = 9000
    material.relaxation = "bloch_gruneisen_residual"
    material.nu0_mev = 0.0345
    geometry.separation_m = 1e-6
    sweep.t_min_k = 0.01
    sweep.t_max_k = 800
    sweep.points = 25

The syntax is TOML, so strings are quoted and lists use brackets. Unknown
keys are rejected, which catches misspelled units.
"""

from __future__ import annotations

import math
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError
from .lifshitz import NumericControls, PlateSystem
from .materials import (
    AU_CALIB_NU_MEV,
    AU_CALIB_T_K,
    AU_DEBYE_K,
    AU_NU0_BEST_MEV,
    AU_NU0_TYPICAL_MEV,
    AU_OMEGA_P_MEV,
    BlochGruneisen,
    BlochGruneisenResidual,
    ConstantRelaxation,
    Drude,
    IdealMetal,
    Plasma,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["DEFAULTS", "RunConfig", "load_config"]

OMEGA_P_RANGE_MEV = (1e3, 1e5)
SEPARATION_RANGE_M = (1e-8, 1e-4)
TEMPERATURE_RANGE_K = (1e-8, 1e3)

MODELS = ("drude", "plasma", "ideal")
RELAXATIONS = ("constant", "bloch_gruneisen", "bloch_gruneisen_residual")

DEFAULTS: dict[str, Any] = {
    "material.model": "drude",
    "material.omega_p_mev": AU_OMEGA_P_MEV,
    "material.relaxation": "bloch_gruneisen_residual",
    "material.nu0_mev": AU_NU0_TYPICAL_MEV,
    "material.debye_t_k": AU_DEBYE_K,
    "material.calib_t_k": AU_CALIB_T_K,
    "material.calib_nu_mev": AU_CALIB_NU_MEV,
    "geometry.separation_m": 1e-6,
    "numerics.quad_rel_tol": 1e-9,
    "numerics.sum_rel_tol": 1e-8,
    "numerics.max_matsubara_terms": 5_000_000,
    "numerics.tail_method": "euler_maclaurin",
    "numerics.strong_ratio": 0.1,
    "numerics.jobs": 1,
    "sweep.temperatures_k": [],
    "sweep.t_min_k": 0.01,
    "sweep.t_max_k": 800.0,
    "sweep.points": 25,
    "sweep.m_max": 10,
    "sweep.n_freq": 10,
    "sweep.crossover_nu0_mev": [AU_NU0_TYPICAL_MEV, AU_NU0_BEST_MEV],
    "fit.temperatures_k": [],
    "fit.window_lo": 2e-5,
    "fit.window_hi": 2e-4,
    "fit.points": 8,
    "output.format": "csv",
    "output.path": "",
}


def _flatten(tree: dict, prefix: str = "") -> dict[str, Any]:
    flat = {}
    for key, value in tree.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        else:
            flat[name] = value
    return flat


def _coerce(key: str, value: Any) -> Any:
    default = DEFAULTS[key]
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string")
        return value
    if isinstance(default, list):
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{key} must be a list of numbers")
        return [float(v) for v in value]
    if isinstance(default, bool) or isinstance(value, bool):
        raise ConfigError(f"{key} must be a number")
    if isinstance(default, int):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer")
        return value
    if not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number")
    return float(value)


def _in_range(key: str, value: float, bounds: tuple[float, float]):
    lo, hi = bounds
    if not (math.isfinite(value) and lo <= value <= hi):
        raise ConfigError(f"{key} = {value!r} outside the allowed range [{lo:g}, {hi:g}]")


class RunConfig:
    """Resolved configuration: defaults overlaid with file and override values."""

    def __init__(self, values: dict[str, Any] | None = None):
        merged = dict(DEFAULTS)
        for key, value in (values or {}).items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = _coerce(key, value)
        self.values = merged
        self._validate()

    def __getitem__(self, key: str):
        return self.values[key]

    def resolved(self) -> dict[str, Any]:
        """All keys with defaults applied, sorted, for embedding in outputs."""
        return {k: self.values[k] for k in sorted(self.values)}

    def with_overrides(self, **values) -> "RunConfig":
        merged = dict(self.values)
        merged.update({k.replace("__", "."): v for k, v in values.items()})
        return RunConfig(merged)

    # ----------------------------------------------------------------- checks

    def _validate(self):
        v = self.values
        if v["material.model"] not in MODELS:
            raise ConfigError(f"material.model must be one of {MODELS}")
        if v["material.relaxation"] not in RELAXATIONS:
            raise ConfigError(f"material.relaxation must be one of {RELAXATIONS}")
        _in_range("material.omega_p_mev", v["material.omega_p_mev"], OMEGA_P_RANGE_MEV)
        _in_range("geometry.separation_m", v["geometry.separation_m"], SEPARATION_RANGE_M)
        for key in ("material.nu0_mev", "material.calib_nu_mev"):
            if not (math.isfinite(v[key]) and v[key] >= 0):
                raise ConfigError(f"{key} must be >= 0")
        for key in ("material.debye_t_k", "material.calib_t_k"):
            if not (math.isfinite(v[key]) and v[key] > 0):
                raise ConfigError(f"{key} must be > 0")
        for T in v["sweep.temperatures_k"]:
            # T = 0 is accepted as the exact zero-temperature limit
            if T != 0.0:
                _in_range("sweep.temperatures_k", T, TEMPERATURE_RANGE_K)
        for key in ("sweep.t_min_k", "sweep.t_max_k"):
            _in_range(key, v[key], TEMPERATURE_RANGE_K)
        if v["sweep.t_min_k"] > v["sweep.t_max_k"]:
            raise ConfigError("sweep.t_min_k must not exceed sweep.t_max_k")
        for key in ("sweep.points", "sweep.m_max", "sweep.n_freq", "numerics.jobs"):
            if v[key] < 1:
                raise ConfigError(f"{key} must be >= 1")
        if not 0 < v["numerics.strong_ratio"] <= 0.2:
            raise ConfigError("numerics.strong_ratio must be in (0, 0.2]")
        if any(not nu > 0 for nu in v["sweep.crossover_nu0_mev"]):
            raise ConfigError("sweep.crossover_nu0_mev values must be > 0")
        if not 0 < v["fit.window_lo"] < v["fit.window_hi"] <= 1:
            raise ConfigError("fit window fractions must satisfy 0 < window_lo < window_hi <= 1")
        if v["fit.points"] < 6:
            raise ConfigError("fit.points must be >= 6")
        for T in v["fit.temperatures_k"]:
            _in_range("fit.temperatures_k", T, TEMPERATURE_RANGE_K)
        if v["output.format"] not in ("csv", "json"):
            raise ConfigError("output.format must be csv or json")
        try:
            self.numeric()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    # --------------------------------------------------------------- builders

    def numeric(self) -> NumericControls:
        v = self.values
        return NumericControls(
            quad_rel_tol=v["numerics.quad_rel_tol"],
            sum_rel_tol=v["numerics.sum_rel_tol"],
            max_matsubara_terms=v["numerics.max_matsubara_terms"],
            tail_method=v["numerics.tail_method"],
        )

    def relaxation(self):
        v = self.values
        kind = v["material.relaxation"]
        if kind == "constant":
            return ConstantRelaxation(v["material.nu0_mev"])
        bg = dict(debye_t=v["material.debye_t_k"], calib_t=v["material.calib_t_k"],
                  calib_nu=v["material.calib_nu_mev"])
        if kind == "bloch_gruneisen":
            return BlochGruneisen(**bg)
        return BlochGruneisenResidual(nu0=v["material.nu0_mev"], **bg)

    def permittivity(self):
        v = self.values
        if v["material.model"] == "plasma":
            return Plasma(v["material.omega_p_mev"])
        if v["material.model"] == "ideal":
            return IdealMetal()
        return Drude(v["material.omega_p_mev"], self.relaxation())

    def system(self) -> PlateSystem:
        return PlateSystem(self["geometry.separation_m"], self.permittivity(), self.numeric())

    def temperatures(self) -> list[float]:
        """Sweep temperatures in K: the explicit list, else a log-spaced range."""
        v = self.values
        if v["sweep.temperatures_k"]:
            return list(v["sweep.temperatures_k"])
        if v["sweep.points"] == 1:
            return [v["sweep.t_min_k"]]
        return [float(t) for t in np.geomspace(v["sweep.t_min_k"], v["sweep.t_max_k"], v["sweep.points"])]


def load_config(path: str | Path | None = None) -> RunConfig:
    """Read a config file; ``None`` gives the defaults."""
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as fh:
            tree = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return RunConfig(_flatten(tree))
