"""Run configuration: strict JSON parsing and the table of defaults.

A config file looks like::

    {
      "schema_version": 1,
      "system": {"type": "lv",
                 "regime0": {"a": 1, "b": 1, "c": 1, "d": 1},
                 "regime1": {"a": 2, "b": 2, "c": 1, "d": 1},
                 "k0": 1, "k1": 1},
      "params": {"horizon": 1000.0},
      "seed": 42
    }

Unknown keys anywhere are errors.  Every missing parameter is filled from
:data:`DEFAULTS`, and the resolved config is what gets echoed into outputs.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .linalg2 import TraceZeroMatrix2
from .lotka_volterra import LVRegime, SwitchedLVSystem
from .streams import check_seed
from .switched_linear import SwitchedLinearSystem

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration or input; maps to exit code 2."""


DEMO_LINEAR = {"type": "linear", "A0": [0.0, -1.0, 1.0, 0.0], "A1": [0.0, -2.0, 1.0, 0.0], "k0": 1.0, "k1": 1.0}
DEMO_LV = {
    "type": "lv",
    "regime0": {"a": 1.0, "b": 1.0, "c": 1.0, "d": 1.0},
    "regime1": {"a": 2.0, "b": 2.0, "c": 1.0, "d": 1.0},
    "k0": 1.0,
    "k1": 1.0,
}

_INTEGRATOR = {"tol_h": 1e-8, "h_init": 1e-2, "h_max": 0.05, "h_min": 1e-12}

# experiment -> (default system, parameter defaults)
DEFAULTS: dict[str, tuple[dict, dict]] = {
    "check": (DEMO_LV, {"tol": 1e-9}),
    "lyapunov": (DEMO_LINEAR, {
        "horizon": 1e4, "burn_in": None, "n_reps": 64, "theta0": 0.0, "mode0": 0,
        "n_grid": 1024, "agreement_stderr": 3.0, "agreement_floor": 1e-10,
    }),
    "density": (DEMO_LINEAR, {"n_grid": 1024, "compare_grid": 512, "tol": 1e-6}),
    "simulate": (DEMO_LV, {
        "horizon": 100.0, "n_output": 1001, "x0": 1.1, "y0": 1.0, "theta0": 0.0, "mode0": 0,
        "integrator": _INTEGRATOR,
    }),
    "exit-times": (DEMO_LV, {
        "epsilon": 0.1, "start_distance": 1e-3, "n": 1000, "horizon_cap": 1e3, "initial_mode": None,
        "max_censored": 0, "min_r2": 0.98, "integrator": _INTEGRATOR,
    }),
    "oscillation": (DEMO_LV, {
        "horizon": 1e4, "n": 100, "x0": 1.1, "y0": 1.0, "mode0": 0, "checkpoints": None,
        "threshold_decades": 2.0, "required_fraction": 0.95, "integrator": _INTEGRATOR,
    }),
    "transience": (DEMO_LV, {
        "horizon": 1e4, "n": 100, "x0": 1.1, "y0": 1.0, "mode0": 0,
        "checkpoints": [1e2, 2e2, 5e2, 1e3, 2e3, 5e3, 1e4], "reference_time": 1e2, "integrator": _INTEGRATOR,
    }),
    "sweep": (DEMO_LINEAR, {
        "kind": "rates", "values": [0.1, 1.0, 10.0], "n_grid": 1024,
        "epsilon": 0.1, "n": 200, "horizon_cap": 1e3, "initial_mode": None, "integrator": _INTEGRATOR,
    }),
}

TOP_LEVEL_KEYS = {"schema_version", "system", "params", "seed"}


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    system: dict
    params: dict
    seed: int

    def echo(self) -> dict:
        """Resolved config; feeding it back reproduces the run."""
        return {"schema_version": SCHEMA_VERSION, "system": self.system, "params": self.params, "seed": self.seed}

    def build_system(self):
        return build_system(self.system)


def _strict_keys(d: dict, allowed: set, where: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where} must be a number")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{where} must be finite")
    return v


def _matrix(v, where: str) -> TraceZeroMatrix2:
    if not isinstance(v, list) or len(v) != 4:
        raise ConfigError(f"{where} must be a row-major list of 4 numbers")
    m = [_number(x, f"{where}[{i}]") for i, x in enumerate(v)]
    try:
        return TraceZeroMatrix2.from_array([m[:2], m[2:]])
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _regime(v, where: str) -> LVRegime:
    _strict_keys(v, {"a", "b", "c", "d"}, where)
    missing = sorted({"a", "b", "c", "d"} - set(v))
    if missing:
        raise ConfigError(f"{where} is missing {', '.join(missing)}")
    vals = {k: _number(v[k], f"{where}.{k}") for k in "abcd"}
    try:
        return LVRegime(**vals)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def normalize_system(d: dict) -> dict:
    """Validate a system spec and return it with numbers as floats."""
    if not isinstance(d, dict) or d.get("type") not in ("linear", "lv"):
        raise ConfigError('system.type must be "linear" or "lv"')
    if d["type"] == "linear":
        _strict_keys(d, {"type", "A0", "A1", "k0", "k1"}, "system")
        out = {"type": "linear"}
        for key in ("A0", "A1"):
            if key not in d:
                raise ConfigError(f"system is missing {key}")
            out[key] = _matrix(d[key], f"system.{key}").to_list()
    else:
        _strict_keys(d, {"type", "regime0", "regime1", "k0", "k1"}, "system")
        out = {"type": "lv"}
        for key in ("regime0", "regime1"):
            if key not in d:
                raise ConfigError(f"system is missing {key}")
            out[key] = _regime(d[key], f"system.{key}").to_dict()
    for key in ("k0", "k1"):
        k = _number(d.get(key, 1.0), f"system.{key}")
        if not k > 0.0:
            raise ConfigError(f"system.{key} must be positive, got {k}")
        out[key] = k
    return out


def build_system(d: dict):
    d = normalize_system(d)
    if d["type"] == "linear":
        A0 = TraceZeroMatrix2.from_array([d["A0"][:2], d["A0"][2:]])
        A1 = TraceZeroMatrix2.from_array([d["A1"][:2], d["A1"][2:]])
        return SwitchedLinearSystem(A0, A1, d["k0"], d["k1"])
    return SwitchedLVSystem(LVRegime(**d["regime0"]), LVRegime(**d["regime1"]), d["k0"], d["k1"])


def _merge(defaults: dict, given: dict, where: str) -> dict:
    _strict_keys(given, set(defaults), where)
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(defaults[k], dict):
            out[k] = _merge(defaults[k], v, f"{where}.{k}")
        else:
            out[k] = v
    return out


def resolve(experiment: str, raw: dict | None = None, seed: int | None = None) -> RunConfig:
    """Validate ``raw`` for ``experiment`` and fill in defaults; ``seed`` overrides the file."""
    if experiment not in DEFAULTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    raw = {} if raw is None else raw
    _strict_keys(raw, TOP_LEVEL_KEYS, "config")
    if raw and raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    sys_default, par_default = DEFAULTS[experiment]
    system = normalize_system(raw.get("system", sys_default))
    params = _merge(par_default, raw.get("params", {}), "params")
    s = seed if seed is not None else raw.get("seed", 0)
    try:
        s = check_seed(s)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(experiment, system, params, s)


def load(path: str | Path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        with open(p) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from None
