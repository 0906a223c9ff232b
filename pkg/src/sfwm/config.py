"""Run configuration: presets, TOML/JSON ingestion and validation."""

from __future__ import annotations

import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .errors import ParseError, UnknownPreset, ValidationError
from .params import PER_UM3, SystemParams

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

ENV_OUTPUT_DIR = "SFWM_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "sfwm-out"

MODES = ("steady-state", "validity-curve", "coefficient-scan", "drive-sweep",
         "g2", "full-report")

# C6 in gamma31 * cm^6, fixed once so that the validity boundary passes
# through (Omega_d = 17, 1 um^-3) at the reference parameters with
# Delta_15 = 24; see rydberg.calibrate_c6.
C6_CALIBRATED = 4.087654650181408e-23


@dataclass(frozen=True)
class Grid:
    min: float
    max: float
    count: int

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ValidationError("grid bounds must be finite")
        if not self.max > self.min:
            raise ValidationError("grid must be strictly increasing (max > min)")
        if int(self.count) != self.count or self.count < 2:
            raise ValidationError("grid count must be an integer >= 2")

    def values(self):
        import numpy as np
        return np.linspace(self.min, self.max, int(self.count))


@dataclass(frozen=True)
class Emit:
    csv: bool = True
    json: bool = True
    gnuplot: bool = False


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: SystemParams
    omega_grid: Grid
    omega_d_grid: Grid
    tau_grid: Optional[Grid] = None
    tau_window: Tuple[float, float] = (-2.0, 20.0)
    scan_axis: str = "omega"
    g2_omega_d: Tuple[float, ...] = (0.0, 12.0, 17.0)
    output_dir: str = DEFAULT_OUTPUT_DIR
    emit: Emit = field(default_factory=Emit)
    preset: Optional[str] = None
    threads: int = 1
    seed: int = 0
    nz: int = 32
    self_consistent_delta15: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"unknown mode {self.mode!r}; expected one of {MODES}", "mode")
        if self.scan_axis not in ("omega", "omega_d"):
            raise ValidationError("must be 'omega' or 'omega_d'", "scan_axis")
        if self.threads < 1:
            raise ValidationError("must be >= 1", "threads")
        if self.nz < 2:
            raise ValidationError("must be >= 2", "nz")
        lo, hi = self.tau_window
        if not hi > lo:
            raise ValidationError("tau window must be increasing", "tau_window")


# ---------------------------------------------------------------- presets
# Ground dephasing is gamma21, Rabi frequencies and detunings are in units of
# gamma31, and densities given per um^3 use 1 um^-3 = 1e12 cm^-3.
_BASE = dict(
    decay_41=1.0, decay_42=1.0, decay_31=1.0, decay_32=1.0,
    decay_53=1.0e-3, decay_54=1.0e-3, gamma21=1.0e-3,
    omega_p=1.2, omega_c=3.0, omega_d=1.2,
    delta_p=24.0, delta_c=0.0, delta_d=0.0, delta_15=24.0,
    density=1.0 * PER_UM3, cross_section=1.0e-9, length=0.01,
    c6=C6_CALIBRATED,
)

_OMEGA = Grid(-256.0, 256.0, 32768)
_OMEGA_SCAN = Grid(-8.0, 8.0, 2048)
_SWEEP = Grid(0.0, 17.0, 18)

PRESETS: Dict[str, Dict[str, Any]] = {
    # validity boundary; vertical marker at Omega_d = 17
    "figA": dict(mode="validity-curve", params=dict(_BASE, omega_d=17.0),
                 omega_grid=_OMEGA, omega_d_grid=Grid(1.0, 17.0, 65), scan_axis="omega"),
    # coefficients against omega at Omega_d = 1.2
    "figB": dict(mode="coefficient-scan", params=dict(_BASE),
                 omega_grid=_OMEGA_SCAN, omega_d_grid=_SWEEP, scan_axis="omega"),
    # coefficients at omega = 0 against Omega_d, step 0.25 on [0, 40]
    "figC": dict(mode="coefficient-scan", params=dict(_BASE),
                 omega_grid=_OMEGA_SCAN, omega_d_grid=Grid(0.0, 40.0, 161), scan_axis="omega_d"),
    # rates against Omega_d and g2 at three drive strengths
    "figD": dict(mode="drive-sweep", params=dict(_BASE),
                 omega_grid=_OMEGA, omega_d_grid=_SWEEP, scan_axis="omega"),
    "figF_a": dict(mode="drive-sweep", params=dict(_BASE, gamma21=0.1, omega_d=17.0),
                   omega_grid=_OMEGA, omega_d_grid=_SWEEP, scan_axis="omega",
                   g2_omega_d=(17.0,)),
    "figF_b": dict(mode="drive-sweep", params=dict(_BASE, density=0.5 * PER_UM3, omega_d=17.0),
                   omega_grid=_OMEGA, omega_d_grid=_SWEEP, scan_axis="omega",
                   g2_omega_d=(17.0,)),
}


def preset_params(name: str) -> SystemParams:
    if name not in PRESETS:
        raise UnknownPreset(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    return SystemParams(**PRESETS[name]["params"])


def preset(name: str, mode: Optional[str] = None) -> RunConfig:
    if name not in PRESETS:
        raise UnknownPreset(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    kw = dict(PRESETS[name])
    kw["params"] = SystemParams(**kw["params"])
    if mode is not None:
        kw["mode"] = mode
    return RunConfig(preset=name, **kw)


# ---------------------------------------------------------------- loading
_TOP_KEYS = {"mode", "preset", "params", "grids", "g2", "emit", "output_dir",
             "threads", "seed", "options"}
_GRID_KEYS = {"omega", "omega_d", "tau"}
_PARAM_KEYS = {f.name for f in dataclasses.fields(SystemParams)}
_COMPLEX_KEYS = {"omega_p", "omega_c", "omega_d"}


def _check_keys(d: dict, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ValidationError("expected a table/object", where)
    for k in d:
        if k not in allowed:
            raise ValidationError(f"unknown key {k!r}", f"{where}.{k}" if where else k)


def _number(v, where, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"expected a number, got {v!r}", where)
    if integer and int(v) != v:
        raise ValidationError("expected an integer", where)
    return int(v) if integer else float(v)


def _complex(v, where):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValidationError("complex value must be [re, im]", where)
        return complex(_number(v[0], where), _number(v[1], where))
    return _number(v, where)


def _grid(d, where):
    _check_keys(d, {"min", "max", "count"}, where)
    for k in ("min", "max", "count"):
        if k not in d:
            raise ValidationError("missing key", f"{where}.{k}")
    try:
        return Grid(_number(d["min"], f"{where}.min"), _number(d["max"], f"{where}.max"),
                    _number(d["count"], f"{where}.count", integer=True))
    except ValidationError as exc:
        raise ValidationError(str(exc), where) if exc.field is None else exc


def _param_value(k, v, where):
    if k in _COMPLEX_KEYS:
        return _complex(v, where)
    if v is None:
        return None
    return _number(v, where)


def parse_config(raw: dict, mode: Optional[str] = None,
                 preset_name: Optional[str] = None) -> RunConfig:
    """Validate a decoded config mapping into a RunConfig.

    ``mode`` and ``preset_name`` come from the command line; each must agree
    with the file when both are given.  Physical parameters supplied next to
    a preset must equal the preset's values.
    """
    _check_keys(raw, _TOP_KEYS, "")
    file_mode = raw.get("mode")
    if file_mode is not None and mode is not None and file_mode != mode:
        raise ValidationError(f"file says {file_mode!r} but command line says {mode!r}", "mode")
    mode = mode or file_mode
    if mode is None:
        raise ValidationError("no mode given", "mode")
    file_preset = raw.get("preset")
    if file_preset is not None and preset_name is not None and file_preset != preset_name:
        raise ValidationError(f"file selects {file_preset!r} but command line selects "
                              f"{preset_name!r}", "preset")
    preset_name = preset_name or file_preset

    user_params = raw.get("params", {})
    _check_keys(user_params, _PARAM_KEYS, "params")
    user_params = {k: _param_value(k, v, f"params.{k}") for k, v in user_params.items()}

    if preset_name is not None:
        base = preset(preset_name, mode)
        pdict = dataclasses.asdict(base.params)
        for k, v in user_params.items():
            if pdict.get(k) != v:
                raise ValidationError(
                    f"value {v!r} conflicts with preset {preset_name!r} ({pdict.get(k)!r})",
                    f"params.{k}")
        kw = {f.name: getattr(base, f.name) for f in dataclasses.fields(RunConfig)}
    else:
        pdict = dict(_BASE)
        pdict.update(user_params)
        kw = dict(mode=mode, params=None, omega_grid=_OMEGA, omega_d_grid=_SWEEP)
    try:
        kw["params"] = SystemParams(**pdict) if preset_name is None else kw["params"]
    except ValidationError as exc:
        raise ValidationError(str(exc).split(": ", 1)[-1], f"params.{exc.field}") from None
    kw["mode"] = mode

    grids = raw.get("grids", {})
    _check_keys(grids, _GRID_KEYS, "grids")
    if "omega" in grids:
        kw["omega_grid"] = _grid(grids["omega"], "grids.omega")
    if "omega_d" in grids:
        kw["omega_d_grid"] = _grid(grids["omega_d"], "grids.omega_d")
    if "tau" in grids:
        kw["tau_grid"] = _grid(grids["tau"], "grids.tau")

    g2 = raw.get("g2", {})
    _check_keys(g2, {"omega_d_values", "tau_window"}, "g2")
    if "omega_d_values" in g2:
        vals = g2["omega_d_values"]
        if not isinstance(vals, list) or not vals:
            raise ValidationError("expected a non-empty list", "g2.omega_d_values")
        kw["g2_omega_d"] = tuple(_number(v, "g2.omega_d_values") for v in vals)
    if "tau_window" in g2:
        tw = g2["tau_window"]
        if not isinstance(tw, list) or len(tw) != 2:
            raise ValidationError("expected [min, max]", "g2.tau_window")
        kw["tau_window"] = (_number(tw[0], "g2.tau_window"), _number(tw[1], "g2.tau_window"))

    emit = raw.get("emit", {})
    _check_keys(emit, {"csv", "json", "gnuplot"}, "emit")
    for k, v in emit.items():
        if not isinstance(v, bool):
            raise ValidationError("expected true/false", f"emit.{k}")
    if emit:
        kw["emit"] = dataclasses.replace(kw.get("emit") or Emit(), **emit)

    if "output_dir" in raw:
        if not isinstance(raw["output_dir"], str):
            raise ValidationError("expected a string", "output_dir")
        kw["output_dir"] = raw["output_dir"]
    else:
        kw["output_dir"] = os.environ.get(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR
    if "threads" in raw:
        kw["threads"] = _number(raw["threads"], "threads", integer=True)
    if "seed" in raw:
        kw["seed"] = _number(raw["seed"], "seed", integer=True)

    opts = raw.get("options", {})
    _check_keys(opts, {"self_consistent_delta15", "nz", "scan_axis"}, "options")
    if "self_consistent_delta15" in opts:
        if not isinstance(opts["self_consistent_delta15"], bool):
            raise ValidationError("expected true/false", "options.self_consistent_delta15")
        kw["self_consistent_delta15"] = opts["self_consistent_delta15"]
    if "nz" in opts:
        kw["nz"] = _number(opts["nz"], "options.nz", integer=True)
    if "scan_axis" in opts:
        kw["scan_axis"] = opts["scan_axis"]
    kw["preset"] = preset_name
    return RunConfig(**kw)


def load_config(path, mode: Optional[str] = None,
                preset_name: Optional[str] = None) -> RunConfig:
    """Read a .toml or .json file and validate it."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"{path}: no such file")
    text = path.read_bytes()
    suffix = path.suffix.lower()
    try:
        if suffix == ".toml":
            raw = tomllib.loads(text.decode("utf-8"))
        elif suffix == ".json":
            raw = json.loads(text.decode("utf-8"))
        else:
            raise ParseError(f"{path}: unsupported extension {suffix!r} (use .toml or .json)")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_config(raw, mode, preset_name)


def _jsonable_complex(v):
    v = complex(v)
    return v.real if v.imag == 0 else [v.real, v.imag]


def config_to_dict(cfg: RunConfig) -> dict:
    """Canonical, fully explicit mapping; ``parse_config`` inverts it."""
    p = dataclasses.asdict(cfg.params)
    for k in _COMPLEX_KEYS:
        p[k] = _jsonable_complex(p[k])
    out = {
        "mode": cfg.mode,
        "params": {k: v for k, v in p.items() if v is not None},
        "grids": {
            "omega": dataclasses.asdict(cfg.omega_grid),
            "omega_d": dataclasses.asdict(cfg.omega_d_grid),
        },
        "g2": {"omega_d_values": list(cfg.g2_omega_d), "tau_window": list(cfg.tau_window)},
        "emit": dataclasses.asdict(cfg.emit),
        "output_dir": cfg.output_dir,
        "threads": cfg.threads,
        "seed": cfg.seed,
        "options": {"self_consistent_delta15": cfg.self_consistent_delta15,
                    "nz": cfg.nz, "scan_axis": cfg.scan_axis},
    }
    if cfg.tau_grid is not None:
        out["grids"]["tau"] = dataclasses.asdict(cfg.tau_grid)
    return out
