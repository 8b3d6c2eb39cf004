"""Run configuration: strict JSON parsing with documented defaults.

A config has four optional blocks::

    {"params": {...}, "gauge": "coulomb", "task": {...}, "output": {...}}

Missing keys take the defaults below (the standard parameter set with
``g_tilde = 0.15``, ``kappa = 0.01``, ``gamma_down = 0.05``,
``gamma_phi = 0.1`` in units of the atomic frequency).  Unknown keys are
rejected.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidParameter
from .harmonic_balance import SolverConfig
from .model import Gauge, SystemParams, validate_params
from .sweeps import RATIO_AXIS, Axis

PARAM_KEYS = ("wa", "wc", "g_tilde", "kappa", "gamma_down", "gamma_phi")
FORMATS = ("csv", "json", "svg")
MAP_KINDS = ("pump_cavity", "coupling_loss", "dephasing_coupling")

# default axes per map kind: (axis1, axis2)
DEFAULT_AXES = {
    "pump_cavity": (Axis("wc", 0.05, 2.05, 81), Axis("z_pump", 0.0, 0.5, 101)),
    "coupling_loss": (Axis("g_tilde", 0.05, 0.45, 41), Axis("kappa", 0.001, 0.05, 41)),
    "dephasing_coupling": (Axis("g_tilde", 0.05, 0.45, 41),
                           Axis(RATIO_AXIS, 0.0, 0.95, 41)),
}


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    n: int

    def values(self):
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class TaskConfig:
    pump_grid: Grid = Grid(0.0, 0.5, 101)
    z_pump: float = 0.05
    map_kind: str = "pump_cavity"
    axis1: Axis | None = None
    axis2: Axis | None = None
    map_pump: float = 0.5
    map_pump_points: int = 101
    wc_grid: Grid = Grid(1.0, 0.05, 96)
    t_end: float = 1e4
    dt: float | None = None
    stride: int | None = None
    omega_frame: float | None = None
    seed_amplitude: float = 1e-3
    flow: str = "slow"
    golden: str | None = None
    solver: SolverConfig = SolverConfig()


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple = FORMATS


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams = SystemParams()
    gauge: Gauge = Gauge.COULOMB
    task: TaskConfig = TaskConfig()
    output: OutputConfig = OutputConfig()

    def to_dict(self):
        """Fully populated, normalized plain-data form (inverse of parsing)."""
        p = self.params.as_dict()
        p.pop("z_pump")
        t = {}
        for f in dataclasses.fields(TaskConfig):
            v = getattr(self.task, f.name)
            if isinstance(v, (Grid, Axis)):
                v = dataclasses.asdict(v)
            elif isinstance(v, SolverConfig):
                v = {k: list(x) if isinstance(x, tuple) else x
                     for k, x in dataclasses.asdict(v).items()}
            t[f.name] = v
        return {"params": p, "gauge": self.gauge.value, "task": t,
                "output": {"directory": self.output.directory,
                           "formats": list(self.output.formats)}}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def with_overrides(self, gauge=None, out=None, formats=None):
        cfg = self
        if gauge is not None:
            cfg = dataclasses.replace(cfg, gauge=_gauge(gauge))
        if out is not None or formats is not None:
            output = OutputConfig(
                directory=out if out is not None else cfg.output.directory,
                formats=_formats(formats) if formats is not None else cfg.output.formats)
            cfg = dataclasses.replace(cfg, output=output)
        return cfg


def _check_keys(block, allowed, where):
    if not isinstance(block, dict):
        raise ConfigError(where, "expected an object")
    for key in block:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}" if where else key, "unknown key")


def _number(v, key, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, "expected a number")
    if integer:
        if int(v) != v:
            raise ConfigError(key, "expected an integer")
        return int(v)
    return float(v)


def _gauge(v):
    if not isinstance(v, str):
        raise ConfigError("gauge", "expected a string")
    try:
        return Gauge.parse(v)
    except ValueError:
        raise ConfigError("gauge", f"unknown gauge {v!r}") from None


def _formats(v):
    items = v.split(",") if isinstance(v, str) else v
    if not isinstance(items, (list, tuple)):
        raise ConfigError("output.formats", "expected a list")
    out = []
    for f in items:
        f = str(f).strip().lower()
        if f not in FORMATS:
            raise ConfigError("output.formats", f"unknown format {f!r}")
        if f not in out:
            out.append(f)
    return tuple(out)


def _grid(v, key):
    _check_keys(v, ("lo", "hi", "n"), key)
    try:
        g = Grid(_number(v["lo"], key + ".lo"), _number(v["hi"], key + ".hi"),
                 _number(v["n"], key + ".n", integer=True))
    except KeyError as e:
        raise ConfigError(f"{key}.{e.args[0]}", "missing") from None
    if g.n < 1:
        raise ConfigError(key + ".n", "must be positive")
    return g


def _axis(v, key):
    _check_keys(v, ("name", "lo", "hi", "n", "scale"), key)
    try:
        return Axis(str(v["name"]), _number(v["lo"], key + ".lo"),
                    _number(v["hi"], key + ".hi"), _number(v["n"], key + ".n", True),
                    str(v.get("scale", "linear")))
    except KeyError as e:
        raise ConfigError(f"{key}.{e.args[0]}", "missing") from None
    except InvalidParameter as e:
        raise ConfigError(key, str(e)) from None


def _solver(v):
    names = [f.name for f in dataclasses.fields(SolverConfig)]
    _check_keys(v, names, "task.solver")
    changes = {}
    for k, x in v.items():
        default = getattr(SolverConfig(), k)
        if isinstance(default, tuple):
            if not isinstance(x, list):
                raise ConfigError(f"task.solver.{k}", "expected a list")
            changes[k] = tuple(_number(y, f"task.solver.{k}") for y in x)
        else:
            changes[k] = _number(x, f"task.solver.{k}", isinstance(default, int))
    try:
        return SolverConfig(**changes)
    except ValueError as e:
        raise ConfigError("task.solver", str(e)) from None


_TASK_NUMBERS = {"z_pump": False, "map_pump": False, "map_pump_points": True,
                 "t_end": False, "dt": False, "stride": True, "omega_frame": False,
                 "seed_amplitude": False}


def _task(v):
    names = [f.name for f in dataclasses.fields(TaskConfig)]
    _check_keys(v, names, "task")
    changes = {}
    for k, x in v.items():
        key = "task." + k
        if k in ("pump_grid", "wc_grid"):
            changes[k] = _grid(x, key)
        elif k in ("axis1", "axis2"):
            changes[k] = None if x is None else _axis(x, key)
        elif k == "solver":
            changes[k] = _solver(x)
        elif k == "map_kind":
            if x not in MAP_KINDS:
                raise ConfigError(key, f"unknown map kind {x!r}")
            changes[k] = x
        elif k == "flow":
            if x not in ("slow", "literal"):
                raise ConfigError(key, f"unknown flow {x!r}")
            changes[k] = x
        elif k == "golden":
            if x is not None and not isinstance(x, str):
                raise ConfigError(key, "expected a path string")
            changes[k] = x
        elif x is None and k in ("dt", "stride", "omega_frame"):
            changes[k] = None
        else:
            changes[k] = _number(x, key, _TASK_NUMBERS[k])
    task = TaskConfig(**changes)
    a1, a2 = DEFAULT_AXES[task.map_kind]
    return dataclasses.replace(task, axis1=task.axis1 or a1, axis2=task.axis2 or a2)


def parse_config(text):
    """Parse and validate a JSON run configuration.

    Raises :class:`ConfigError` (with the offending key and, for syntax
    errors, the line) or passes :class:`InvalidParameter` through.
    """
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise ConfigError("<json>", e.msg, line=e.lineno) from None
    _check_keys(raw, ("params", "gauge", "task", "output"), "")
    params = raw.get("params", {})
    _check_keys(params, PARAM_KEYS, "params")
    values = {k: _number(x, "params." + k) for k, x in params.items()}
    p = validate_params(SystemParams(**values))
    gauge = _gauge(raw.get("gauge", "coulomb"))
    task = _task(raw.get("task", {}))
    out = raw.get("output", {})
    _check_keys(out, ("directory", "formats"), "output")
    directory = out.get("directory", "out")
    if not isinstance(directory, str):
        raise ConfigError("output.directory", "expected a string")
    output = OutputConfig(directory, _formats(out.get("formats", list(FORMATS))))
    return RunConfig(p, gauge, task, output)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as e:
        raise ConfigError("--config", f"cannot read {path}: {e.strerror}") from None
