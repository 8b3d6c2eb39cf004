"""Two-dimensional parameter maps built from pump sweeps.

Every map is split into independent tasks (a cavity-frequency row for
pump-cavity maps, a single cell otherwise).  Warm starts never cross a task
boundary, so the merged result does not depend on the order or the number of
workers.  ``USC_LASER_THREADS`` caps the worker count.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import InvalidParameter, NoThreshold, USCLaserError
from .harmonic_balance import (SolverConfig, detect_bistability, hysteresis_loop,
                               linearized_threshold, multistart_solve, pump_sweep)
from .model import Gauge, SystemParams, validate_params

RATIO_AXIS = "dephasing_ratio"
PARAM_AXES = tuple(f.name for f in fields(SystemParams) if f.name != "wa")


class TaskKind(str, enum.Enum):
    UP_DOWN_SWEEP = "up_down_sweep"
    THRESHOLD_ONLY = "threshold_only"
    MAX_INTENSITY_OVER_CAVITY = "max_intensity_over_cavity"
    BISTABLE_CEILING = "bistable_ceiling"


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    n: int
    scale: str = "linear"

    def __post_init__(self):
        if self.name not in PARAM_AXES + (RATIO_AXIS,):
            raise InvalidParameter("axis", f"unknown axis parameter {self.name!r}")
        if self.n < 2:
            raise InvalidParameter("axis", "need at least 2 points per axis")
        if self.scale not in ("linear", "log"):
            raise InvalidParameter("axis", f"unknown scale {self.scale!r}")
        if self.scale == "log" and not (self.lo > 0 and self.hi > 0):
            raise InvalidParameter("axis", "log axis needs positive bounds")

    @property
    def values(self):
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.n)
        return np.linspace(self.lo, self.hi, self.n)


def _default_wc_grid():
    # scanned from the atomic frequency downward
    return tuple(np.round(np.linspace(1.0, 0.05, 96), 10))


@dataclass(frozen=True)
class MapSpec:
    """What to compute on a two-parameter grid.

    ``axis1`` indexes rows and ``axis2`` columns.  For pump-cavity maps the
    axes are ``(wc, z_pump)``; the pump axis is swept, not solved per cell.
    ``pump`` is the pump at which cell colours are sampled and at which the
    cavity-scanning tasks run their sweeps (on ``pump_points`` points from 0).
    """

    axis1: Axis
    axis2: Axis
    template: SystemParams = SystemParams()
    gauge: Gauge = Gauge.COULOMB
    task: TaskKind = TaskKind.UP_DOWN_SWEEP
    solver: SolverConfig = SolverConfig()
    pump: float = 0.5
    pump_points: int = 101
    wc_grid: tuple = field(default_factory=_default_wc_grid)
    scan_bistability: bool = True

    def __post_init__(self):
        object.__setattr__(self, "gauge", Gauge.parse(self.gauge))
        object.__setattr__(self, "task", TaskKind(self.task))
        object.__setattr__(self, "wc_grid", tuple(float(w) for w in self.wc_grid))
        if not 0 < self.pump <= 0.5:
            raise InvalidParameter("pump", "sample pump must lie in (0, 1/2]")
        if self.pump_points < 2:
            raise InvalidParameter("pump_points", "need at least 2 pump points")

    @property
    def shape(self):
        return (self.axis1.n, self.axis2.n)

    def pump_grid(self):
        return np.linspace(0.0, self.pump, self.pump_points)


@dataclass(frozen=True)
class MapCell:
    z_th: float | None = None
    a1_sq_up: float = math.nan
    a1_sq_down: float = math.nan
    bistable: bool = False
    window: tuple | None = None
    z0: float = math.nan
    omega: float = math.nan
    converged: bool = True
    status: str = "ok"
    wc_best: float | None = None


@dataclass(frozen=True)
class MapResult:
    spec: MapSpec
    axis1_values: np.ndarray
    axis2_values: np.ndarray
    cells: tuple  # row-major tuple of tuples of MapCell

    def __post_init__(self):
        if (len(self.cells), len(self.cells[0]) if self.cells else 0) != self.spec.shape:
            raise ValueError("cell grid does not match the map spec")

    def cell(self, i, j):
        return self.cells[i][j]

    def field(self, name):
        return np.array([[getattr(c, name) if getattr(c, name) is not None else math.nan
                          for c in row] for row in self.cells], dtype=float)

    def bistable_rows(self):
        """Row-axis values with at least one bistable cell."""
        return [float(v) for v, row in zip(self.axis1_values, self.cells)
                if any(c.bistable for c in row)]

    def failures(self):
        return [(i, j, c.status) for i, row in enumerate(self.cells)
                for j, c in enumerate(row) if c.status != "ok"]


def params_at(template, assignments):
    """Template with axis values applied; the dephasing ratio keeps the
    template's total dephasing rate fixed."""
    changes = {}
    for name, value in assignments.items():
        if name == RATIO_AXIS:
            if not 0 <= value < 1:
                raise InvalidParameter(RATIO_AXIS, "ratio must lie in [0, 1)")
            total = template.gamma_total
            changes["gamma_phi"] = value * total
            changes["gamma_down"] = (1.0 - value) * total
        else:
            changes[name] = float(value)
    return validate_params(template.replace(**changes))


def worker_count(n_tasks):
    """Workers to use: ``USC_LASER_THREADS`` if set, else the CPU count."""
    raw = os.environ.get("USC_LASER_THREADS")
    cap = os.cpu_count() or 1
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise InvalidParameter("USC_LASER_THREADS", f"not an integer: {raw!r}") from None
        if cap < 1:
            raise InvalidParameter("USC_LASER_THREADS", "must be at least 1")
    return max(1, min(cap, n_tasks))


def _run_tasks(fn, tasks, workers=None):
    workers = worker_count(len(tasks)) if workers is None else max(1, min(workers, len(tasks)))
    if workers == 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so the merge is index-keyed
        return list(pool.map(fn, tasks, chunksize=1))


def _failed(err):
    return MapCell(converged=False, status=f"failed: {type(err).__name__}: {err}")


def _threshold_or_none(p, gauge):
    try:
        return linearized_threshold(p, gauge)[0]
    except NoThreshold:
        return None


# -- per-task workers (module level so they pickle) -------------------------

def _pump_row(task):
    spec, i = task
    wc = float(spec.axis1.values[i])
    pumps = spec.axis2.values
    try:
        p = params_at(spec.template, {spec.axis1.name: wc})
        z_th = _threshold_or_none(p, spec.gauge)
        if spec.scan_bistability:
            up, down = hysteresis_loop(p, spec.gauge, pumps, spec.solver)
            bistable, window = detect_bistability(up, down)
        else:
            up = pump_sweep(p, spec.gauge, sorted(pumps), cfg=spec.solver)
            down, bistable, window = None, False, None
    except USCLaserError as err:
        return tuple(_failed(err) for _ in pumps)
    row = []
    for k, pt in enumerate(up.points):
        dn = down.points[k].state.intensity if down is not None else math.nan
        ok = pt.converged and (down is None or down.points[k].converged)
        row.append(MapCell(z_th=z_th, a1_sq_up=pt.state.intensity, a1_sq_down=dn,
                           bistable=bistable, window=window, z0=pt.state.z0,
                           omega=pt.state.omega, converged=ok,
                           status="ok" if ok else "not converged"))
    return tuple(row)


def _threshold_cell(task):
    spec, i, j = task
    try:
        p = params_at(spec.template, {spec.axis1.name: spec.axis1.values[i],
                                      spec.axis2.name: spec.axis2.values[j]})
        z_th, omega = linearized_threshold(p, spec.gauge)
    except NoThreshold:
        return MapCell(status="ok")
    except USCLaserError as err:
        return _failed(err)
    return MapCell(z_th=z_th, omega=omega)


def _loop_at(p, spec):
    up, down = hysteresis_loop(p, spec.gauge, spec.pump_grid(), spec.solver)
    bistable, window = detect_bistability(up, down)
    return up, down, bistable, window


def find_bistable_cavity_ceiling(p_template, gauge, pump, wc_grid, cfg=SolverConfig(),
                                 pump_points=101):
    """Highest ``wc`` in ``wc_grid`` whose up/down sweeps to ``pump`` disagree.

    Returns ``(wc, up, down)`` or ``None``.  Cavity frequencies whose
    threshold exceeds ``pump`` are skipped without sweeping.
    """
    pumps = np.linspace(0.0, pump, pump_points)
    for wc in sorted((float(w) for w in wc_grid), reverse=True):
        p = validate_params(p_template.replace(wc=wc))
        z_th = _threshold_or_none(p, gauge)
        if z_th is None or z_th > pump:
            continue
        up, down = hysteresis_loop(p, gauge, pumps, cfg)
        if detect_bistability(up, down)[0]:
            return wc, up, down
    return None


def _ceiling_cell(task):
    spec, i, j = task
    try:
        p = params_at(spec.template, {spec.axis1.name: spec.axis1.values[i],
                                      spec.axis2.name: spec.axis2.values[j]})
        found = find_bistable_cavity_ceiling(p, spec.gauge, spec.pump, spec.wc_grid,
                                             spec.solver, spec.pump_points)
    except USCLaserError as err:
        return _failed(err)
    if found is None:
        return MapCell()
    wc, up, down = found
    top = up.points[-1].state
    _, window = detect_bistability(up, down)
    return MapCell(z_th=up.z_th, a1_sq_up=top.intensity,
                   a1_sq_down=down.points[-1].state.intensity, bistable=True,
                   window=window, z0=top.z0, omega=top.omega, wc_best=wc)


def _max_intensity_cell(task):
    """Largest |a1|^2 at the sample pump over the cavity grid.

    The up value is the end of an up-sweep; the down value is the largest
    coexisting root at the sample pump, which is where a down-sweep started
    without a seed begins.  The larger of the two is maximised over wc.
    """
    spec, i, j = task
    try:
        p0 = params_at(spec.template, {spec.axis1.name: spec.axis1.values[i],
                                       spec.axis2.name: spec.axis2.values[j]})
        best = MapCell(a1_sq_up=0.0, a1_sq_down=0.0)
        any_bistable = False
        for wc in spec.wc_grid:
            p = validate_params(p0.replace(wc=float(wc), z_pump=spec.pump))
            z_th = _threshold_or_none(p, spec.gauge)
            if z_th is None or z_th > spec.pump:
                continue
            up, down, bistable, window = _loop_at(p, spec)
            top = up.points[-1].state
            roots = multistart_solve(p, spec.gauge, spec.solver)[:-1]
            dn = roots[0].intensity if roots else 0.0
            any_bistable = any_bistable or bistable
            value = max(top.intensity, dn)
            if value > max(best.a1_sq_up, best.a1_sq_down):
                best = MapCell(z_th=z_th, a1_sq_up=top.intensity, a1_sq_down=dn,
                               bistable=bistable, window=window, z0=top.z0,
                               omega=top.omega, wc_best=float(wc))
    except USCLaserError as err:
        return _failed(err)
    return MapCell(**{**best.__dict__, "bistable": any_bistable})


def compute_map(spec, workers=None):
    """Evaluate ``spec`` and gather the cells into a :class:`MapResult`."""
    n1, n2 = spec.shape
    if spec.task is TaskKind.UP_DOWN_SWEEP:
        if spec.axis2.name != "z_pump":
            raise InvalidParameter("axis2", "sweep maps need z_pump as the column axis")
        if np.any(np.diff(spec.axis2.values) <= 0):
            raise InvalidParameter("axis2", "pump axis must be increasing")
        rows = _run_tasks(_pump_row, [(spec, i) for i in range(n1)], workers)
    else:
        fn = {TaskKind.THRESHOLD_ONLY: _threshold_cell,
              TaskKind.BISTABLE_CEILING: _ceiling_cell,
              TaskKind.MAX_INTENSITY_OVER_CAVITY: _max_intensity_cell}[spec.task]
        flat = _run_tasks(fn, [(spec, i, j) for i in range(n1) for j in range(n2)],
                          workers)
        rows = [tuple(flat[i * n2:(i + 1) * n2]) for i in range(n1)]
    return MapResult(spec, spec.axis1.values, spec.axis2.values, tuple(rows))


def map_pump_cavity(spec, workers=None):
    """Intensity map over (wc, pump): one up/down sweep per cavity row."""
    if spec.axis1.name != "wc" or spec.axis2.name != "z_pump":
        raise InvalidParameter("axes", "pump-cavity maps need axes (wc, z_pump)")
    return compute_map(MapSpec(**{**_spec_kwargs(spec), "task": TaskKind.UP_DOWN_SWEEP}),
                       workers)


def map_coupling_loss(spec, workers=None):
    """Per (g_tilde, kappa) cell: highest bistable wc at the sample pump."""
    if spec.axis1.name != "g_tilde" or spec.axis2.name != "kappa":
        raise InvalidParameter("axes", "coupling-loss maps need axes (g_tilde, kappa)")
    return compute_map(MapSpec(**{**_spec_kwargs(spec), "task": TaskKind.BISTABLE_CEILING}),
                       workers)


def map_dephasing_coupling(spec, workers=None):
    """Per (g_tilde, dephasing ratio) cell: maximal |a1|^2 over wc."""
    if spec.axis1.name != "g_tilde" or spec.axis2.name != RATIO_AXIS:
        raise InvalidParameter("axes", f"dephasing maps need axes (g_tilde, {RATIO_AXIS})")
    return compute_map(
        MapSpec(**{**_spec_kwargs(spec), "task": TaskKind.MAX_INTENSITY_OVER_CAVITY}),
        workers)


def _spec_kwargs(spec):
    return {f.name: getattr(spec, f.name) for f in fields(MapSpec)}
