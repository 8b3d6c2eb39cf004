"""Flat result records, CSV and JSON serialization.

A :class:`ResultRecord` is a list of flat rows (dicts of numbers, strings,
booleans and ``None``) plus provenance.  CSV and JSON are written from the
same rows, so both formats carry identical numbers.  Non-finite floats are
stored as ``None`` so that the JSON form is standard and round-trips.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .envelope import COMPONENTS

UNITS = "frequencies and rates in units of the atomic frequency (wa = 1)"

SWEEP_COLUMNS = (
    "z_pump", "direction", "converged", "omega",
    "re_a1", "im_a1", "re_a3", "im_a3", "re_b1", "im_b1", "re_b3", "im_b3",
    "re_x1", "im_x1", "re_x3", "im_x3", "re_y1", "im_y1", "re_y3", "im_y3",
    "z0", "re_z2", "im_z2", "abs_a1_sq", "abs_a3_sq", "residual_norm",
)
MAP_COLUMNS = ("axis1", "axis2", "z_th", "abs_a1_sq_up", "abs_a1_sq_down",
               "bistable", "window_lo", "window_hi", "z0", "omega")
TRAJECTORY_COLUMNS = ("t",) + tuple(
    c if c == "z0" else f"{p}_{c}" for c in COMPONENTS for p in ("re", "im")
    if not (c == "z0" and p == "im"))
THRESHOLD_COLUMNS = ("gauge", "z_th", "omega_th", "z_th_conventional",
                     "omega_conventional")


def _clean(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if v is None or isinstance(v, str):
        return v
    raise TypeError(f"unsupported record value {v!r}")


def params_hash(params, gauge):
    blob = json.dumps({"params": params.as_dict(), "gauge": str(gauge.value)},
                      sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def provenance(params, gauge, solver=None, **extra):
    prov = {"tool": "usc-laser", "version": __version__, "units": UNITS,
            "gauge": gauge.value, "params": params.as_dict(),
            "params_hash": params_hash(params, gauge)}
    if solver is not None:
        prov["solver"] = {k: list(v) if isinstance(v, tuple) else v
                          for k, v in dataclasses.asdict(solver).items()}
    prov.update(extra)
    return prov


@dataclass(frozen=True)
class ResultRecord:
    kind: str
    columns: tuple
    rows: tuple
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        cols = tuple(self.columns)
        rows = tuple({c: _clean(r[c]) for c in cols} for r in self.rows)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "rows", rows)

    def to_json(self):
        return json.dumps({"kind": self.kind, "provenance": self.provenance,
                           "columns": list(self.columns), "rows": list(self.rows)},
                          indent=1, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(d["kind"], tuple(d["columns"]), tuple(d["rows"]), d["provenance"])


# -- row builders ------------------------------------------------------------

def _state_row(pt):
    s = pt.state
    row = {"z_pump": pt.z_pump, "direction": pt.direction.value,
           "converged": pt.converged, "omega": s.omega}
    for name in ("a1", "a3", "b1", "b3", "x1", "x3", "y1", "y3"):
        v = getattr(s, name)
        row[f"re_{name}"] = v.real
        row[f"im_{name}"] = v.imag
    row.update(z0=s.z0, re_z2=s.z2.real, im_z2=s.z2.imag,
               abs_a1_sq=abs(s.a1) ** 2, abs_a3_sq=abs(s.a3) ** 2,
               residual_norm=s.residual_norm)
    return row


def sweep_record(up, down=None, solver=None, bistable=None, window=None):
    """Up points in increasing pump order, then down points in the order the
    down-sweep visited them (decreasing pump)."""
    rows = [_state_row(pt) for pt in up.points]
    if down is not None:
        rows += [_state_row(pt) for pt in sorted(down.points, key=lambda q: -q.z_pump)]
    extra = {"z_th": up.z_th, "omega_th": up.omega_th}
    if bistable is not None:
        extra["bistable"] = bool(bistable)
        extra["window"] = list(window) if window else None
    return ResultRecord("sweep", SWEEP_COLUMNS, tuple(rows),
                        provenance(up.params, up.gauge, solver, **extra))


def map_record(result):
    spec = result.spec
    rows = []
    for i, a1 in enumerate(result.axis1_values):
        for j, a2 in enumerate(result.axis2_values):
            c = result.cells[i][j]
            lo, hi = c.window if c.window else (None, None)
            rows.append({"axis1": a1, "axis2": a2, "z_th": c.z_th,
                         "abs_a1_sq_up": c.a1_sq_up, "abs_a1_sq_down": c.a1_sq_down,
                         "bistable": c.bistable, "window_lo": lo, "window_hi": hi,
                         "z0": c.z0, "omega": c.omega})
    extra = {"task": spec.task.value,
             "axis1": dataclasses.asdict(spec.axis1),
             "axis2": dataclasses.asdict(spec.axis2),
             "pump": spec.pump, "pump_points": spec.pump_points,
             "wc_grid": list(spec.wc_grid),
             "bistable_rows": result.bistable_rows(),
             "wc_best": [[c.wc_best for c in row] for row in result.cells],
             "status": [[c.status for c in row] for row in result.cells]}
    return ResultRecord("map", MAP_COLUMNS, tuple(rows),
                        provenance(spec.template, spec.gauge, spec.solver, **extra))


def trajectory_record(traj):
    rows = []
    for t, c in zip(traj.times, traj.states):
        row = {"t": t}
        for name, v in zip(COMPONENTS, c):
            if name == "z0":
                row["z0"] = v.real
            else:
                row[f"re_{name}"] = v.real
                row[f"im_{name}"] = v.imag
        rows.append(row)
    extra = {"omega_frame": traj.omega_frame, "dt": traj.dt, "stride": traj.stride}
    extra.update(traj.extra)
    return ResultRecord("trajectory", TRAJECTORY_COLUMNS, tuple(rows),
                        provenance(traj.params, traj.gauge, None, **extra))


# -- writers -----------------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def csv_text(record):
    """CSV with one comment line (tool, version, units), then the header."""
    lines = [f"# usc-laser {__version__} {record.kind}; {UNITS}",
             ",".join(record.columns)]
    lines += [",".join(_fmt(r[c]) for c in record.columns) for r in record.rows]
    return "\n".join(lines) + "\n"


def write_csv(record, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(record))
    return path


def write_json(record, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(record.to_json())
    return path


def read_csv(path):
    """Rows of a CSV written by :func:`write_csv`, as strings."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [dict(zip(header, ln.split(","))) for ln in lines[1:]]
