"""Golden-root regression and fixed-point oracle checks.

The golden file lists lasing roots (frequency, amplitude and third-harmonic
ratio) for a handful of parameter sets.  Verification re-solves each root
from its stored value, checks that a fresh multistart search finds it, and
substitutes the reconstructed state into the component equations.
"""
from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .envelope import fixed_point_residual
from .errors import SolverError
from .harmonic_balance import SolverConfig, multistart_solve, newton_solve
from .model import Gauge, ReducedUnknowns, SteadyState, SystemParams

ORACLE_TOL = 1e-9
MATCH_RTOL = 1e-8


def golden_path():
    return resources.files("usc_laser") / "data" / "golden_roots.json"


def _entry(p, gauge, s):
    return {"params": p.as_dict(), "gauge": gauge.value, "omega": s.omega,
            "amp": s.amp, "eta": [s.eta.real, s.eta.imag]}


def generate_golden(cases, cfg=SolverConfig()):
    """Every lasing root of each ``(params, gauge)`` case, as plain data."""
    out = []
    for p, gauge in cases:
        gauge = Gauge.parse(gauge)
        for s in multistart_solve(p, gauge, cfg)[:-1]:
            out.append(_entry(p, gauge, s))
    return out


def _close(u, v):
    a = np.array([u.omega, u.amp, u.eta.real, u.eta.imag])
    b = np.array([v.omega, v.amp, v.eta.real, v.eta.imag])
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def check_entry(entry, cfg=SolverConfig()):
    p = SystemParams(**entry["params"])
    gauge = Gauge.parse(entry["gauge"])
    want = ReducedUnknowns(entry["omega"], entry["amp"], complex(*entry["eta"]))
    report = {"gauge": gauge.value, "wc": p.wc, "z_pump": p.z_pump,
              "omega": want.omega, "amp": want.amp}
    try:
        root = newton_solve(want, p, gauge, cfg)
        report["resolve_error"] = _close(root.unknowns, want)
        report["oracle"] = fixed_point_residual(root, p)
    except SolverError as e:
        report["resolve_error"] = None
        report["oracle"] = None
        report["error"] = f"{type(e).__name__}: {e}"
    found = multistart_solve(p, gauge, cfg)
    report["multistart_error"] = min(
        (_close(s.unknowns, want) for s in found if s.is_lasing), default=None)
    report["trivial_oracle"] = fixed_point_residual(SteadyState.trivial(p.z_pump, gauge), p)
    report["ok"] = bool(
        report["resolve_error"] is not None and report["resolve_error"] < MATCH_RTOL
        and report["oracle"] < ORACLE_TOL
        and report["multistart_error"] is not None and report["multistart_error"] < MATCH_RTOL
        and report["trivial_oracle"] == 0.0)
    return report


def run_verification(path=None, cfg=SolverConfig()):
    """Check every golden entry; returns ``(all_ok, reports)``."""
    if path is None:
        text = golden_path().read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    entries = json.loads(text)["roots"]
    reports = [check_entry(e, cfg) for e in entries]
    return all(r["ok"] for r in reports), reports
