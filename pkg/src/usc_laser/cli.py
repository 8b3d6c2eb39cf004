"""Command-line entry point ``usc-laser``.

Exit status: 0 on success, 1 on a configuration or usage error, 2 on a
solver or dynamics failure (including a failed ``verify``).  Errors are
reported as one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .config import RunConfig, load_config
from .envelope import EnvelopeState, Flow, integrate
from .errors import ConfigError, InvalidParameter, NoThreshold, USCLaserError
from .harmonic_balance import (conventional_threshold, detect_bistability,
                               hysteresis_loop, linearized_threshold)
from .model import Gauge
from .records import (THRESHOLD_COLUMNS, ResultRecord, map_record, provenance,
                      sweep_record, trajectory_record, write_csv, write_json)
from .svg import heatmap_svg, render_svg, sweep_svg, trajectory_svg
from .sweeps import MapSpec, map_coupling_loss, map_dephasing_coupling, map_pump_cavity
from .verify import run_verification

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("<args>", message)


class VerificationFailed(USCLaserError):
    pass


def _emit(cfg, stem, record=None, svg=None):
    """Write the requested formats into the output directory."""
    out = cfg.output.directory
    os.makedirs(out, exist_ok=True)
    written = []
    if record is not None and "csv" in cfg.output.formats:
        written.append(write_csv(record, os.path.join(out, stem + ".csv")))
    if record is not None and "json" in cfg.output.formats:
        written.append(write_json(record, os.path.join(out, stem + ".json")))
    if svg is not None and "svg" in cfg.output.formats:
        written.append(render_svg(svg, os.path.join(out, stem + ".svg")))
    return written


def _print(obj):
    sys.stdout.write(json.dumps(obj, indent=1) + "\n")


def cmd_threshold(cfg):
    rows = []
    for gauge in Gauge:
        try:
            z_th, omega_th = linearized_threshold(cfg.params, gauge)
        except NoThreshold:
            z_th = omega_th = None
        z_conv, omega_conv = conventional_threshold(cfg.params)
        rows.append({"gauge": gauge.value, "z_th": z_th, "omega_th": omega_th,
                     "z_th_conventional": z_conv, "omega_conventional": omega_conv})
    record = ResultRecord("threshold", THRESHOLD_COLUMNS, tuple(rows),
                          provenance(cfg.params, cfg.gauge))
    _emit(cfg, "threshold", record)
    selected = next(r for r in rows if r["gauge"] == cfg.gauge.value)
    _print({"gauge": cfg.gauge.value, "z_th": selected["z_th"],
            "omega_th": selected["omega_th"], "thresholds": rows})
    return EXIT_OK


def cmd_sweep(cfg):
    t = cfg.task
    up, down = hysteresis_loop(cfg.params, cfg.gauge, t.pump_grid.values(), t.solver)
    bistable, window = detect_bistability(up, down)
    record = sweep_record(up, down, t.solver, bistable, window)
    title = f"{cfg.gauge.value} gauge, wc = {cfg.params.wc:.4g}"
    files = _emit(cfg, "sweep", record, sweep_svg(up, down, bistable, title))
    _print({"z_th": up.z_th, "omega_th": up.omega_th, "bistable": bistable,
            "window": list(window) if window else None,
            "unconverged": sum(not pt.converged for pt in up.points + down.points),
            "files": files})
    return EXIT_OK


_MAPS = {"pump_cavity": map_pump_cavity, "coupling_loss": map_coupling_loss,
         "dephasing_coupling": map_dephasing_coupling}


def cmd_map(cfg):
    t = cfg.task
    spec = MapSpec(axis1=t.axis1, axis2=t.axis2, template=cfg.params, gauge=cfg.gauge,
                   solver=t.solver, pump=t.map_pump, pump_points=t.map_pump_points,
                   wc_grid=tuple(t.wc_grid.values()))
    result = _MAPS[t.map_kind](spec)
    title = f"{t.map_kind.replace('_', '-')} map, {cfg.gauge.value} gauge"
    files = _emit(cfg, "map", map_record(result), heatmap_svg(result, title))
    _print({"kind": t.map_kind, "shape": list(spec.shape),
            "bistable_rows": result.bistable_rows(),
            "failures": len(result.failures()), "files": files})
    return EXIT_OK


def cmd_integrate(cfg):
    t = cfg.task
    p = cfg.params.with_pump(t.z_pump)
    frame = t.omega_frame
    if frame is None:
        frame = linearized_threshold(p, cfg.gauge)[1]
    s0 = EnvelopeState.perturbed_trivial(t.z_pump, frame, t.seed_amplitude)
    traj = integrate(s0, p, cfg.gauge, dt=t.dt, t_end=t.t_end, stride=t.stride,
                     flow=Flow(t.flow))
    title = f"{cfg.gauge.value} gauge, Z_inf = {t.z_pump:.4g}, frame {frame:.6g}"
    files = _emit(cfg, "trajectory", trajectory_record(traj), trajectory_svg(traj, title))
    fin = traj.final
    _print({"omega_frame": frame, "t_end": float(traj.times[-1]),
            "final_abs_a1": abs(fin["a1"]), "final_z0": fin.z0, "files": files})
    return EXIT_OK


def cmd_verify(cfg):
    ok, reports = run_verification(cfg.task.golden, cfg.task.solver)
    record = ResultRecord(
        "verify", ("gauge", "wc", "z_pump", "omega", "amp", "resolve_error",
                   "multistart_error", "oracle", "trivial_oracle", "ok"),
        tuple(reports), {"tool": "usc-laser", "version": __version__})
    _emit(cfg, "verify", record)
    _print({"ok": ok, "checked": len(reports),
            "failed": [i for i, r in enumerate(reports) if not r["ok"]]})
    if not ok:
        raise VerificationFailed(f"{sum(not r['ok'] for r in reports)} golden roots failed")
    return EXIT_OK


COMMANDS = {"threshold": cmd_threshold, "sweep": cmd_sweep, "map": cmd_map,
            "integrate": cmd_integrate, "verify": cmd_verify}


def build_parser():
    ap = _Parser(prog="usc-laser", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"usc-laser {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {"threshold": "lasing thresholds in both gauges",
             "sweep": "up/down pump sweep with hysteresis detection",
             "map": "two-parameter map (pump-cavity, coupling-loss, dephasing)",
             "integrate": "envelope dynamics from a perturbed trivial state",
             "verify": "golden-root and fixed-point oracle checks"}
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", help="JSON run configuration (defaults if omitted)")
        sp.add_argument("--gauge", choices=[g.value for g in Gauge])
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--format", help="comma list of csv,json,svg")
    return ap


def _error(kind, err):
    payload = {"error": kind, "type": type(err).__name__, "message": str(err)}
    for attr in ("key", "line", "field"):
        if getattr(err, attr, None) is not None:
            payload[attr] = getattr(err, attr)
    sys.stderr.write(json.dumps(payload) + "\n")


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = cfg.with_overrides(args.gauge, args.out, args.format)
        return COMMANDS[args.command](cfg)
    except (ConfigError, InvalidParameter) as err:
        _error("config", err)
        return EXIT_CONFIG
    except OSError as err:
        _error("config", err)
        return EXIT_CONFIG
    except USCLaserError as err:
        _error("solver", err)
        return EXIT_SOLVER
    except Exception as err:  # noqa: BLE001 - every path must map to an exit code
        _error("internal", err)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
