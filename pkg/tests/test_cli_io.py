import hashlib
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from usc_laser import ConfigError, InvalidParameter, hysteresis_loop, detect_bistability
from usc_laser.cli import main
from usc_laser.config import RunConfig, parse_config
from usc_laser.records import (MAP_COLUMNS, SWEEP_COLUMNS, ResultRecord, csv_text,
                               read_csv, sweep_record, write_csv)
from usc_laser.svg import heatmap_svg, sweep_svg
from usc_laser.sweeps import Axis, MapSpec, map_pump_cavity


# -- configuration -------------------------------------------------------------

def test_minimal_config_gives_defaults():
    cfg = parse_config('{"params": {"wc": 0.25}}')
    assert cfg.params.wc == 0.25 and cfg.params.g_tilde == 0.15
    assert cfg.params.kappa == 0.01 and cfg.gauge.value == "coulomb"
    assert cfg.output.formats == ("csv", "json", "svg")
    assert cfg.task.axis1.name == "wc" and cfg.task.axis1.n == 81


def test_unknown_gauge_names_key():
    with pytest.raises(ConfigError) as e:
        parse_config('{"gauge": "weyl"}')
    assert e.value.key == "gauge"


@pytest.mark.parametrize("text,key", [
    ('{"params": {"wq": 1}}', "params.wq"),
    ('{"task": {"pump_grid": {"lo": 0, "hi": 1}}}', "task.pump_grid.n"),
    ('{"output": {"formats": ["png"]}}', "output.formats"),
    ('{"colour": 1}', "colour"),
])
def test_config_errors_name_key(text, key):
    with pytest.raises(ConfigError) as e:
        parse_config(text)
    assert e.value.key == key


def test_json_syntax_error_has_line():
    with pytest.raises(ConfigError) as e:
        parse_config('{\n "gauge": "dipole",\n}')
    assert e.value.line == 3


def test_invalid_parameter_passes_through():
    with pytest.raises(InvalidParameter):
        parse_config('{"params": {"kappa": -0.01}}')


def test_config_round_trip():
    cfg = parse_config('{"gauge": "dipole", "params": {"wc": 0.5},'
                       ' "task": {"map_kind": "coupling_loss", "solver": {"max_newton_iters": 40}},'
                       ' "output": {"formats": "csv,svg"}}')
    again = parse_config(cfg.to_json())
    assert again == cfg
    assert parse_config(RunConfig().to_json()) == parse_config("{}")


# -- records -------------------------------------------------------------------

@pytest.fixture(scope="module")
def sweep(base):
    p = base.replace(wc=1.0)
    up, down = hysteresis_loop(p, "coulomb", np.linspace(0, 0.05, 11))
    return up, down, sweep_record(up, down, None, *detect_bistability(up, down))


def test_sweep_csv_header_pinned(sweep, tmp_path):
    path = write_csv(sweep[2], tmp_path / "s.csv")
    header, rows = read_csv(path)
    assert header == list(SWEEP_COLUMNS)
    digest = hashlib.sha256(",".join(header).encode()).hexdigest()[:12]
    assert digest == hashlib.sha256(",".join(SWEEP_COLUMNS).encode()).hexdigest()[:12]
    assert SWEEP_COLUMNS[:4] == ("z_pump", "direction", "converged", "omega")
    assert SWEEP_COLUMNS[-3:] == ("abs_a1_sq", "abs_a3_sq", "residual_norm")
    assert len(rows) == 22


def test_sweep_rows(sweep):
    up, down, rec = sweep
    first, last = rec.rows[0], rec.rows[10]
    assert first["z_pump"] == 0 and first["abs_a1_sq"] == 0 and first["z0"] == 0
    assert last["direction"] == "up" and last["abs_a1_sq"] > 0
    # inversion is clamped near threshold above onset
    assert 0 < last["z0"] < last["z_pump"]
    assert last["z0"] == pytest.approx(up.z_th, rel=5e-2)
    down_pumps = [r["z_pump"] for r in rec.rows[11:]]
    assert down_pumps == sorted(down_pumps, reverse=True)
    assert {r["direction"] for r in rec.rows[11:]} == {"down"}


def test_csv_precision(sweep):
    text = csv_text(sweep[2])
    assert text.startswith("# usc-laser ")
    row = sweep[2].rows[10]
    line = text.splitlines()[12].split(",")
    assert float(line[3]) == row["omega"]  # 17 significant digits round-trip


def test_json_round_trip(sweep):
    rec = sweep[2]
    again = ResultRecord.from_json(rec.to_json())
    assert again == rec and again.to_json() == rec.to_json()


finite_or_not = st.one_of(st.floats(allow_nan=True, allow_infinity=True),
                          st.integers(-10**6, 10**6), st.booleans(), st.none(),
                          st.text(max_size=5))


@given(st.lists(st.tuples(finite_or_not, finite_or_not), max_size=8))
def test_json_round_trip_fuzz(pairs):
    rows = tuple({"a": x, "b": y} for x, y in pairs)
    rec = ResultRecord("fuzz", ("a", "b"), rows, {"n": len(rows)})
    again = ResultRecord.from_json(rec.to_json())
    assert again == rec
    for r in again.rows:
        for v in r.values():
            assert not (isinstance(v, float) and not math.isfinite(v))


# -- svg -----------------------------------------------------------------------

def test_sweep_svg_branches(base):
    grid = np.linspace(0, 0.5, 26)
    bi = hysteresis_loop(base.replace(wc=0.25), "coulomb", grid)
    mono = hysteresis_loop(base.replace(wc=1.0), "coulomb", grid)
    svg_bi = sweep_svg(*bi, detect_bistability(*bi)[0])
    svg_mono = sweep_svg(*mono, detect_bistability(*mono)[0])
    n_up = svg_bi.count('class="up"')
    assert n_up >= 3 and svg_bi.count('class="down"') == n_up
    assert svg_mono.count('class="up"') == n_up and 'class="down"' not in svg_mono
    for panel in ("intensity", "population", "frequency"):
        assert f'id="{panel}"' in svg_bi
    assert svg_bi == sweep_svg(*bi, True)


def test_heatmap_svg():
    res = map_pump_cavity(MapSpec(Axis("wc", 0.15, 0.35, 3), Axis("z_pump", 0, 0.5, 26)),
                          workers=1)
    svg = heatmap_svg(res, "t")
    assert 'id="threshold"' in svg and 'id="cells"' in svg
    assert svg.count("<circle") == len(res.bistable_rows()) > 0
    assert svg == heatmap_svg(res, "t")
    assert svg.startswith("<?xml") or svg.startswith("<svg")


# -- command line --------------------------------------------------------------

def _cfg(tmp_path, body):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(body))
    return str(path)


def test_cli_threshold(tmp_path, capsys):
    code = main(["threshold", "--out", str(tmp_path), "--format", "csv"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["z_th"] == pytest.approx(1.56e-2, rel=1e-2)
    assert {r["gauge"] for r in out["thresholds"]} == {"coulomb", "dipole"}
    assert (tmp_path / "threshold.csv").exists()


def test_cli_sweep_outputs(tmp_path, capsys):
    cfg = _cfg(tmp_path, {"params": {"wc": 0.25},
                          "task": {"pump_grid": {"lo": 0, "hi": 0.5, "n": 26}}})
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["bistable"] is True and out["unconverged"] == 0
    for ext in ("csv", "json", "svg"):
        assert (tmp_path / f"sweep.{ext}").stat().st_size > 0


def test_cli_map_small(tmp_path, capsys):
    cfg = _cfg(tmp_path, {"task": {"axis1": {"name": "wc", "lo": 0.2, "hi": 1.0, "n": 3},
                                   "axis2": {"name": "z_pump", "lo": 0, "hi": 0.5, "n": 11}}})
    assert main(["map", "--config", cfg, "--out", str(tmp_path), "--format", "csv"]) == 0
    header, rows = read_csv(tmp_path / "map.csv")
    assert header == list(MAP_COLUMNS) and len(rows) == 33


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["threshold", "--gauge", "weyl"]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config"
    assert main(["threshold", "--config", str(tmp_path / "missing.json")]) == 1
    assert main(["threshold", "--config", _cfg(tmp_path, {"params": {"kappa": -0.01}})]) == 1
    assert main(["nonsense"]) == 1
    bad = _cfg(tmp_path, {"task": {"z_pump": 0.05, "omega_frame": 1.0,
                                   "flow": "literal", "t_end": 5000}})
    assert main(["integrate", "--config", bad, "--out", str(tmp_path)]) == 2
    assert json.loads(capsys.readouterr().err.splitlines()[-1])["error"] == "solver"


def test_cli_verify(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path), "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ok"] and out["checked"] == 16 and not out["failed"]


def test_cli_verify_detects_corrupt_golden(tmp_path, capsys):
    from usc_laser.verify import golden_path
    data = json.loads(golden_path().read_text())
    data["roots"] = data["roots"][:1]
    data["roots"][0]["amp"] *= 1.01
    cfg = _cfg(tmp_path, {"task": {"golden": _cfg_path(tmp_path, data)}})
    assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 2


def _cfg_path(tmp_path, data):
    path = tmp_path / "golden.json"
    path.write_text(json.dumps(data))
    return str(path)
