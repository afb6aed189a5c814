import numpy as np
import pytest

from etstir.driver import CaseConfig, CaseResult, SweepRow, SweepTable
from etstir.io import (read_field, read_series_csv, read_sweep_csv, write_field,
                       write_json, write_series_csv, write_sweep_csv)
from etstir.plot import emit_plot, render_svg
from etstir.properties import DriveSpec


def fake_result(scale=1.0, t_steady=100.0):
    t = np.arange(0.0, 10.0, 2.0)
    series = np.column_stack([t, scale * t * 1e-9, np.full_like(t, 1e-5), np.full_like(t, 1e-5)])
    return CaseResult(series=series, dT_max=1.0 / 3, u_max=2e-3, v_down_max=1e-3,
                      t_steady=t_steady, ab_eq=2.1667e-8)


def fake_table(values):
    rows = [SweepRow(v, CaseConfig(drive=DriveSpec(v_rms=v)), fake_result(v + 1))
            for v in values]
    return SweepTable("voltage", rows)


def test_series_roundtrip_exact(tmp_path):
    s = fake_result().series
    s[1, 1] = 1 / 3
    p = write_series_csv(s, tmp_path / "s.csv")
    assert np.array_equal(read_series_csv(p), s)


def test_field_roundtrip(tmp_path):
    arr = np.random.default_rng(3).normal(size=(5, 7))
    p = write_field(tmp_path / "f.txt", "T", "K", arr, 1e-6, 2e-6)
    name, units, back = read_field(p)
    assert (name, units) == ("T", "K")
    assert np.array_equal(back, arr)
    with pytest.raises(ValueError):
        write_field(tmp_path / "g.txt", "x", "-", np.zeros(3), 1, 1)


def test_sweep_csv_not_reached_and_errors(tmp_path):
    table = fake_table([0.0, 25.0])
    table.rows[0].result.t_steady = None
    table.rows.append(SweepRow(30.0, CaseConfig(drive=DriveSpec(v_rms=30.0)), None,
                               "SolverError: boom"))
    p = write_sweep_csv(table, tmp_path / "sweep.csv")
    text = p.read_text()
    assert "not reached" in text
    rows = read_sweep_csv(p)
    assert rows[0]["t_steady_s"] is None
    assert rows[1]["dT_max_K"] == 1.0 / 3
    assert rows[2]["status"].startswith("error: SolverError")


def test_json_handles_numpy(tmp_path):
    p = write_json({"a": np.float64(1.5), "b": np.arange(3), "c": float("nan")},
                   tmp_path / "m.json")
    assert '"b": [\n    0,' in p.read_text()


def test_plot_constant_series_is_horizontal():
    t = np.arange(0.0, 10.0, 1.0)
    svg = render_svg([("flat", np.column_stack([t, np.full_like(t, 1e-8)]))])
    assert svg.count("<polyline") == 1
    pts = svg.split('points="')[1].split('"')[0].split()
    ys = {p.split(",")[1] for p in pts}
    assert len(ys) == 1


def test_plot_sweep_legend_ordered_by_value(tmp_path):
    table = fake_table([25.0, 0.0, 10.0, 5.0, 20.0, 15.0])
    svg = emit_plot(table, tmp_path / "p.svg").read_text()
    assert svg.count("<polyline") == 6
    labels = [svg.index(f"voltage = {v:g}<") for v in (0, 5, 10, 15, 20, 25)]
    assert labels == sorted(labels)
    assert "time (s)" in svg and "mol/m^2" in svg


def test_plot_deterministic(tmp_path):
    a = emit_plot(fake_table([0.0, 25.0]), tmp_path / "a.svg").read_bytes()
    b = emit_plot(fake_table([0.0, 25.0]), tmp_path / "b.svg").read_bytes()
    assert a == b


def test_plot_empty_rejected(tmp_path):
    with pytest.raises(ValueError):
        emit_plot([], tmp_path / "x.svg")
    with pytest.raises(ValueError):
        emit_plot(SweepTable("voltage", []), tmp_path / "x.svg")
