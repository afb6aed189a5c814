import json
import os
from pathlib import Path

import numpy as np
import pytest

from etstir import cli
from etstir.config import (bundled_configs, dump_run, load_run, parse_run,
                           resolve_config_path)
from etstir.errors import ConfigError
from etstir.io import read_series_csv, read_sweep_csv

QUICK = ["nx=128", "ny=64", "t_max=10"]


def test_bundled_configs_present():
    names = set(bundled_configs())
    assert {"paper_table42.cfg", "fig41_width.cfg", "fig42_gap.cfg", "fig43_frequency.cfg",
            "fig45_voltage.cfg", "single_case.cfg"} <= names
    for name in names:
        load_run(resolve_config_path(name))


def test_voltage_table_config_rows():
    spec = load_run(resolve_config_path("paper_table42.cfg"))
    assert spec.mode == "sweep" and spec.axis == "voltage"
    assert spec.values == (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)


def test_overrides_and_molar_units():
    spec = parse_run("[run]\nmode = case\n", ["drive.v_rms=0", "reaction.k_a_per_molar_s=2600",
                                              "reaction.a_inlet_molar=1e-5", "props.D=2e-10"])
    assert spec.case.drive.v_rms == 0.0
    assert spec.case.reaction.k_a == pytest.approx(2.6)
    assert spec.case.reaction.a_inlet == pytest.approx(1e-2)
    assert spec.case.props.D == 2e-10


def test_frequency_sweep_override():
    spec = parse_run("", ["mode=sweep", "axis=frequency", "values=1e5,1e6,1e7,1e8,1e9"])
    assert spec.values == (1e5, 1e6, 1e7, 1e8, 1e9)


def test_dump_roundtrip():
    spec = parse_run("[geometry]\ncantilever_center = 2.4e-4, 2.2e-5\n[thermal]\nwalls = isothermal\n",
                     ["drive.frequency=123456.789", "label=x"])
    again = parse_run(dump_run(spec))
    assert again == spec


@pytest.mark.parametrize("text,fragment", [
    ("[drive]\nvolts = 3\n", "unknown key [drive] volts"),
    ("[nonsense]\na = 1\n", "unknown section"),
    ("[drive]\nv_rms = lots\n", "bad value"),
    ("[run]\nmode = sweep\n", "needs [run] values"),
    ("[run]\nmode = batch\n", "mode must be"),
    ("[drive\nv_rms = 1\n", "cannot parse"),
    ("[run]\nnx = 1.5\n", "not an integer"),
])
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError, match=None) as info:
        parse_run(text)
    assert fragment in str(info.value)


def test_parse_error_reports_line(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("[run]\nmode = case\nthis line is broken\n")
    with pytest.raises(ConfigError) as info:
        load_run(p)
    assert "line 3" in str(info.value)


def test_bad_override_syntax():
    with pytest.raises(ConfigError):
        parse_run("", ["drive.v_rms"])
    with pytest.raises(ConfigError):
        parse_run("", ["drive.volume=3"])


def test_missing_config():
    with pytest.raises(ConfigError):
        resolve_config_path("no_such_config.cfg")


@pytest.fixture(scope="module")
def case_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("case")
    m = cli.run_from_config("single_case.cfg", QUICK, out_dir=out, dump_fields=True, plot=True)
    return out, m


def test_case_artifacts(case_run):
    out, m = case_run
    kinds = {k for k, _ in m.artifacts}
    assert kinds == {"series_csv", "field_dump", "plot_svg", "metadata"}
    for _, p in m.artifacts:
        assert p.exists()
    series = read_series_csv(m.paths("series_csv")[0])
    assert series.shape == (6, 4)
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["config"]["drive"]["v_rms"] == 25.0
    assert "assumptions" in meta
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["artifacts"]) == len(m.artifacts)
    assert m.wall_times


def test_csv_is_full_precision(case_run):
    _, m = case_run
    lines = m.paths("series_csv")[0].read_text().splitlines()
    assert lines[0] == "t_seconds,mean_coverage_mol_per_m2,min_a,max_a"
    for field in lines[1].split(","):
        mant = field.split("e")[0]
        assert len(mant.split(".")[1]) == 17


def test_rerun_from_resolved_config_is_identical(case_run, tmp_path):
    out, m = case_run
    m2 = cli.run_from_config(out / "resolved.cfg", [], out_dir=tmp_path)
    a = m.paths("series_csv")[0].read_bytes()
    b = m2.paths("series_csv")[0].read_bytes()
    assert a == b


def test_zero_voltage_override(tmp_path):
    m = cli.run_from_config("single_case.cfg", QUICK + ["drive.v_rms=0"], out_dir=tmp_path)
    from dataclasses import replace
    from etstir.driver import CaseConfig, run_case
    from etstir.properties import DriveSpec

    base = run_case(CaseConfig(nx=128, ny=64, t_max=10, drive=DriveSpec(v_rms=0.0)))
    np.testing.assert_array_equal(read_series_csv(m.paths("series_csv")[0]), base.series)


def test_frequency_sweep_cli(tmp_path, capsys):
    code = cli.main(["--config", "fig43_frequency.cfg", "--out", str(tmp_path), "--plot",
                     "--workers", "1"] + [f"--set={s}" for s in QUICK])
    assert code == 0
    rows = read_sweep_csv(tmp_path / "sweep.csv")
    assert [r["frequency_Hz"] for r in rows] == [1e5, 1e6, 1e7, 1e8, 1e9]
    assert all(r["status"] == "ok" for r in rows)
    assert all(r["voltage_V"] == 25.0 for r in rows)
    assert len(list((tmp_path / "series").glob("*.csv"))) == 5
    assert (tmp_path / "coverage.svg").exists()
    assert "sweep_csv" in capsys.readouterr().out


def test_voltage_sweep_header(tmp_path):
    cli.run_from_config("paper_table42.cfg", QUICK + ["values=0,25"], out_dir=tmp_path)
    header = (tmp_path / "sweep.csv").read_text().splitlines()[0]
    assert header == ("voltage_V,dT_max_K,v_down_max_m_per_s,u_max_m_per_s,"
                      "t_steady_s,status")
    rows = read_sweep_csv(tmp_path / "sweep.csv")
    assert [r["voltage_V"] for r in rows] == [0.0, 25.0]
    assert rows[0]["t_steady_s"] is None  # 10 s is far too short


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("ETSTIR_OUT", str(tmp_path / "envout"))
    assert cli.default_out_dir() == tmp_path / "envout"
    monkeypatch.delenv("ETSTIR_OUT")
    assert cli.default_out_dir() == Path("etstir_out")


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["--config", "single_case.cfg", "--set", "drive.bogus=1",
                     "--out", str(tmp_path)]) == 2
    assert "unknown key" in capsys.readouterr().err
    assert cli.main([]) == 2
    # solver-level failure: coupling cannot converge in one sweep
    assert cli.main(["--config", "single_case.cfg", "--out", str(tmp_path),
                     "--set", "solver.coupling_max_iter=1"] + [f"--set={s}" for s in QUICK]) == 1
    assert "CouplingError" in capsys.readouterr().err


@pytest.mark.skipif(os.geteuid() == 0, reason="root can write anywhere")
def test_unwritable_output(tmp_path):
    ro = tmp_path / "ro"
    ro.mkdir()
    ro.chmod(0o500)
    with pytest.raises(ConfigError):
        cli.run_from_config("single_case.cfg", QUICK, out_dir=ro / "x")


def test_output_path_is_a_file(tmp_path):
    f = tmp_path / "file"
    f.write_text("")
    with pytest.raises(ConfigError):
        cli.run_from_config("single_case.cfg", QUICK, out_dir=f)


def test_list_configs(capsys):
    assert cli.main(["--list-configs"]) == 0
    assert "paper_table42.cfg" in capsys.readouterr().out
