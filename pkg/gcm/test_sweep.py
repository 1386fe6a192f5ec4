"""
Tests for CSV emission, manifests, sweeps and SVG rendering.
"""
import csv
import json
import os

import pytest

from gcm.info import CSV_COLUMNS
from gcm.plot import plot_series, read_series
from gcm.scenario import ScenarioError, config_digest, preset
from gcm.sweep import (
    INDEX_COLUMNS,
    NONMARKOV_COLUMNS,
    PHASE_COLUMNS,
    SweepError,
    apply_axis,
    format_cell,
    run_evolve,
    run_nonmarkov,
    run_phase,
    run_sweep,
    write_manifest,
)


def _read(path):
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.reader(f))


def test_format_cell():
    assert format_cell(0.1) == "0.1"
    assert format_cell(1e-20) == "1e-20"
    assert format_cell(True) == "1"
    assert format_cell(7) == "7"
    assert format_cell(None) == ""


def test_evolve_csv_layout(tmp_path):
    cfg = preset("vacuum-env").updated(L_max=5)
    [path] = run_evolve(cfg, str(tmp_path))
    assert os.path.basename(path) == "vacuum-env.csv"
    rows = _read(path)
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[0] == "L,I2_AB,I2_AC,I2_ABC,I3,S_A,S_B,S_C,S_AB,S_AC,S_ABC".split(",")
    assert [r[0] for r in rows[1:]] == ["1", "2", "3", "4", "5"]
    with open(path, "rb") as f:
        assert b"\r" not in f.read()


def test_evolve_is_deterministic(tmp_path):
    cfg = preset("squeezed-alt-env").updated(L_max=8)
    first = run_evolve(cfg, str(tmp_path / "a"))[0]
    second = run_evolve(cfg, str(tmp_path / "b"))[0]
    with open(first, "rb") as f1, open(second, "rb") as f2:
        assert f1.read() == f2.read()


def test_manifest(tmp_path):
    cfg = preset("closed").updated(L_max=3)
    outputs = run_evolve(cfg, str(tmp_path))
    path = write_manifest(str(tmp_path), "evolve", cfg, outputs)
    with open(path, "r", encoding="utf-8") as f:
        manifest = json.load(f)
    assert manifest["command"] == "evolve"
    assert manifest["config_digest"] == config_digest(cfg)
    assert manifest["outputs"] == ["closed.csv"]


def test_phase_csv(tmp_path):
    cfg = preset("phase-diagram").updated(phase={"L": 10, "se_points": 3, "ee_points": 2})
    [path] = run_phase(cfg, str(tmp_path))
    rows = _read(path)
    assert tuple(rows[0]) == PHASE_COLUMNS
    assert len(rows) == 1 + 6
    assert [r[:2] for r in rows[1:3]] == [["0.0", "0.0"], ["0.0", "0.5"]]
    assert all(r[3] == "1" for r in rows[1:] if r[1] == "0.5")


def test_nonmarkov_csv(tmp_path):
    cfg = preset("theta-ee-sweep").updated(L_max=10)
    [path] = run_nonmarkov(cfg, str(tmp_path))
    rows = _read(path)
    assert tuple(rows[0]) == NONMARKOV_COLUMNS
    assert [r[0] for r in rows[1:]] == [str(L) for L in range(3, 11)]
    with pytest.raises(ScenarioError):
        run_nonmarkov(cfg.updated(L_max=2), str(tmp_path))


def test_apply_axis():
    cfg = preset("squeeze-angle-sweep")
    assert apply_axis(cfg, "delta_phi", 0.5).env.phi_e_pi == 0.5
    assert apply_axis(cfg, "theta_ee", 0.1).theta_ee_pi == 0.1
    assert apply_axis(preset("vacuum-env"), "n_E", 1.0).env.n_e == 1.0
    assert apply_axis(preset("squeezed-alt-env"), "delta_phi", 0.5).env.delta_phi_pi == 0.5


def test_apply_axis_errors():
    with pytest.raises(SweepError):
        apply_axis(preset("squeeze-angle-sweep"), "theta_xx", 0.1)
    with pytest.raises(SweepError):
        apply_axis(preset("vacuum-env"), "phi_E", 0.5)
    with pytest.raises(ScenarioError) as exc:
        apply_axis(preset("theta-ee-sweep"), "theta_ee", 0.7)
    assert exc.value.field == "sweep.values"


def test_sweep_outputs_and_index(tmp_path):
    cfg = preset("theta-ee-sweep").updated(L_max=6)
    outputs = run_sweep(cfg, str(tmp_path), workers=2)
    names = [os.path.basename(p) for p in outputs]
    assert names == [f"theta-ee-sweep_theta_ee_{i:02d}.csv" for i in range(3)] + ["theta-ee-sweep_index.csv"]
    index = _read(outputs[-1])
    assert tuple(index[0]) == INDEX_COLUMNS
    assert [r[0] for r in index[1:]] == ["0", "1", "2"]
    assert [r[2] for r in index[1:]] == ["0.1", "0.2", "0.3"]
    assert [r[3] for r in index[1:]] == names[:3]
    for row, path in zip(index[1:], outputs[:3]):
        series = read_series(path)
        assert float(row[4]) == min(series["I3"])


def test_sweep_is_deterministic_across_worker_counts(tmp_path):
    cfg = preset("thermal-env-sweep").updated(L_max=5)
    serial = run_sweep(cfg, str(tmp_path / "serial"), workers=1)
    parallel = run_sweep(cfg, str(tmp_path / "parallel"), workers=4)
    for a, b in zip(serial, parallel):
        with open(a, "rb") as fa, open(b, "rb") as fb:
            assert fa.read() == fb.read()


def test_sweep_requires_sweep_section(tmp_path):
    with pytest.raises(SweepError):
        run_sweep(preset("closed"), str(tmp_path))


def test_plot_is_deterministic(tmp_path):
    outputs = [run_evolve(preset(name).updated(L_max=6), str(tmp_path))[0] for name in ("vacuum-env", "squeezed-alt-env")]
    first = plot_series(outputs, str(tmp_path / "one.svg"))
    second = plot_series(outputs, str(tmp_path / "two.svg"))
    with open(first, "rb") as f1, open(second, "rb") as f2:
        body = f1.read()
        assert body == f2.read()
    assert body.lstrip().startswith(b"<?xml")


def test_plot_rejects_bad_input(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("L,I3\n", encoding="utf-8")
    with pytest.raises(SweepError):
        plot_series([str(empty)], str(tmp_path / "out.svg"))
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("L,I3\n1,0.1\n2\n", encoding="utf-8")
    with pytest.raises(SweepError):
        read_series(str(ragged))
    good = tmp_path / "good.csv"
    good.write_text("L,I3\n1,0.1\n2,0.2\n", encoding="utf-8")
    with pytest.raises(SweepError):
        plot_series([str(good)], str(tmp_path / "out.svg"), columns=("I2_AB",))
    with pytest.raises(SweepError):
        plot_series([], str(tmp_path / "out.svg"))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
