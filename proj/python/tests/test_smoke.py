import os
import subprocess
from pathlib import Path

import numpy as np
import pytest

import topam

CLI = os.environ.get("TOPAM_CLI")


def small_config(max_iters=8, **extra):
    lines = [
        "[problem]",
        "nelx = 24",
        "nely = 12",
        "r_min = 1.5",
        "passive_radius = 1",
        "[schedule]",
        f"max_iters = {max_iters}",
    ]
    for section, values in extra.items():
        lines.append(f"[{section}]")
        lines += [f"{k} = {v}" for k, v in values.items()]
    return "\n".join(lines) + "\n"


def test_presets_listed_and_formatted():
    names = topam.preset_names()
    assert "fig8a" in names
    assert "type = cantilever" in topam.format_preset("fig8a")


def test_projection_endpoints():
    assert topam.heaviside(0.0, 8.0, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert topam.heaviside(1.0, 8.0, 0.5) == pytest.approx(1.0)


def test_power_mean_is_bounded_by_max():
    s = np.linspace(0.1, 0.9, 17)
    assert topam.power_mean(s, 60.0) <= s.max()


def test_filter_keeps_uniform_interior():
    rho = np.full((10, 14), 0.4)
    out = topam.filter_density(rho, 2.0)
    assert out.shape == rho.shape
    assert np.allclose(out[3:-3, 3:-3], 0.4)


def test_full_material_compliance_is_positive():
    c_full = topam.compliance(np.ones((10, 20)))
    c_half = topam.compliance(np.full((10, 20), 0.5))
    assert 0 < c_full < c_half


def test_short_run_returns_fields(tmp_path):
    res = topam.run(small_config(), out_dir=str(tmp_path))
    assert res["int"].shape == (12, 24)
    assert np.all((res["x"] >= 0) & (res["x"] <= 1))
    assert res["objective"][1] > 0
    assert (tmp_path / "report.txt").exists()


def test_invalid_config_raises_value_error():
    with pytest.raises(ValueError):
        topam.run("[problem]\nvolfrac = 2\n")


@pytest.mark.skipif(not CLI, reason="command-line tool location not provided")
def test_cli_exit_codes(tmp_path):
    cfg = tmp_path / "ok.ini"
    cfg.write_text(small_config(max_iters=4))
    ok = subprocess.run([CLI, "run", str(cfg), "--out", str(tmp_path / "run"), "-q"], capture_output=True, text=True)
    assert ok.returncode == 0, ok.stderr
    assert (tmp_path / "run" / "log.csv").exists()

    rep = subprocess.run([CLI, "report", str(tmp_path / "run")], capture_output=True, text=True)
    assert rep.returncode == 0
    assert "violation_fraction" in rep.stdout

    bad = tmp_path / "bad.ini"
    bad.write_text("[problem]\nnelx = -3\n")
    res = subprocess.run([CLI, "run", str(bad)], capture_output=True, text=True)
    assert res.returncode == 2
    assert "bad.ini" in res.stderr or "nelx" in res.stderr

    res = subprocess.run([CLI, "run", str(cfg), "--orientations", ""], capture_output=True, text=True)
    assert res.returncode == 2


def test_shipped_config_parses():
    src = Path(os.environ.get("TOPAM_SOURCE", Path(__file__).resolve().parents[2]))
    text = (src / "configs" / "fig8a.ini").read_text()
    assert "preset" in text
