import csv
import math

import numpy as np
import pytest

from acca import kuramoto, tau1_config, y_projection
from acca.cli import main, read_config, RUN_KEYS
from acca.errors import UsageError
from acca.output import angle_hue, heatmap_svg, hue_to_rgb, read_configs, read_series, read_sweep


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_run_writes_series(tmp_path):
    assert run_cli("run", "--n", 30, "--topology", "ring", "--steps", 3000, "--seed", 5, "--out-dir", tmp_path) == 0
    lines = (tmp_path / "series.csv").read_text().splitlines()
    assert lines[0] == "t,R,psi,Y,tau1,W"
    assert len(lines) == 1 + 3000 // 30 + 1
    assert all(row.split(",")[5] for row in lines[1:])


def test_path_leaves_w_empty(tmp_path):
    assert run_cli("run", "--n", 10, "--topology", "path", "--steps", 100, "--out-dir", tmp_path) == 0
    rows = list(csv.reader((tmp_path / "series.csv").open()))[1:]
    assert rows and all(r[5] == "" for r in rows)


def test_run_is_byte_identical(tmp_path):
    args = ["run", "--n", 40, "--epsilon", 0.01, "--k-mid", 4, "--k-noise", 3, "--steps", 4000,
            "--snapshots", "0,400,4000", "--heatmap"]
    assert run_cli(*args, "--out-dir", tmp_path / "a") == 0
    assert run_cli(*args, "--out-dir", tmp_path / "b") == 0
    for name in ("series.csv", "snapshots.csv", "heatmap.svg", "frames.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_series_round_trip(tmp_path):
    assert run_cli("run", "--n", 25, "--steps", 500, "--record-stride", 25, "--heatmap",
                   "--out-dir", tmp_path) == 0
    cols = read_series(tmp_path / "series.csv")
    t, frames = read_configs(tmp_path / "frames.csv")
    assert np.array_equal(cols["t"], t)
    for k, theta in enumerate(frames):
        assert cols["R"][k] == pytest.approx(kuramoto(theta).r, rel=1e-11, abs=1e-12)
        assert cols["Y"][k] == pytest.approx(y_projection(theta), rel=1e-11, abs=1e-12)
        assert cols["tau1"][k] == pytest.approx(tau1_config(theta), rel=1e-11, abs=1e-12)


def test_consensus_run_ends_near_one(tmp_path):
    assert run_cli("run", "--n", 20, "--topology", "path", "--steps", 10**6, "--stop-r", 0.9999,
                   "--out-dir", tmp_path) == 0
    cols = read_series(tmp_path / "series.csv")
    assert abs(cols["R"][-1] - 1.0) < 1e-3


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# twisted ring\nn = 50\ntopology = ring\ninit = winding\nwinding = 2\nsteps = 1000\n"
                   f"out_dir = {tmp_path / 'out'}\n")
    assert run_cli("run", "--config", cfg, "--steps", 200) == 0
    cols = read_series(tmp_path / "out" / "series.csv")
    assert cols["t"][-1] == 200
    assert set(cols["W"]) == {2.0}


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n = 10\ncolour = red\n")
    with pytest.raises(UsageError):
        read_config(cfg, RUN_KEYS)
    assert run_cli("run", "--config", cfg, "--out-dir", tmp_path) == 1
    assert not (tmp_path / "series.csv").exists()


@pytest.mark.parametrize("args", [["run", "--k-mid", 0], ["run", "--epsilon", 2], ["run", "--n", "x"],
                                  ["run", "--bogus"], ["verify-tau", "--samples", 10], []])
def test_usage_errors_exit_1(tmp_path, args):
    assert run_cli(*args, *(["--out-dir", tmp_path] if args and args[0] == "run" else [])) == 1
    assert not list(tmp_path.iterdir())


def test_unwritable_output_exits_2(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run_cli("run", "--n", 10, "--steps", 10, "--out-dir", blocker / "sub") == 2


def test_failed_write_leaves_no_partial_files(tmp_path, monkeypatch):
    import acca.cli

    def boom(*_):
        raise OSError("disk full")

    monkeypatch.setattr(acca.cli, "write_heatmap", boom)
    assert run_cli("run", "--n", 10, "--steps", 100, "--heatmap", "--out-dir", tmp_path) == 2
    assert list(tmp_path.iterdir()) == []


def test_sweep_outputs(tmp_path):
    assert run_cli("sweep", "--n", 20, "--steps", 500, "--k-mid", "1,5", "--k-noise", "0,2", "--epsilon", 0.01,
                   "--topology", "path,ring", "--replicates", 2, "--heatmaps", "--out-dir", tmp_path) == 0
    rows = read_sweep(tmp_path / "sweep.csv")
    assert (tmp_path / "sweep.csv").read_text().splitlines()[0] == (
        "topology,epsilon,k_mid,k_noise,mean_R,se_R,mean_absY,se_absY,mean_absTau1,se_absTau1,replicates")
    assert len(rows) == 8
    assert len(list(tmp_path.glob("sweep_*.svg"))) == 6


def test_sweep_one_replicate_blank_errors(tmp_path):
    assert run_cli("sweep", "--n", 20, "--steps", 300, "--k-mid", 1, "--k-noise", 1, "--epsilon", 0.0,
                   "--topology", "ring", "--replicates", 1, "--out-dir", tmp_path) == 0
    (row,) = read_sweep(tmp_path / "sweep.csv")
    assert row["se_R"] == row["se_absY"] == row["se_absTau1"] == ""
    assert row["replicates"] == "1"


def test_sweep_failed_cells_sidecar(tmp_path):
    code = run_cli("sweep", "--n", 20, "--steps", 300, "--k-mid", "1,11", "--k-noise", 0, "--epsilon", 0.0,
                   "--topology", "path", "--replicates", 1, "--out-dir", tmp_path)
    assert code != 0
    assert len(read_sweep(tmp_path / "sweep.csv")) == 1
    assert "k_mid=11" in (tmp_path / "sweep.csv.errors").read_text()


def test_sweep_empty_grid(tmp_path):
    assert run_cli("sweep", "--k-mid", "", "--k-noise", 1, "--epsilon", 0.0, "--topology", "path",
                   "--out-dir", tmp_path) == 1
    assert not list(tmp_path.iterdir())


def test_sweep_deterministic_across_workers(tmp_path):
    args = ["sweep", "--n", 16, "--steps", 400, "--k-mid", "1,4", "--k-noise", "0,3", "--epsilon", 0.02,
            "--topology", "ring", "--replicates", 2]
    assert run_cli(*args, "--workers", 1, "--out-dir", tmp_path / "a") == 0
    assert run_cli(*args, "--workers", 3, "--out-dir", tmp_path / "b") == 0
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()


def test_verify_tau(capsys):
    assert run_cli("verify-tau", "--max-w", 3, "--samples", 100000) == 0
    out = capsys.readouterr().out
    rows = [line.split() for line in out.splitlines() if line.split()[0].lstrip("-").isdigit()]
    assert len(rows) == 6 and all(r[-1] == "PASS" for r in rows)
    assert float([r for r in rows if r[0] == "2"][0][1]) == -0.5
    assert "FAIL" not in out


def test_verify_tau_failure_exit_code(monkeypatch):
    import acca.cli
    from acca.verify import TauRow

    monkeypatch.setattr(acca.cli, "tau_table", lambda *a: [TauRow(1, 1.0, 0.5, 0.01)])
    assert run_cli("verify-tau", "--samples", 1000) == 3


def test_render_from_snapshots_and_sweep(tmp_path):
    assert run_cli("run", "--n", 12, "--steps", 120, "--snapshots", "0,60,120", "--out-dir", tmp_path) == 0
    assert run_cli("render", tmp_path / "snapshots.csv", "-o", tmp_path / "snap.svg") == 0
    svg = (tmp_path / "snap.svg").read_text()
    assert 'data-sites="12"' in svg and 'data-records="3"' in svg
    assert run_cli("sweep", "--n", 12, "--steps", 100, "--k-mid", 1, "--k-noise", "0,1", "--epsilon", 0.0,
                   "--topology", "path", "--replicates", 1, "--out-dir", tmp_path / "sw") == 0
    assert run_cli("render", tmp_path / "sw" / "sweep.csv", "-o", tmp_path / "charts") == 0
    assert len(list((tmp_path / "charts").glob("*.svg"))) == 3
    assert run_cli("render", tmp_path / "missing.csv") == 1


def test_heatmap_dimensions():
    frames = np.random.default_rng(0).uniform(-np.pi, np.pi, (7, 13))
    svg = heatmap_svg(frames)
    assert 'viewBox="0 0 13 7"' in svg


def test_hue_mapping():
    import colorsys

    theta = np.linspace(-np.pi, np.pi, 10_000, endpoint=False)
    h = angle_hue(theta)
    assert np.all(np.diff(h) > 0) and h[0] == 0.0 and h[-1] < 1.0
    rgb = hue_to_rgb(h)
    for k in range(0, 10_000, 97):
        assert rgb[k] == pytest.approx(colorsys.hsv_to_rgb(h[k], 1.0, 1.0), abs=1e-12)
    # the wheel closes: -pi and the top of the range meet
    assert hue_to_rgb(angle_hue(np.pi)) == pytest.approx(hue_to_rgb(angle_hue(-np.pi)))
