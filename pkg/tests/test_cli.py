import json

import numpy as np
import pytest

from clrwarp.artifacts import read_signal_csv, write_signal_csv
from clrwarp.cli import main
from clrwarp.numerics import Grid
from clrwarp.signals import gaussian_mixture

from wavdata import MINIMAL_WAV, wav_bytes


@pytest.fixture
def pair_files(tmp_path):
    grid = Grid(300)
    f = gaussian_mixture([1.0, 0.6], [0.35, 0.7], [0.08, 0.06], grid)
    g = gaussian_mixture([1.0, 0.6], [0.45, 0.75], [0.08, 0.06], grid)
    pf, pg = tmp_path / "f.csv", tmp_path / "g.csv"
    write_signal_csv(pf, f)
    write_signal_csv(pg, g)
    return pf, pg


def _csv_rows(path):
    return path.read_text().strip().splitlines()[1:]


def test_register_self_alignment(tmp_path, pair_files):
    pf, _ = pair_files
    out = tmp_path / "run"
    assert main(["register", str(pf), str(pf), "--out", str(out), "--d", "8"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["final_objective"] < 1e-8
    assert summary["warp"]["diffeomorphism"]
    for name in ["warp.csv", "aligned.csv", "trace.csv", "config.txt", "manifest.json"]:
        assert (out / name).exists()


def test_register_with_config_runs_full_budget(tmp_path, pair_files):
    pf, pg = pair_files
    cfg = tmp_path / "c.txt"
    cfg.write_text("method = 1\nd = 15\nN = 300\nlambda = 8e-5\nalpha = 0.05\nmax_iters = 4000\n")
    out = tmp_path / "run"
    assert main(["register", str(pf), str(pg), "--config", str(cfg), "--out", str(out)]) == 0
    rows = _csv_rows(out / "trace.csv")
    assert len(rows) == 4000
    obj = np.array([float(r.split(",")[1]) for r in rows])
    assert np.all(np.isfinite(obj))
    s = json.loads((out / "summary.json").read_text())
    assert s["final_objective"] < s["initial_objective"]
    assert s["config"]["d"] == 15 and s["config"]["lambda"] == 8e-5


def test_register_all_methods_writes_subdirectories(tmp_path, pair_files):
    pf, pg = pair_files
    out = tmp_path / "run"
    argv = ["register", str(pf), str(pg), "--method", "all", "--d", "6", "--iters", "20",
            "--out", str(out)]
    assert main(argv) == 0
    for k in range(1, 5):
        s = json.loads((out / f"method{k}" / "summary.json").read_text())
        assert s["method"] == k
        assert set(s["mismatch_all_methods"]) == {"Standard", "Symmetric", "Isometry", "Jacobian-W"}
    iso = (out / "method3" / "aligned.csv").read_text().splitlines()[0]
    assert iso.endswith("g_warped_isometric")


def test_register_config_resamples_inputs(tmp_path, pair_files):
    pf, pg = pair_files
    cfg = tmp_path / "c.txt"
    cfg.write_text("N = 200\nd = 6\nmax_iters = 5\n")
    out = tmp_path / "run"
    assert main(["register", str(pf), str(pg), "--config", str(cfg), "--out", str(out)]) == 0
    assert len(_csv_rows(out / "warp.csv")) == 200


def test_malformed_csv_reports_line(tmp_path, pair_files, capsys):
    _, pg = pair_files
    bad = tmp_path / "bad.csv"
    bad.write_text("t,value\n0,1\n0.3,oops\n1,2\n")
    assert main(["register", str(bad), str(pg), "--out", str(tmp_path / "o")]) == 2
    assert f"{bad}:3:" in capsys.readouterr().err


def test_bad_config_is_parse_error(tmp_path, pair_files, capsys):
    pf, pg = pair_files
    cfg = tmp_path / "c.txt"
    cfg.write_text("d = 10\nwhat = 1\n")
    assert main(["register", str(pf), str(pg), "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert ":2:" in capsys.readouterr().err
    cfg.write_text("d = 2\n")
    assert main(["register", str(pf), str(pg), "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_missing_input_is_io_error(tmp_path, pair_files):
    _, pg = pair_files
    assert main(["register", str(tmp_path / "nope.csv"), str(pg), "--out", str(tmp_path / "o")]) == 4


def test_unwritable_output_is_io_error(tmp_path, pair_files):
    pf, pg = pair_files
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["register", str(pf), str(pg), "--out", str(blocker / "sub"), "--iters", "2"]) == 4


def test_divergence_exit_code(tmp_path, pair_files, capsys):
    pf, pg = pair_files
    argv = ["register", str(pf), str(pg), "--alpha", "1e6", "--lambda", "1e-3", "--d", "10",
            "--out", str(tmp_path / "o")]
    assert main(argv) == 3
    assert "method 1" in capsys.readouterr().err


def test_simulate_triangle_pinching_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    argv = ["simulate", "triangle_2to1", "--method", "1", "--iters", "300"]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    for name in ["f.csv", "g.csv", "truth_warp.csv", "comparison.csv",
                 "method1_lambda0/warp.csv", "method1_lambda0.0001/warp.csv"]:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name

    manifest = json.loads((a / "manifest.json").read_text())
    listed = {e["path"] for e in manifest["files"]}
    on_disk = {p.relative_to(a).as_posix() for p in a.rglob("*") if p.is_file()}
    assert on_disk - listed == {"manifest.json"}
    newest = max(a.rglob("*"), key=lambda p: p.stat().st_mtime_ns)
    assert newest.name == "manifest.json"

    rows = [r.split(",") for r in _csv_rows(a / "comparison.csv")]
    header = (a / "comparison.csv").read_text().splitlines()[0].split(",")
    col = {h: i for i, h in enumerate(header)}
    by_lam = {float(r[col["lambda"]]): r for r in rows}
    pinched = float(by_lam[0.0][col["min_gamma_prime"]])
    regular = float(by_lam[1e-4][col["min_gamma_prime"]])
    assert regular > pinched


def test_simulate_writes_truth_and_recovery(tmp_path):
    out = tmp_path / "s"
    assert main(["simulate", "three_gaussian", "--method", "2", "--iters", "50", "--out", str(out)]) == 0
    s = json.loads((out / "method2" / "summary.json").read_text())
    assert {"clr_l2", "hnorm", "sup_warp_error"} <= set(s["recovery"])
    assert s["mismatch_at_truth"] >= 0
    f = read_signal_csv(out / "f.csv")
    assert f.grid.n_points == 1000


def test_simulate_rejects_negative_sigma(tmp_path):
    assert main(["simulate", "three_gaussian", "--sigma", "-1", "--out", str(tmp_path)]) == 2


def test_gradcheck_passes_and_dumps(tmp_path, capsys):
    dump = tmp_path / "m"
    assert main(["gradcheck", "--trials", "3", "--dump-matrices", str(dump)]) == 0
    out = capsys.readouterr().out
    assert out.count("max relative error") == 4
    B = np.loadtxt(dump / "B.csv", delimiter=",")
    R = np.loadtxt(dump / "R.csv", delimiter=",")
    assert B.shape == (400, 10) and R.shape == (10, 10)
    np.testing.assert_array_equal(R, R.T)


def test_gradcheck_detects_corrupted_kernel(capsys):
    assert main(["gradcheck", "--trials", "2", "--corrupt-kernel"]) == 5
    assert "FAIL (trial" in capsys.readouterr().out


def test_gradcheck_zero_trials_warns(caplog):
    with caplog.at_level("WARNING"):
        assert main(["gradcheck", "--trials", "0"]) == 0
    assert "trials=0" in caplog.text


def test_envelope_from_wav(tmp_path):
    rate = 8000
    t = np.arange(rate) / rate
    samples = (8000 * np.sin(2 * np.pi * 220 * t) * (0.2 + t)).astype(int)
    wav = tmp_path / "a.wav"
    wav.write_bytes(wav_bytes(samples, rate=rate))
    out = tmp_path / "env" / "e.csv"
    assert main(["envelope", str(wav), "--out", str(out)]) == 0
    env = read_signal_csv(out)
    assert env.grid.n_points == 1000
    assert env.values.min() >= 0 and env.values.max() == pytest.approx(1.0)
    assert env.values[-1] > env.values[0]


@pytest.mark.parametrize(
    "payload,reason",
    [
        (wav_bytes(np.zeros(4000, int), channels=2), "unsupported-channel-count"),
        (MINIMAL_WAV, "window-exceeds-signal"),
        (b"RIFX" + MINIMAL_WAV[4:], None),
    ],
)
def test_envelope_errors(tmp_path, capsys, payload, reason):
    wav = tmp_path / "x.wav"
    wav.write_bytes(payload)
    assert main(["envelope", str(wav), "--out", str(tmp_path / "e.csv")]) == 2
    if reason:
        assert reason in capsys.readouterr().err
    assert not (tmp_path / "e.csv").exists()


def test_envelope_missing_file(tmp_path):
    assert main(["envelope", str(tmp_path / "none.wav"), "--out", str(tmp_path / "e.csv")]) == 4


@pytest.mark.xfail(strict=True, reason="under 4000 steps at alpha=0.05 the isometry fit is the closest, "
                                       "not the farthest; known shortfall")
def test_simulate_seesaw_isometry_is_worst(tmp_path):
    out = tmp_path / "s"
    assert main(["simulate", "inverse_seesaw", "--method", "all", "--out", str(out)]) == 0
    header, *rows = (out / "comparison.csv").read_text().strip().splitlines()
    col = header.split(",").index("clr_l2")
    clr = {int(r.split(",")[1]): float(r.split(",")[col]) for r in rows}
    assert all(clr[3] > clr[m] for m in (1, 2, 4))
