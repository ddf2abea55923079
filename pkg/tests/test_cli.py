import json
import math
import subprocess
import sys

import numpy as np
import pytest

from sqkernels import datasets as ds
from sqkernels.cli import main
from sqkernels.kernels import KernelSpec, evaluate


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def moons_file(tmp_path):
    path = tmp_path / "moons.csv"
    path.write_text(ds.dumps(ds.generate("moons", 60, 2)))
    return path


def test_datagen_roundtrip(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code, _, _ = run(capsys, "datagen", "--name", "spiral", "--n", 31, "--seed", 9, "--out", out)
    assert code == 0
    d = ds.loads(out.read_text())
    ref = ds.generate("spiral", 31, 9)
    assert np.array_equal(d.points, ref.points) and np.array_equal(d.labels, ref.labels)


def test_datagen_param_override(capsys):
    code, out, _ = run(capsys, "datagen", "--name", "circles", "--n", 10, "--seed", 1, "--param", "noise=0")
    assert code == 0
    pts = ds.loads(out).points
    radii = np.sort(np.hypot(pts[:, 0], pts[:, 1]))
    assert np.allclose(radii[:5], 0.5) and np.allclose(radii[5:], 1.0)


def test_datagen_unknown_param(capsys):
    code, _, err = run(capsys, "datagen", "--name", "moons", "--seed", 1, "--param", "wobble=3")
    assert code == 1 and "error" in err


def test_kernel_value(capsys):
    code, out, _ = run(capsys, "kernel", "--family", "coherent_phase", "--c", 1, "--x", "0", "--x2", "1")
    assert code == 0
    re, im = map(float, out.split())
    want = complex(evaluate(KernelSpec("coherent_phase", c=1.0), [0.0], [1.0], real=False))
    assert math.isclose(re, want.real, rel_tol=1e-10) and math.isclose(im, want.imag, rel_tol=1e-10)


@pytest.mark.parametrize(
    "argv",
    [
        ["kernel", "--family", "coherent_phase", "--x", "0", "--x2", "1"],
        ["kernel", "--family", "gaussian", "--x", "0,1", "--x2", "1"],
        ["kernel", "--family", "gaussian", "--x", "zero", "--x2", "1"],
        ["kernel", "--family", "gaussian", "--c", "1", "--x", "0", "--x2", "1"],
        ["kernel", "--family", "nope", "--x", "0", "--x2", "1"],
        ["bench"],
        ["bench", "--tables"],
    ],
)
def test_config_errors_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        sys.exit(main(argv))
    assert exc.value.code == 1


def test_gram_output(moons_file, capsys):
    code, out, err = run(capsys, "gram", "--family", "gaussian", "--data", moons_file)
    assert code == 0
    g = np.array([[float(v) for v in line.split(",")] for line in out.strip().splitlines()])
    assert g.shape == (60, 60) and np.allclose(np.diag(g), 1) and np.allclose(g, g.T)
    assert "psd true" in err


def test_estimate_both_protocols(capsys):
    for protocol in ("swap_test", "vacuum_projection"):
        code, out, _ = run(
            capsys, "estimate", "--protocol", protocol, "--r", 0.5, "--r2", 0.8, "--shots", 10**5, "--seed", 1
        )
        assert code == 0
        est, se = map(float, out.split())
        assert 0 < se < 0.01 and 0 < est <= 1


def test_estimate_shots_must_be_positive(capsys):
    code, _, err = run(capsys, "estimate", "--protocol", "swap_test", "--r", 0.5, "--r2", 0.8, "--shots", 0, "--seed", 1)
    assert code == 2 and "error" in err


def test_train_predict_plot(tmp_path, moons_file, capsys):
    model = tmp_path / "m.json"
    code, out, _ = run(capsys, "train", "--family", "squeezing_amplitude", "--data", moons_file, "--seed", 0, "--out", model)
    assert code == 0 and "converged true" in out
    saved = json.loads(model.read_text())
    assert saved["kernel"]["family"] == "squeezing_amplitude"

    code, out, _ = run(capsys, "predict", "--model", model, "--data", moons_file, "--out", tmp_path / "p.csv")
    assert code == 0
    assert float(out.split()[1]) >= 0.95
    assert (tmp_path / "p.csv").read_text().startswith("x1,x2,decision_value,label\n")

    svg, grid = tmp_path / "b.svg", tmp_path / "g.csv"
    code, _, _ = run(capsys, "plot", "--model", model, "--data", moons_file, "--out", svg,
                     "--grid-out", grid, "--resolution", 25)
    assert code == 0
    assert svg.read_bytes().lstrip().startswith(b"<?xml")
    assert len(grid.read_text().splitlines()) == 1 + 25 * 25


def test_train_not_converged_is_runtime_error(moons_file, capsys):
    code, _, _ = run(capsys, "train", "--family", "gaussian", "--data", moons_file, "--seed", 0,
                     "--max-passes", 1, "--tol", 1e-12)
    assert code == 2


def test_missing_files(tmp_path, capsys):
    code, _, _ = run(capsys, "predict", "--model", tmp_path / "none.json", "--data", tmp_path / "none.csv")
    assert code == 1


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"dataset": {"name": "moons", "n": 40, "seed": 1}, "kernels": [{"family": "gaussian"}], "x": 1}')
    code, _, err = run(capsys, "bench", "--config", cfg)
    assert code == 1 and "x" in err


def test_bench_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "dataset": {"name": "moons", "n": 40, "seed": 1},
        "kernels": [{"family": "gaussian"}],
        "output": {"dir": str(tmp_path / "out"), "grid_resolution": 10},
    }))
    code, out, _ = run(capsys, "bench", "--config", cfg, "--out", tmp_path / "r.json")
    assert code == 0 and "gaussian" in out
    assert (tmp_path / "out" / "report.json").exists()
    assert json.loads((tmp_path / "r.json").read_text())["cells"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "sqkernels", "kernel", "--family", "gaussian", "--x", "0", "--x2", "1"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert math.isclose(float(proc.stdout), math.exp(-0.5), rel_tol=1e-11)
