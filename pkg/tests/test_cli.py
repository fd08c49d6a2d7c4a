import subprocess
import sys

import numpy as np
import pytest

from tensorgkb.cli import main, read_config
from tensorgkb.imaging import read_ppm, synthetic_image, write_ppm
from tensorgkb.tensor import read_tensor, write_tensor

COEFS = "gaussian:5:2:1.5,uniform:4:1,gaussian:3:1"


def run(tmp_path, *argv):
    return main([*argv, "--out-dir", str(tmp_path)])


def test_solve_random_exact(tmp_path, capsys):
    assert run(tmp_path, "solve", "--coefficients", COEFS, "--exact", "random", "--seed", "3") == 0
    x = read_tensor(tmp_path / "solution.tensor")
    assert x.shape == (5, 4, 3)
    assert (tmp_path / "metrics.csv").read_text().startswith("k,alpha,beta,nu,gauss,radau,residual,error\n")
    summary = (tmp_path / "summary.txt").read_text()
    assert "stop reason    discrepancy" in summary and "e_k" in summary
    assert "iterations" in capsys.readouterr().out


def test_identical_config_gives_identical_csv(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(d, "solve", "--coefficients", COEFS, "--exact", "random", "--seed", "5", "--algorithm", "alg4") == 0
    assert (a / "metrics.csv").read_bytes() == (b / "metrics.csv").read_bytes()
    assert (a / "solution.tensor").read_bytes() == (b / "solution.tensor").read_bytes()


def test_solve_given_rhs(tmp_path):
    rng = np.random.default_rng(0)
    write_tensor(tmp_path / "f.tensor", rng.standard_normal((5, 4, 3)))
    assert run(tmp_path, "solve", "--coefficients", COEFS, "--rhs", str(tmp_path / "f.tensor"), "--epsilon", "0.5") == 0
    assert (tmp_path / "solution.tensor").exists()


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# experiment\ncoefficients = {COEFS}\nexact = random\nnoise = 0.01\nalgorithm = alg4\nkmax = 3\n")
    assert read_config(str(cfg))["kmax"] == 3
    # kmax = 3 cannot certify the tiny noise level: numerical failure
    assert run(tmp_path, "solve", "--config", str(cfg), "--noise", "1e-6") == 3
    assert run(tmp_path, "solve", "--config", str(cfg), "--kmax", "200") == 0


def test_script_problem(tmp_path):
    script = tmp_path / "op.py"
    script.write_text(
        "import numpy as np\n"
        "shape = (4, 3)\n"
        "A = np.diag([1.0, 0.5, 0.2, 0.1])\n"
        "def apply(x):\n    return A @ x\n"
        "def adjoint(y):\n    return A.T @ y\n"
    )
    assert run(tmp_path, "solve", "--problem", "script", "--script", str(script), "--exact", "random") == 0
    assert read_tensor(tmp_path / "solution.tensor").shape == (4, 3)
    bad = tmp_path / "bad.py"
    bad.write_text("shape = (2,)\n")
    assert run(tmp_path, "solve", "--problem", "script", "--script", str(bad), "--exact", "random") == 2


def test_deblur_with_images(tmp_path):
    img = tmp_path / "in.ppm"
    write_ppm(img, synthetic_image(12, 10))
    assert run(tmp_path, "deblur", "--image", str(img), "--blur", "gaussian:2:1,uniform:1,uniform:1",
               "--noise", "0.001", "--emit-images") == 0
    for name in ("exact", "observed", "restored"):
        assert read_ppm(tmp_path / f"{name}.ppm").shape == (12, 10, 3)
    assert "input e" in (tmp_path / "summary.txt").read_text()


def test_cond_report(tmp_path, capsys):
    assert run(tmp_path, "cond", "--coefficients", "uniform:3:2,gaussian:4:2,uniform:2:1") == 0
    lines = (tmp_path / "cond.csv").read_text().splitlines()
    assert lines[0] == "bound,kind,status,value,note"
    assert lines[1].startswith("cond(A1),coefficient,singular,")
    assert any(line.startswith("oracle,exact,ok,") for line in lines)
    assert "min_singular_upper" in capsys.readouterr().out


def test_bench(tmp_path):
    assert run(tmp_path, "bench", "--example", "collocation", "--grids", "6", "--noises", "0.01",
               "--methods", "alg3,alg4") == 0
    lines = (tmp_path / "bench.csv").read_text().splitlines()
    assert lines[0] == "grid,noise,method,iter,e_k,cpu_seconds"
    assert [line.split(",")[2] for line in lines[1:]] == ["alg3", "alg4"]


@pytest.mark.parametrize(
    "argv,code",
    [
        (["solve", "--coefficients", COEFS], 2),
        (["solve", "--coefficients", COEFS, "--exact", "random", "--eta", "1.0"], 2),
        (["solve", "--coefficients", COEFS, "--exact", "random", "--noise", "0"], 2),
        (["solve", "--coefficients", "gaussian:x:1", "--exact", "random"], 2),
        (["solve", "--coefficients", COEFS, "--exact", "random", "--stop-rule", "relative_change"], 2),
        (["cond"], 2),
        (["solve", "--coefficients", "missing.mtx", "--exact", "random"], 4),
        (["deblur", "--image", "missing.ppm"], 4),
        (["solve", "--config", "missing.cfg"], 4),
    ],
)
def test_exit_codes(tmp_path, argv, code):
    assert run(tmp_path, *argv) == code


def test_bad_image_is_io_error(tmp_path):
    bad = tmp_path / "bad.ppm"
    bad.write_bytes(b"P5\n1 1\n255\n\x00")
    assert run(tmp_path, "deblur", "--image", str(bad)) == 4


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "tensorgkb", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("solve", "deblur", "cond", "bench"):
        assert cmd in out.stdout
