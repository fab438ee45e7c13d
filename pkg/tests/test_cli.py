import subprocess
import sys

import numpy as np
import pytest

from chebgd.cli import main, read_config
from chebgd.errors import ConfigError
from chebgd.linalg import generate_gaussian_problem, write_matrix
from chebgd.sched import read_schedule


def run(*args):
    return main([str(a) for a in args])


def test_steps_single(tmp_path):
    out = tmp_path / "s.txt"
    assert run("steps", "--T", 1, "--lambda-min", 1, "--lambda-max", 9, "--out", out) == 0
    sched = read_schedule(str(out))
    assert sched.steps.tolist() == [pytest.approx(0.2, abs=1e-16)]
    assert "command=steps" in out.read_text().splitlines()[-1]


def test_steps_permute_trailer(tmp_path):
    out = tmp_path / "p.txt"
    assert run("steps", "--T", 16, "--lambda-min", 1, "--lambda-max", 16, "--permute", "--out", out) == 0
    last = out.read_text().splitlines()[-1]
    assert last.startswith("# permutation a=1 b=9 c=7 objective=")


def test_steps_permute_non_power_of_two_warns(tmp_path, caplog):
    out = tmp_path / "p.txt"
    assert run("steps", "--T", 7, "--permute", "--out", out) == 0
    assert "not a power of two" in caplog.text
    assert "# permutation" not in out.read_text()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# settings\nT = 3   # length\nlambda-max = 4\n")
    out = tmp_path / "s.txt"
    assert run("steps", "--config", cfg, "--T", 2, "--out", out) == 0
    sched = read_schedule(str(out))
    assert sched.period == 2 and sched.lambda_max == 4.0


def test_read_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("just words\n")
    with pytest.raises(ConfigError):
        read_config(bad)
    with pytest.raises(ConfigError):
        read_config(tmp_path / "missing.cfg")


@pytest.mark.parametrize(
    "args, code",
    [
        (["steps", "--lambda-min", 0], 2),
        (["steps", "--T", "x"], 2),
        (["bench", "--algos", "DUGD"], 2),
        (["bench", "--schedule", "/no/such/file"], 2),
        (["ridge", "--data", "DATA"], 3),
    ],
)
def test_exit_codes(tmp_path, args, code):
    data = tmp_path / "bad.csv"
    data.write_text("a,b\n1\n")
    args = [str(data) if a == "DATA" else a for a in args]
    assert run(*args, "--out", tmp_path / "o") == code


def test_indefinite_matrix_is_a_numerical_failure(tmp_path):
    mat = tmp_path / "m.txt"
    mat.write_text("2 0\n1 0\n0 -1\n")
    assert run("eig", "--matrix", mat, "--out", tmp_path / "e.txt") == 4


def test_bench_outputs_are_byte_identical(tmp_path):
    args = ["bench", "--n", 20, "--m", 80, "--T", 4, "--iters", 12, "--samples", 3,
            "--algos", "GDConstant,CHGD,Momentum,ChebSemi"]
    assert run(*args, "--out", tmp_path / "a") == 0
    assert run(*args, "--out", tmp_path / "b") == 0
    for name in ("traces.csv", "rates.csv", "plot.dat"):
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes()
        assert a.startswith(b"# command=bench")


def test_bench_zero_samples_header_only(tmp_path):
    assert run("bench", "--n", 5, "--m", 20, "--samples", 0, "--out", tmp_path) == 0
    lines = (tmp_path / "traces.csv").read_text().splitlines()
    assert lines[1:] == ["algorithm,t,mse"]


def test_train_then_bench_with_learned_schedule(tmp_path):
    train = tmp_path / "train"
    assert run("train", "--n", 10, "--m", 40, "--T", 2, "--minibatches", 10,
               "--eval-samples", 50, "--out", train) == 0
    loss = (train / "loss.csv").read_text().splitlines()
    assert loss[1] == "generation,T,loss,spectral_radius" and len(loss) == 4
    comparison = (train / "comparison.csv").read_text().splitlines()
    assert len(comparison) == 4
    sched = train / "schedule_T02.txt"
    assert read_schedule(str(sched)).origin.value == "Learned"
    bench = tmp_path / "bench"
    assert run("bench", "--n", 10, "--m", 40, "--T", 2, "--iters", 4, "--samples", 2,
               "--algos", "DUGD", "--schedule", sched, "--out", bench) == 0
    assert "DUGD,4," in (bench / "traces.csv").read_text()


def test_ridge_on_csv(tmp_path):
    rng = np.random.default_rng(0)
    h = rng.standard_normal((60, 4))
    y = h @ np.array([1.0, -2.0, 0.5, 3.0])
    rows = ["f1,f2,f3,bad,f4,y"] + [
        ",".join([f"{v:.10g}" for v in r[:3]] + ["?" if i == 5 else "0"] + [f"{r[3]:.10g}", f"{t:.10g}"])
        for i, (r, t) in enumerate(zip(h, y))
    ]
    data = tmp_path / "d.csv"
    data.write_text("\n".join(rows) + "\n")
    out = tmp_path / "r"
    assert run("ridge", "--data", data, "--response", "y", "--eta", 1.0, "--T", 4,
               "--iters", 200, "--out", out) == 0
    summary = (out / "summary.txt").read_text()
    assert "n 4\nm 60\n" in summary
    assert "permutation 1" in summary
    assert "none" not in summary


def test_ridge_data_requires_eta(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("a,y\n1,1\n2,3\n")
    assert run("ridge", "--data", data, "--out", tmp_path / "r") == 2


def test_eig_generated(tmp_path):
    out = tmp_path / "e.txt"
    assert run("eig", "--n", 6, "--m", 24, "--out", out) == 0
    text = out.read_text().splitlines()
    assert text[1].startswith("lambda_min") and text[4] == "eigenvalues"
    assert len(text) == 5 + 6


def test_eig_power_matches_jacobi_on_matrix_file(tmp_path):
    mat = tmp_path / "m.txt"
    with mat.open("w") as fh:
        write_matrix(fh, generate_gaussian_problem(30, 120, 2))
    values = {}
    for method in ("jacobi", "power"):
        out = tmp_path / f"{method}.txt"
        assert run("eig", "--matrix", mat, "--method", method, "--out", out) == 0
        lines = dict(line.split() for line in out.read_text().splitlines()[1:4])
        values[method] = (float(lines["lambda_min"]), float(lines["lambda_max"]))
    np.testing.assert_allclose(values["power"], values["jacobi"], rtol=1e-4)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chebgd", "steps", "--T", "2"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[0] == "2 1 9 Chebyshev"
