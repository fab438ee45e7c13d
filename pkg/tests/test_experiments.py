import io

import numpy as np
import pytest

from chebgd.errors import InvalidParams, SingularSystem
from chebgd.experiments import (
    BenchConfig,
    RidgeConfig,
    describe,
    emit_plot_data,
    first_hit,
    learned_vs_chebyshev,
    reference_solution,
    ridge_problem,
    run_bench,
    run_ridge,
    synthetic_ridge_data,
    trace_series,
)
from chebgd.linalg import QuadraticProblem
from chebgd.sched import StepSchedule, Origin
from chebgd.solvers import Algorithm


def test_plot_data_empty():
    buf = io.StringIO()
    emit_plot_data(buf, [], comment="nothing")
    assert buf.getvalue() == "# nothing\n"


def test_plot_data_two_blocks_and_clamping():
    buf = io.StringIO()
    emit_plot_data(buf, [("A", [0, 1], [1.0, 0.5]), ("B", [0, 1], [2.0, 0.0])])
    blocks = buf.getvalue().split("\n\n\n")
    assert len(blocks) == 2
    assert blocks[0].splitlines() == ["# series: A", "0 1", "1 0.5"]
    assert "1 1.0000000000000001e-300" in blocks[1] or "1 1e-300" in blocks[1]
    assert buf.getvalue().rstrip().endswith("clamped to 1e-300")


def test_bench_fig7_recipe_has_five_series(tmp_path):
    learned = StepSchedule(np.full(5, 0.2), 0.3, 3.0, Origin.LEARNED)
    cfg = BenchConfig(n=30, m=120, T=5, iters=20, samples=4,
                      algos=("GDConstant", "CHGD", "DUGD"), schedule="unused")
    res = run_bench(cfg, learned)
    series = trace_series(res.traces) + res.rate_lines
    buf = io.StringIO()
    emit_plot_data(buf, series)
    assert buf.getvalue().count("# series:") == 5


def test_bench_chgd_below_constant_after_first_period():
    res = run_bench(BenchConfig(n=60, m=240, T=15, iters=60, samples=10))
    gd, ch = res.traces
    sel = gd.t >= 15
    assert np.all(ch.mse[sel] < gd.mse[sel])


def test_bench_zero_samples_gives_empty_traces():
    res = run_bench(BenchConfig(n=10, m=40, samples=0))
    assert res.traces == [] and res.rate_lines == []


def test_bench_config_validation():
    with pytest.raises(InvalidParams):
        BenchConfig(algos=("DUGD",))
    with pytest.raises(ValueError):
        BenchConfig(algos=("Nope",))
    with pytest.raises(InvalidParams):
        BenchConfig(T=0)


def test_describe_is_flat():
    text = describe(BenchConfig(algos=("CHGD", "Momentum")))
    assert "algos=CHGD,Momentum" in text and "n=100" in text


def test_reference_solution_matches_numpy(rng):
    h = rng.standard_normal((30, 6))
    y = rng.standard_normal(30)
    p = ridge_problem(h, y, 0.7)
    np.testing.assert_allclose(reference_solution(p), np.linalg.solve(h.T @ h + 0.7 * np.eye(6), h.T @ y))


def test_singular_system_detected():
    p = QuadraticProblem(np.array([[1.0, 0.0], [0.0, -1.0]]), target=np.ones(2))
    with pytest.raises(SingularSystem):
        reference_solution(p)
    with pytest.raises(InvalidParams):
        ridge_problem(np.ones((3, 2)), np.ones(3), 0.0)


def test_well_conditioned_ridge_converges_fast(rng):
    h = rng.standard_normal((200, 10)) / np.sqrt(200)
    y = rng.standard_normal(200)
    p = ridge_problem(h, y, 0.5)
    assert np.linalg.cond(p.matrix_a) < 10
    res = run_ridge(p, RidgeConfig(eta=0.5, T=8, iters=200))
    for tr in res.traces:
        assert tr.mse[-1] <= 1e-10


def test_large_eta_ridge_is_nearly_trivial(rng):
    h = rng.standard_normal((50, 5))
    y = rng.standard_normal(50)
    p = ridge_problem(h, y, 1e8)
    res = run_ridge(p, RidgeConfig(eta=1e8, T=4, iters=8))
    assert np.linalg.norm(res.reference) < 1e-5
    for tr in res.traces:
        assert first_hit(tr, 1e-20 + 1e-8 * tr.mse[0]) is not None


def test_synthetic_ridge_spectrum():
    h, y, eig = synthetic_ridge_data(20, 100, seed=1, decades=2.0, isolated=1e-5)
    np.testing.assert_allclose(np.linalg.eigvalsh(h.T @ h), eig, rtol=1e-8)
    assert eig[-1] / eig[0] == pytest.approx(1e5)
    assert y.shape == (100,)


def test_first_hit_and_comparison_rows():
    res = run_bench(BenchConfig(n=10, m=40, T=3, iters=30, samples=2))
    assert first_hit(res.traces[1], 0.0) is None or res.traces[1].mse.min() == 0.0
    assert first_hit(res.traces[0], np.inf) == 0
    rows = learned_vs_chebyshev([0.5, 0.1, 0.3], 1.0, 9.0)
    assert rows.shape == (3, 4)
    assert np.all(np.diff(rows[:, 1]) > 0)
    assert res.traces[0].algorithm is Algorithm.GD_CONSTANT
