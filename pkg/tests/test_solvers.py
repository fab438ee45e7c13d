import io
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chebgd.errors import (
    DegenerateSpectrumWarning,
    DimensionMismatch,
    InvalidParams,
    ScheduleEmpty,
)
from chebgd.linalg import QuadraticProblem, generate_gaussian_problem, jacobi_eigenvalues
from chebgd.sched import chebyshev_steps, constant_schedule, rate_lower_bound
from chebgd.solvers import (
    Algorithm,
    BaselineParams,
    cheb_semi_coefficients,
    log_slope,
    mse_against,
    read_traces_csv,
    run_cheb_semi,
    run_gd,
    run_momentum,
    write_traces_csv,
)

DIAG = QuadraticProblem(np.diag([1.0, 9.0]))


def test_constant_step_contracts_by_known_factor():
    tr = run_gd(DIAG, constant_schedule(1, 1.0, 9.0), np.array([1.0, 1.0]), 3)
    # |1 - 0.2| = |1 - 1.8| = 0.8 on both coordinates
    np.testing.assert_allclose(tr.mse, [1.0, 0.64, 0.64**2, 0.64**3], rtol=1e-14)
    assert tr.algorithm is Algorithm.GD_CONSTANT


def test_two_chebyshev_steps_annihilate_two_eigenvalues():
    # on a spectrum {1, 9} only the endpoints matter; steps 1 and 1/9 kill both
    tr = run_gd(DIAG, np.array([1.0, 1.0 / 9.0]), np.array([3.0, -2.0]), 2)
    assert tr.mse[-1] < 1e-30


def test_target_shifts_fixed_point():
    a = np.array([[2.0, 0.5], [0.5, 1.0]])
    b = np.array([1.0, -1.0])
    sol = np.linalg.solve(a, b)
    p = QuadraticProblem(a, target=b)
    lo, hi = np.linalg.eigvalsh(a)
    tr = run_gd(p, chebyshev_steps(4, lo, hi), np.zeros(2), 80, reference=sol)
    assert tr.mse[-1] < 1e-25


def test_batch_mse_is_mean_of_single_runs(rng):
    p = generate_gaussian_problem(10, 30, 0)
    sched = chebyshev_steps(3, 0.2, 4.0)
    x0 = rng.standard_normal((4, 10))
    batch = run_gd(p, sched, x0, 9).mse
    singles = np.mean([run_gd(p, sched, x, 9).mse for x in x0], axis=0)
    np.testing.assert_allclose(batch, singles, rtol=1e-12)


def test_stride_and_iterates():
    tr = run_gd(DIAG, np.array([0.2]), np.ones(2), 10, stride=5, keep_iterates=True)
    assert tr.t.tolist() == [0, 5, 10]
    assert tr.iterates.shape == (3, 2)
    assert tr.at(5) == pytest.approx(0.8**10)
    with pytest.raises(KeyError):
        tr.at(3)


def test_gd_errors():
    with pytest.raises(ScheduleEmpty):
        run_gd(DIAG, np.array([]), np.ones(2), 1)
    with pytest.raises(DimensionMismatch):
        run_gd(DIAG, np.array([0.1]), np.ones(3), 1)
    with pytest.raises(InvalidParams):
        run_gd(DIAG, np.array([0.1]), np.ones(2), 2, cyclic=False)


def test_semi_coefficients_example():
    # xi = 8/9 for kappa = 9 with the normalized variant: gamma_2 = 2 / (2 - 64/81) = 81/49
    g = cheb_semi_coefficients(8.0 / 9.0, 3)
    assert g[0] == 1.0
    assert g[1] == pytest.approx(81.0 / 49.0, rel=1e-15)
    assert g[2] == pytest.approx(4.0 / (4.0 - (64.0 / 81.0) * (81.0 / 49.0)))


@given(st.floats(0.0, 0.999), st.integers(3, 200))
def test_semi_coefficients_decrease_to_limit(xi, count):
    g = cheb_semi_coefficients(xi, count)
    limit = 2.0 / (1.0 + math.sqrt(1.0 - xi * xi))
    assert np.all(g[1:] >= limit - 1e-12)
    assert np.all(np.diff(g[1:]) <= 1e-12)


def test_semi_coefficients_converge():
    g = cheb_semi_coefficients(0.9, 400)
    assert g[-1] == pytest.approx(2.0 / (1.0 + math.sqrt(1.0 - 0.81)), rel=1e-12)


def test_baseline_params():
    p = BaselineParams.from_bounds(1.0, 9.0)
    assert p.gamma_prime == pytest.approx(0.25)
    assert p.beta == pytest.approx(0.25)
    assert p.xi == pytest.approx(0.8)
    assert p.semi_scale == pytest.approx(0.2)
    q = BaselineParams.from_bounds(1.0, 9.0, semi="normalized")
    assert (q.xi, q.semi_scale) == (pytest.approx(8 / 9), pytest.approx(1 / 9))
    with pytest.raises(InvalidParams):
        BaselineParams.from_bounds(1.0, 9.0, semi="other")
    with pytest.raises(InvalidParams):
        BaselineParams(1.0, 1.0, 0.5, 1.0)


@pytest.mark.parametrize("runner", [run_momentum, run_cheb_semi])
def test_accelerated_baselines_reach_optimal_rate(runner):
    p = generate_gaussian_problem(60, 120, 1)
    s = jacobi_eigenvalues(p)
    params = BaselineParams.from_bounds(s.lambda_min, s.lambda_max)
    tr = runner(p, params, np.ones(60), 400)
    ratio = log_slope(tr, 150, 400) / (2 * math.log(rate_lower_bound(s.kappa)))
    assert 0.85 < ratio < 1.1


def test_semi_warns_on_unit_condition_number():
    p = QuadraticProblem(2.0 * np.eye(3))
    params = BaselineParams.from_bounds(2.0, 2.0)
    with pytest.warns(DegenerateSpectrumWarning):
        tr = run_cheb_semi(p, params, np.ones(3), 2)
    assert tr.mse[1] == 0.0


def test_momentum_unit_condition_number_is_silent():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        tr = run_momentum(QuadraticProblem(2.0 * np.eye(2)), BaselineParams.from_bounds(2.0, 2.0),
                          np.ones(2), 1)
    assert tr.mse[1] < 1e-30


def test_mse_against_recomputes():
    tr = run_gd(DIAG, np.array([0.2]), np.ones(2), 2, keep_iterates=True)
    shifted = mse_against(tr, np.array([1.0, 1.0]))
    assert shifted.mse[0] == 0.0
    with pytest.raises(InvalidParams):
        mse_against(run_gd(DIAG, np.array([0.2]), np.ones(2), 2), np.ones(2))


def test_log_slope_of_exact_geometric():
    tr = run_gd(DIAG, np.array([0.2]), np.ones(2), 20)
    assert log_slope(tr, 0, 20) == pytest.approx(2 * math.log(0.8))
    with pytest.raises(InvalidParams):
        log_slope(tr, 5, 5)


def test_trace_csv_roundtrip():
    traces = [run_gd(DIAG, np.array([0.2]), np.ones(2), 3),
              run_momentum(DIAG, BaselineParams.from_bounds(1.0, 9.0), np.ones(2), 3)]
    buf = io.StringIO()
    write_traces_csv(buf, traces, comment="k=v")
    text = buf.getvalue()
    assert text.splitlines()[:2] == ["# k=v", "algorithm,t,mse"]
    back = read_traces_csv(io.StringIO(text))
    assert set(back) == {"GDConstant", "Momentum"}
    np.testing.assert_array_equal(back["GDConstant"][1], traces[0].mse)
