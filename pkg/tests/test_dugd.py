import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chebgd.dugd import (
    InitDistribution,
    TrainConfig,
    TrainState,
    adam_step,
    evaluate_mse,
    forward_unrolled,
    grad_gammas,
    incremental_train,
    loss_and_grad,
    loss_mse,
    sample_initial_points,
    train_generation,
)
from chebgd.errors import ShapeMismatch
from chebgd.linalg import QuadraticProblem, generate_gaussian_problem
from chebgd.solvers import run_gd

DIAG = QuadraticProblem(np.diag([1.0, 9.0]))


def expected_loss_diag(gamma):
    # x0 ~ N(1, I) on diag(1, 9): E||x_1||^2 / n = 2 * mean((1 - gamma * lambda)^2)
    return np.mean(2.0 * (1.0 - gamma * np.array([1.0, 9.0])) ** 2)


def test_forward_matches_solver(rng):
    p = generate_gaussian_problem(8, 20, 0)
    g = np.array([0.3, 0.1, 0.5])
    x0 = rng.standard_normal((3, 8))
    fw = forward_unrolled(p, g, x0)
    assert fw.intermediates.shape == (4, 3, 8)
    assert loss_mse(fw.outputs) == pytest.approx(run_gd(p, g, x0, 3).mse[-1], rel=1e-13)


def test_gradient_single_step_closed_form():
    x0 = np.array([[1.0, 1.0]])
    # L(g) = ((1 - g)^2 + (1 - 9 g)^2) / 2, L'(g) = -(1 - g) - 9 (1 - 9 g)
    g = 0.15
    assert grad_gammas(DIAG, [g], x0)[0] == pytest.approx(-(1 - g) - 9 * (1 - 9 * g))


@given(st.integers(1, 6), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_gradient_matches_central_differences(n, T, seed):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((2 * n, n)) / math.sqrt(n)
    p = QuadraticProblem.from_gram(h, 0.2, rng.standard_normal(2 * n))
    lmax = np.linalg.eigvalsh(p.matrix_a)[-1]
    g = rng.uniform(0.1, 1.5, T) / lmax
    x0 = rng.standard_normal((3, n))
    ref = rng.standard_normal(n)
    analytic = grad_gammas(p, g, x0, reference=ref)
    eps = 1e-6
    fd = np.array([
        (loss_mse(forward_unrolled(p, g + eps * e, x0).outputs, ref)
         - loss_mse(forward_unrolled(p, g - eps * e, x0).outputs, ref)) / (2 * eps)
        for e in np.eye(T)
    ])
    assert np.max(np.abs(analytic - fd)) <= 1e-6 * max(1.0, np.max(np.abs(fd)))


def test_loss_and_grad_consistent(rng):
    p = generate_gaussian_problem(5, 10, 2)
    x0 = rng.standard_normal((2, 5))
    loss, grad = loss_and_grad(p, [0.2, 0.4], x0)
    assert loss == pytest.approx(loss_mse(forward_unrolled(p, [0.2, 0.4], x0).outputs))
    np.testing.assert_allclose(grad, grad_gammas(p, [0.2, 0.4], x0))


def test_shape_errors():
    with pytest.raises(ShapeMismatch):
        forward_unrolled(DIAG, [0.1], np.ones((2, 3)))
    with pytest.raises(ShapeMismatch):
        adam_step(TrainState.initial([0.1, 0.2]), np.ones(3), 0.01)
    with pytest.raises(ShapeMismatch):
        TrainState(np.ones(2), np.ones(3), np.ones(2))


def test_adam_first_step_moves_by_learning_rate():
    state = adam_step(TrainState.initial([0.5, 0.5]), np.array([2.0, -3.0]), 0.01)
    np.testing.assert_allclose(state.gammas, [0.49, 0.51], rtol=1e-6)
    assert state.adam_steps == 1


def test_adam_second_step_by_hand():
    b1, b2, lr, eps = 0.9, 0.999, 0.1, 1e-8
    g1, g2 = 1.0, 0.5
    s = adam_step(adam_step(TrainState.initial([0.0]), [g1], lr), [g2], lr)
    m = b1 * (1 - b1) * g1 + (1 - b1) * g2
    v = b2 * (1 - b2) * g1**2 + (1 - b2) * g2**2
    step1 = lr * g1 / (abs(g1) + eps)
    step2 = lr * (m / (1 - b1**2)) / (math.sqrt(v / (1 - b2**2)) + eps)
    assert s.gammas[0] == pytest.approx(-(step1 + step2), rel=1e-12)


def test_sampling_laws():
    rng = np.random.default_rng(0)
    unit = sample_initial_points(rng, 20000, 3, InitDistribution.GAUSSIAN_UNIT_MEAN)
    zero = sample_initial_points(rng, 20000, 3, InitDistribution.ZERO_START)
    assert np.allclose(unit.mean(axis=0), 1.0, atol=0.05)
    assert np.allclose(zero.mean(axis=0), 0.0, atol=0.05)


def test_single_step_training_finds_expected_loss_minimum():
    grid = np.linspace(0.05, 0.25, 20001)
    best = grid[np.argmin([expected_loss_diag(g) for g in grid])]
    cfg = TrainConfig(T_max=1, minibatches_per_generation=3000, learning_rate=0.002,
                      eval_samples=1000, seed=3)
    learned = incremental_train(DIAG, cfg).schedules[0][0]
    assert learned == pytest.approx(best, abs=0.01)


def test_incremental_training_is_deterministic_and_grows():
    p = generate_gaussian_problem(10, 40, 0)
    cfg = TrainConfig(T_max=3, minibatches_per_generation=20, batch_size=16, eval_samples=100)
    r1 = incremental_train(p, cfg)
    r2 = incremental_train(p, cfg)
    assert [s.size for s in r1.schedules] == [1, 2, 3]
    for a, b in zip(r1.schedules, r2.schedules):
        np.testing.assert_array_equal(a, b)
    assert r1.losses == r2.losses
    assert [g for g, _ in r1.state.loss_history] == [1, 2, 3]


def test_training_steps_report_progress():
    p = generate_gaussian_problem(6, 20, 1)
    seen = []
    cfg = TrainConfig(T_max=2, minibatches_per_generation=4, batch_size=8, eval_samples=10)
    incremental_train(p, cfg, on_step=lambda gen, step, g, loss: seen.append((gen, step)))
    assert seen == [(1, 0), (1, 1), (1, 2), (1, 3), (2, 0), (2, 1), (2, 2), (2, 3)]


def test_zero_minibatches_leaves_state_untouched():
    state = TrainState.initial([0.3])
    cfg = TrainConfig(T_max=1, minibatches_per_generation=0)
    assert train_generation(DIAG, state, cfg) is state


def test_evaluate_mse_chunking_matches_direct():
    g = [0.1, 0.2]
    a = evaluate_mse(DIAG, g, 5000, np.random.default_rng(1), chunk=700)
    b = evaluate_mse(DIAG, g, 5000, np.random.default_rng(1), chunk=5000)
    assert a == pytest.approx(b, rel=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(T_max=0)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
    assert TrainConfig(init_distribution="ZeroStart").init_distribution is InitDistribution.ZERO_START
