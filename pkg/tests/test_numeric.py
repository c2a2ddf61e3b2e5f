import numpy as np
import pytest

from kgfuse import SgdConfig, grad_check, init_uniform, sgd_step
from kgfuse.errors import NumericError


def test_init_uniform_deterministic():
    a = init_uniform(10, 5, seed=3)
    b = init_uniform(10, 5, seed=3)
    assert np.array_equal(a, b)


def test_init_uniform_bound_dim36():
    m = init_uniform(100, 36, seed=0)
    assert np.all(m >= -1.0) and np.all(m <= 1.0)  # 6/sqrt(36) = 1


def test_init_uniform_mean_near_zero():
    m = init_uniform(1000, 100, seed=7)
    assert abs(float(m.mean())) < 0.01


def test_init_uniform_bad_shape():
    with pytest.raises(ValueError):
        init_uniform(0, 5, seed=0)


def test_sgd_step_zero_grad():
    p = np.array([1.0, 2.0])
    sgd_step(p, np.zeros(2), 0.5)
    assert np.array_equal(p, [1.0, 2.0])


def test_sgd_step_arithmetic():
    p = np.array([1.0, 2.0])
    sgd_step(p, np.array([2.0, -2.0]), 0.5)
    assert np.array_equal(p, [0.0, 3.0])


def test_sgd_step_zero_lr():
    p = np.array([1.0, 2.0])
    sgd_step(p, np.array([5.0, -3.0]), 0.0)
    assert np.array_equal(p, [1.0, 2.0])


def test_sgd_step_shape_mismatch():
    with pytest.raises(ValueError):
        sgd_step(np.zeros(2), np.zeros(3), 0.1)


def test_grad_check_quadratic():
    p = np.array([1.5, -0.3, 2.0])
    loss = lambda: float(np.sum(p * p))
    assert grad_check(loss, 2.0 * p, p) < 1e-8


def test_grad_check_flags_wrong_gradient():
    # 1-D: loss p^2 at p=1, true grad 2; doubled analytic grad 4 gives
    # |4 - 2| / max(1, 6) = 1/3
    p = np.array([1.0])
    loss = lambda: float(p[0] ** 2)
    err = grad_check(loss, np.array([4.0]), p)
    assert err == pytest.approx(1.0 / 3.0, abs=1e-6)


def test_grad_check_constant_loss():
    p = np.array([0.4, -1.2])
    assert grad_check(lambda: 3.0, np.zeros(2), p) == 0.0


def test_grad_check_nonfinite_loss():
    p = np.array([1.0])
    with pytest.raises(NumericError):
        grad_check(lambda: float("nan"), np.zeros(1), p)


def test_grad_check_epsilon_range():
    p = np.array([1.0])
    with pytest.raises(ValueError):
        grad_check(lambda: 0.0, np.zeros(1), p, epsilon=1e-2)


def test_sgd_config_validation():
    with pytest.raises(ValueError):
        SgdConfig(batch_size=0)
    with pytest.raises(ValueError):
        SgdConfig(margin=-1.0)
    with pytest.raises(ValueError):
        SgdConfig(norm_order=3)
    with pytest.raises(ValueError):
        SgdConfig(learning_rate=-0.1)
    SgdConfig(learning_rate=0.0)  # no-op optimizer is allowed
