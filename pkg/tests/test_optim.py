"""Adam update rule, bias correction, and mask re-application."""

import numpy as np
import pytest

from enggnn.nn.optim import Adam


def reference_adam(params, grad_fn, lr, n_steps, beta1=0.9, beta2=0.999, eps=1e-8):
    """Straightforward loop-based Adam used as an independent oracle."""
    params = [p.copy() for p in params]
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    for t in range(1, n_steps + 1):
        grads = grad_fn(params)
        for i, g in enumerate(grads):
            m[i] = beta1 * m[i] + (1 - beta1) * g
            v[i] = beta2 * v[i] + (1 - beta2) * g * g
            m_hat = m[i] / (1 - beta1**t)
            v_hat = v[i] / (1 - beta2**t)
            params[i] -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return params


def test_first_step_is_signed_learning_rate():
    """With bias correction, step 1 moves by ~lr * sign(gradient)."""
    theta = np.array([1.0, -2.0, 0.5])
    opt = Adam([theta], learning_rate=0.1)
    opt.step([np.array([3.0, -4.0, 1e-3])])
    np.testing.assert_allclose(theta, [0.9, -1.9, 0.4], rtol=1e-4)


def test_hand_computed_two_steps():
    theta = np.array([0.0])
    opt = Adam([theta], learning_rate=0.5)
    opt.step([np.array([2.0])])
    # m=0.2, v=0.004, m_hat=2, v_hat=4 -> theta = -0.5*2/(2+1e-8)
    assert theta[0] == pytest.approx(-0.5, rel=1e-7)
    after_first = theta[0]
    opt.step([np.array([1.0])])
    m = 0.9 * 0.2 + 0.1 * 1.0
    v = 0.999 * 0.004 + 0.001 * 1.0
    m_hat = m / (1 - 0.9**2)
    v_hat = v / (1 - 0.999**2)
    want = after_first - 0.5 * m_hat / (np.sqrt(v_hat) + 1e-8)
    assert theta[0] == pytest.approx(want, rel=1e-12)


def test_matches_reference_loop_on_quadratic():
    rng = np.random.default_rng(0)
    start = [rng.normal(size=(3, 2)), rng.normal(size=4)]
    target = [rng.normal(size=(3, 2)), rng.normal(size=4)]

    def grad_fn(ps):
        return [2 * (p - t) for p, t in zip(ps, target)]

    want = reference_adam(start, grad_fn, lr=0.05, n_steps=40)
    params = [p.copy() for p in start]
    opt = Adam(params, learning_rate=0.05)
    for _ in range(40):
        opt.step(grad_fn(params))
    for got, ref in zip(params, want):
        np.testing.assert_allclose(got, ref, atol=1e-12)


def test_updates_in_place():
    theta = np.zeros(2)
    opt = Adam([theta], learning_rate=0.1)
    opt.step([np.ones(2)])
    assert opt.params[0] is theta
    assert theta[0] != 0.0


def test_mask_reapplied_after_update():
    theta = np.array([[1.0, 0.0], [0.0, 1.0]])
    mask = np.eye(2)
    opt = Adam([theta], learning_rate=0.1)
    opt.step([np.ones((2, 2))], masks=[mask])
    assert theta[0, 1] == 0.0 and theta[1, 0] == 0.0
    assert theta[0, 0] != 1.0


def test_gradient_count_validated():
    opt = Adam([np.zeros(2)])
    with pytest.raises(ValueError):
        opt.step([np.zeros(2), np.zeros(2)])


def test_invalid_hyperparameters_rejected():
    with pytest.raises(ValueError):
        Adam([np.zeros(1)], learning_rate=-1.0)
    with pytest.raises(ValueError):
        Adam([np.zeros(1)], beta1=1.0)
    with pytest.raises(ValueError):
        Adam([np.zeros(1)], eps=0.0)
