"""Matching loss values and Adam update arithmetic."""

import numpy as np
import pytest

from layoutdiff.nn.loss import perm_xent_loss
from layoutdiff.nn.model import Parameter
from layoutdiff.nn.optim import Adam, adam_step
from layoutdiff.nn.tensor import Tensor

from test_tensor import check_grads


def test_loss_matches_hand_computed_value():
    # mass-weighted mean of -log over the target cells
    P = np.array([[0.9, 0.05, 0.05], [0.2, 0.7, 0.1], [0.1, 0.2, 0.7]])
    G = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
    expected = -(np.log(0.9) + np.log(0.7)) / 2.0
    got = perm_xent_loss(Tensor(P), G).data.item()
    assert got == pytest.approx(expected, rel=1e-12)


def test_perfect_prediction_loss_is_zero():
    G = np.eye(3)
    assert perm_xent_loss(Tensor(G), G).data.item() == pytest.approx(0.0, abs=1e-15)


def test_fractional_split_target_prefers_balanced_mass():
    # a split row targets half mass on each child
    G = np.array([[0.5, 0.5, 0.0]])
    balanced = perm_xent_loss(Tensor(np.array([[0.5, 0.5, 0.0]])), G).data.item()
    collapsed = perm_xent_loss(Tensor(np.array([[0.95, 0.05, 0.0]])), G).data.item()
    assert balanced == pytest.approx(np.log(2.0), rel=1e-12)
    assert collapsed > balanced


def test_fractional_target_weighting():
    # each cell contributes t * -log(p), normalized by total target mass
    P = np.array([[0.6, 0.2, 0.2]])
    G = np.array([[0.5, 0.25, 0.0]])
    expected = -(0.5 * np.log(0.6) + 0.25 * np.log(0.2)) / 0.75
    assert perm_xent_loss(Tensor(P), G).data.item() == pytest.approx(expected, rel=1e-12)


def test_slack_corner_excluded_from_loss():
    # the padded corner parks unused capacity and can exceed 1; it must not score
    P = np.array([[0.9, 0.1], [0.1, 3.0]])
    G = np.array([[1.0, 0.0], [0.0, 1.0]])
    expected = -np.log(0.9)
    assert perm_xent_loss(Tensor(P), G).data.item() == pytest.approx(expected, rel=1e-12)


def test_saturated_predictions_are_clamped_finite():
    P = np.array([[0.0, 1.0], [1.0, 0.0]])
    G = np.array([[1.0, 0.0], [0.0, 0.0]])
    loss = perm_xent_loss(Tensor(P), G).data.item()
    assert np.isfinite(loss)
    assert loss == pytest.approx(-np.log(1e-9), rel=1e-6)


def test_all_zero_target_gives_zero_loss():
    P = np.array([[0.5, 0.5], [0.5, 0.5]])
    G = np.zeros((2, 2))
    assert perm_xent_loss(Tensor(P), G).data.item() == 0.0


def test_loss_validates_shapes_and_range():
    with pytest.raises(ValueError, match="shape"):
        perm_xent_loss(Tensor(np.zeros((2, 2))), np.zeros((2, 3)))
    with pytest.raises(ValueError, match="lie in"):
        perm_xent_loss(Tensor(np.full((1, 1), 0.5)), np.array([[1.5]]))


def test_loss_gradient_by_finite_difference():
    rng = np.random.default_rng(0)
    P = Tensor(rng.uniform(0.05, 0.95, size=(4, 4)), requires_grad=True)
    G = np.eye(4)
    check_grads(lambda: perm_xent_loss(P, G), [P])


def test_adam_step_first_update_hand_oracle():
    g = np.array([0.5, -2.0])
    value, m, v = adam_step(np.zeros(2), g, np.zeros(2), np.zeros(2), t=1, lr=0.1)
    # bias-corrected first step moves by ~lr in the gradient direction
    expect = -0.1 * g / (np.abs(g) + 1e-8)
    assert np.allclose(value, expect, rtol=1e-6)
    assert np.allclose(m, 0.1 * g)
    assert np.allclose(v, 0.001 * g * g)


def test_adam_step_rejects_step_zero():
    z = np.zeros(1)
    with pytest.raises(ValueError, match="t must be >= 1"):
        adam_step(z, z, z, z, t=0)


def _reference_adam(values, grads_per_step, lr):
    """Straight transcription of the update equations."""
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    m = [np.zeros_like(x) for x in values]
    v = [np.zeros_like(x) for x in values]
    values = [x.copy() for x in values]
    for t, grads in enumerate(grads_per_step, start=1):
        for k, g in enumerate(grads):
            m[k] = beta1 * m[k] + (1 - beta1) * g
            v[k] = beta2 * v[k] + (1 - beta2) * g * g
            mh = m[k] / (1 - beta1**t)
            vh = v[k] / (1 - beta2**t)
            values[k] = values[k] - lr * mh / (np.sqrt(vh) + eps)
    return values


def test_adam_class_matches_reference_over_steps():
    rng = np.random.default_rng(1)
    init = [rng.normal(size=(3, 2)), rng.normal(size=4)]
    params = [
        Parameter("a", Tensor(init[0].copy(), requires_grad=True)),
        Parameter("b", Tensor(init[1].copy(), requires_grad=True)),
    ]
    opt = Adam(params, lr=0.01)
    grads = [[rng.normal(size=(3, 2)), rng.normal(size=4)] for _ in range(5)]
    for ga, gb in grads:
        params[0].tensor.grad = ga
        params[1].tensor.grad = gb
        opt.step()
    expect = _reference_adam(init, grads, lr=0.01)
    assert np.allclose(params[0].tensor.data, expect[0], rtol=1e-12)
    assert np.allclose(params[1].tensor.data, expect[1], rtol=1e-12)


def test_zero_lr_leaves_parameters_bit_identical():
    rng = np.random.default_rng(2)
    w = rng.normal(size=(4, 4))
    p = Parameter("w", Tensor(w.copy(), requires_grad=True))
    opt = Adam([p], lr=0.0)
    for _ in range(3):
        p.tensor.grad = rng.normal(size=(4, 4))
        opt.step()
    assert p.tensor.data.tobytes() == w.tobytes()


def test_missing_gradient_treated_as_zero():
    p = Parameter("w", Tensor(np.ones(3), requires_grad=True))
    opt = Adam([p], lr=0.5)
    p.tensor.grad = None
    opt.step()
    assert np.allclose(p.tensor.data, np.ones(3))


def test_zero_grad_clears_gradients():
    p = Parameter("w", Tensor(np.ones(3), requires_grad=True))
    p.tensor.grad = np.ones(3)
    Adam([p]).zero_grad()
    assert p.tensor.grad is None
