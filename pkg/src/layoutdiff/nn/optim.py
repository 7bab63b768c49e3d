"""Adam optimizer over named parameters."""

from __future__ import annotations

import numpy as np

__all__ = ["adam_step", "Adam"]


def adam_step(value, grad, m, v, t, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
    """One Adam update for a single array; returns (value, m, v).

    `t` is the 1-based step count used for bias correction.
    """
    if t < 1:
        raise ValueError("adam_step: t must be >= 1")
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    value = value - lr * m_hat / (np.sqrt(v_hat) + eps)
    return value, m, v


class Adam:
    """Stateful wrapper applying adam_step to a fixed parameter list.

    Parameters are visited in list order every step, so repeated runs
    with identical gradients produce bit-identical values.
    """

    def __init__(self, parameters, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.parameters = list(parameters)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = {p.name: np.zeros_like(p.tensor.data) for p in self.parameters}
        self._v = {p.name: np.zeros_like(p.tensor.data) for p in self.parameters}

    def zero_grad(self) -> None:
        for p in self.parameters:
            p.tensor.grad = None

    def step(self) -> None:
        self.t += 1
        for p in self.parameters:
            grad = p.tensor.grad
            if grad is None:
                grad = np.zeros_like(p.tensor.data)
            value, m, v = adam_step(
                p.tensor.data,
                grad,
                self._m[p.name],
                self._v[p.name],
                self.t,
                lr=self.lr,
                beta1=self.beta1,
                beta2=self.beta2,
                eps=self.eps,
            )
            p.tensor.data = value
            self._m[p.name] = m
            self._v[p.name] = v
