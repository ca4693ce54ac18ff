"""Adam with decoupled L2 regularization."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .tensor import Parameter


class Adam:
    """Bias-corrected Adam; weight decay is applied to the value, not the gradient."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8, weight_decay=0.0):
        if lr <= 0:
            raise ConfigError(f"learning rate must be positive, got {lr}")
        self.params: list[Parameter] = list(params)
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.weight_decay = float(weight_decay)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        for p in self.params:
            if p.grad is None:
                continue
            if self.weight_decay:
                p.data *= 1.0 - self.lr * self.weight_decay
            p.adam_step += 1
            t = p.adam_step
            p.adam_m = self.beta1 * p.adam_m + (1.0 - self.beta1) * p.grad
            p.adam_v = self.beta2 * p.adam_v + (1.0 - self.beta2) * p.grad**2
            m_hat = p.adam_m / (1.0 - self.beta1**t)
            v_hat = p.adam_v / (1.0 - self.beta2**t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
