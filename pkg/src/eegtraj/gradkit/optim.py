"""Adam with bias correction.

Update rule per parameter, step counter t starting at 1:

    m = b1*m + (1-b1)*g        mhat = m / (1 - b1**t)
    v = b2*v + (1-b2)*g*g      vhat = v / (1 - b2**t)
    theta -= lr * mhat / (sqrt(vhat) + eps)

epsilon sits outside the square root. With defaults, the very first step
for a gradient of exactly 1 moves the parameter by lr / (1 + eps).
"""
from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteGradient


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0


def adam_step(param: np.ndarray, grad: np.ndarray, state: AdamState,
              lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> None:
    """One in-place update; raises on NaN/inf gradients before touching state."""
    if not np.all(np.isfinite(grad)):
        raise NonFiniteGradient("gradient contains NaN or infinite entries")
    state.t += 1
    state.m = beta1 * state.m + (1.0 - beta1) * grad
    state.v = beta2 * state.v + (1.0 - beta2) * grad * grad
    mhat = state.m / (1.0 - beta1 ** state.t)
    vhat = state.v / (1.0 - beta2 ** state.t)
    param -= lr * mhat / (np.sqrt(vhat) + eps)


@dataclass
class Adam:
    params: list                         # list of Tensors with .data/.grad
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    states: list = field(default_factory=list)

    def __post_init__(self):
        self.states = [AdamState(np.zeros_like(p.data), np.zeros_like(p.data))
                       for p in self.params]

    def step(self):
        for p, s in zip(self.params, self.states):
            if p.grad is None:
                continue
            adam_step(p.data, p.grad, s,
                      lr=self.lr, beta1=self.beta1, beta2=self.beta2, eps=self.eps)

    def zero_grad(self):
        for p in self.params:
            p.grad = None
