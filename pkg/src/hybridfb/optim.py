"""First-order optimizers acting on flat real parameter vectors."""

import numpy as np


class SGD:
    """Plain gradient descent with optional decoupled weight decay."""

    def __init__(self, lr, weight_decay=0.0):
        self.lr = lr
        self.weight_decay = weight_decay

    def step(self, params, grad):
        return params - self.lr * self.weight_decay * params - self.lr * grad


class AdamW:
    """Adaptive moment estimation with decoupled weight decay.

    Keeps exponential averages of the gradient and its square, corrects
    their initialization bias, and applies weight decay directly to the
    parameters rather than through the gradient.
    """

    def __init__(self, lr, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.0):
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.m = None
        self.v = None
        self.t = 0

    def step(self, params, grad):
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        decayed = params - self.lr * self.weight_decay * params
        return decayed - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(name, lr, weight_decay=0.0):
    if name == "adaptive_moments":
        return AdamW(lr, weight_decay=weight_decay)
    if name == "plain_sgd":
        return SGD(lr, weight_decay=weight_decay)
    raise ValueError(f"unknown optimizer {name!r}")
