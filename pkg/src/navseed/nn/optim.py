from __future__ import annotations

import numpy as np


class Adam:
    """Bias-corrected Adam updating a list of arrays in place."""

    def __init__(self, params: list[np.ndarray], lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self._buf = [np.empty_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        if len(grads) != len(self.params):
            raise ValueError("gradient list does not match parameters")
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1**self.t
        c2 = 1.0 - b2**self.t
        for p, g, m, v, buf in zip(self.params, grads, self.m, self.v, self._buf):
            if g.shape != p.shape:
                raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
            # in place through one scratch buffer: these arrays hold ~10^5 values
            m *= b1
            np.multiply(g, 1.0 - b1, out=buf)
            m += buf
            v *= b2
            np.multiply(g, g, out=buf)
            buf *= 1.0 - b2
            v += buf
            if self.lr == 0.0:
                continue
            # bias corrections folded into the step size and epsilon:
            # lr * m_hat / (sqrt(v_hat) + eps) == step * m / (sqrt(v) + eps * sqrt(c2))
            np.sqrt(v, out=buf)
            buf += self.eps * np.sqrt(c2)
            np.divide(m, buf, out=buf)
            buf *= self.lr * np.sqrt(c2) / c1
            p -= buf


def soft_update(target: list[np.ndarray], online: list[np.ndarray], tau: float) -> None:
    """target <- tau * online + (1 - tau) * target, in place.

    Written as target += tau * (online - target) so a target that already
    equals its online network stays bit-identical.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    for t, o in zip(target, online, strict=True):
        if t.shape != o.shape:
            raise ValueError("target/online shape mismatch")
        if tau == 1.0:
            t[...] = o
        elif tau != 0.0:
            d = o - t
            d *= tau
            t += d
