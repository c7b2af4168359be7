"""Dense actor and critic networks with hand-written backward passes.

Every network keeps its parameters in ``params``, a flat list of arrays in
declaration order (weight, bias, weight, bias, ...). Forward passes return
an output and a cache; ``backward`` consumes that cache.
"""

from __future__ import annotations

import numpy as np

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0


def init_dense(rng: np.random.Generator, fan_in: int, fan_out: int, dtype, scale: float = 1.0):
    bound = scale / np.sqrt(fan_in)
    w = rng.uniform(-bound, bound, size=(fan_in, fan_out)).astype(dtype)
    b = rng.uniform(-bound, bound, size=fan_out).astype(dtype)
    return w, b


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0, out=x)


def _dense_relu(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    h = x @ w
    h += b
    return np.maximum(h, 0, out=h)


def _relu_grad(g: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Zero ``g`` where the ReLU output ``h`` is inactive (in place)."""
    np.multiply(g, h > 0, out=g)
    return g


class Network:
    """Parameters live as views into one contiguous ``flat`` buffer so that
    optimizer and target updates touch a single array."""

    layer_shapes: list[tuple[int, int]]
    params: list[np.ndarray]
    flat: np.ndarray

    def _adopt(self, arrays: list[np.ndarray]) -> None:
        self.flat = np.concatenate([a.ravel() for a in arrays])
        self._bind()

    def _bind(self) -> None:
        views, k = [], 0
        for shape in self.param_shapes():
            size = int(np.prod(shape))
            views.append(self.flat[k : k + size].reshape(shape))
            k += size
        self.params = views

    def param_shapes(self) -> list[tuple[int, ...]]:
        out = []
        for i, o in self.layer_shapes:
            out += [(i, o), (o,)]
        return out

    def copy(self):
        other = object.__new__(type(self))
        other.__dict__.update(self.__dict__)
        other.flat = self.flat.copy()
        other._bind()
        return other

    def load_from(self, other: Network) -> None:
        if other.flat.shape != self.flat.shape:
            raise ValueError("architecture mismatch")
        self.flat[...] = other.flat

    @staticmethod
    def flatten_grads(grads: list[np.ndarray]) -> np.ndarray:
        return np.concatenate([g.ravel() for g in grads])

    @property
    def dtype(self):
        return self.flat.dtype

    def num_params(self) -> int:
        return self.flat.size


class Actor(Network):
    """obs -> 3 x ReLU(hidden) -> head.

    Deterministic actors squash the 2-wide head with tanh. Stochastic (SAC)
    actors return a raw 4-wide head read as (mean, log_std).
    """

    def __init__(self, obs_dim=40, hidden=256, act_dim=2, stochastic=False, dtype=np.float32, rng=None):
        rng = rng if rng is not None else np.random.default_rng()
        self.obs_dim, self.hidden, self.act_dim = obs_dim, hidden, act_dim
        self.stochastic = stochastic
        head = 2 * act_dim if stochastic else act_dim
        self.layer_shapes = [(obs_dim, hidden), (hidden, hidden), (hidden, hidden), (hidden, head)]
        arrays = []
        for k, (i, o) in enumerate(self.layer_shapes):
            last = k == len(self.layer_shapes) - 1
            arrays.extend(init_dense(rng, i, o, dtype, 0.1 if last else 1.0))
        self._adopt(arrays)

    def forward(self, obs: np.ndarray):
        p = self.params
        if obs.shape[-1] != self.obs_dim:
            raise ValueError(f"expected obs width {self.obs_dim}, got {obs.shape[-1]}")
        x = obs
        h1 = _dense_relu(x, p[0], p[1])
        h2 = _dense_relu(h1, p[2], p[3])
        h3 = _dense_relu(h2, p[4], p[5])
        z = h3 @ p[6]
        z += p[7]
        out = z if self.stochastic else np.tanh(z)
        return out, (x, h1, h2, h3, out)

    def __call__(self, obs):
        return self.forward(obs)[0]

    def backward(self, cache, grad_out: np.ndarray):
        p = self.params
        x, h1, h2, h3, out = cache
        gz = grad_out if self.stochastic else grad_out * (1 - out * out)
        g6, g7 = h3.T @ gz, gz.sum(0)
        gh = _relu_grad(gz @ p[6].T, h3)
        g4, g5 = h2.T @ gh, gh.sum(0)
        gh = _relu_grad(gh @ p[4].T, h2)
        g2, g3 = h1.T @ gh, gh.sum(0)
        gh = _relu_grad(gh @ p[2].T, h1)
        g0, g1 = x.T @ gh, gh.sum(0)
        return [g0, g1, g2, g3, g4, g5, g6, g7]


class QNet(Network):
    """Split-input Q network: separate state and action branches of width
    hidden/2, concatenated, then one ReLU layer and a linear output."""

    def __init__(self, obs_dim=40, act_dim=2, hidden=256, dtype=np.float32, rng=None):
        rng = rng if rng is not None else np.random.default_rng()
        half = hidden // 2
        self.obs_dim, self.act_dim, self.hidden = obs_dim, act_dim, hidden
        self.layer_shapes = [(obs_dim, half), (act_dim, half), (2 * half, hidden), (hidden, 1)]
        arrays = []
        for i, o in self.layer_shapes:
            arrays.extend(init_dense(rng, i, o, dtype))
        self._adopt(arrays)

    def forward(self, obs: np.ndarray, act: np.ndarray):
        p = self.params
        if obs.shape[-1] != self.obs_dim or act.shape[-1] != self.act_dim:
            raise ValueError("obs/action width mismatch")
        if obs.shape[0] != act.shape[0]:
            raise ValueError("obs and action batch sizes differ")
        half = p[0].shape[1]
        hs = _dense_relu(obs, p[0], p[1])
        ha = _dense_relu(act, p[2], p[3])
        # concat(hs, ha) @ W without materializing the concatenation
        h2 = hs @ p[4][:half]
        h2 += ha @ p[4][half:]
        h2 += p[5]
        _relu(h2)
        q = (h2 @ p[6] + p[7])[:, 0]
        return q, (obs, act, hs, ha, h2)

    def __call__(self, obs, act):
        return self.forward(obs, act)[0]

    def backward(self, cache, grad_q: np.ndarray, need_params: bool = True):
        """Returns (param grads or None, grad wrt action)."""
        p = self.params
        obs, act, hs, ha, h2 = cache
        half = p[0].shape[1]
        gq = grad_q[:, None].astype(h2.dtype, copy=False)
        # broadcasting beats a k=1 matmul for this outer product
        gh2 = _relu_grad(gq * p[6].T, h2)
        gha = _relu_grad(gh2 @ p[4][half:].T, ha)
        g_act = gha @ p[2].T
        if not need_params:
            return None, g_act
        ghs = _relu_grad(gh2 @ p[4][:half].T, hs)
        g4 = np.empty_like(p[4])
        np.matmul(hs.T, gh2, out=g4[:half])
        np.matmul(ha.T, gh2, out=g4[half:])
        grads = [
            obs.T @ ghs, ghs.sum(0),
            act.T @ gha, gha.sum(0),
            g4, gh2.sum(0),
            h2.T @ gq, gq.sum(0),
        ]
        return grads, g_act


class TwinCritic:
    """Two independent Q networks."""

    def __init__(self, obs_dim=40, act_dim=2, hidden=256, dtype=np.float32, rng=None):
        rng = rng if rng is not None else np.random.default_rng()
        self.q1 = QNet(obs_dim, act_dim, hidden, dtype, rng)
        self.q2 = QNet(obs_dim, act_dim, hidden, dtype, rng)

    @property
    def params(self) -> list[np.ndarray]:
        return self.q1.params + self.q2.params

    @property
    def layer_shapes(self):
        return self.q1.layer_shapes

    @property
    def flats(self) -> list[np.ndarray]:
        return [self.q1.flat, self.q2.flat]

    def copy(self) -> TwinCritic:
        other = object.__new__(TwinCritic)
        other.q1, other.q2 = self.q1.copy(), self.q2.copy()
        return other

    def load_from(self, other: TwinCritic) -> None:
        self.q1.load_from(other.q1)
        self.q2.load_from(other.q2)

    def __call__(self, obs, act):
        return self.q1(obs, act), self.q2(obs, act)


def critic_forward(critic: TwinCritic, obs, act):
    return critic(obs, act)


def actor_forward(actor: Actor, obs):
    """Deterministic action in (-1, 1); SAC actors return tanh(mean)."""
    out = actor(obs)
    if actor.stochastic:
        return np.tanh(out[..., : actor.act_dim])
    return out
