"""DDPG, SAC and TD3 updates on a shared actor / twin-critic store.

Loss functions return ``(loss, grads)`` and never touch parameters; the
``*_update`` functions apply Adam steps and target tracking through a
:class:`Learner`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..nn import Adam, ModelParams, Network, QNet, sac_sample, sac_sample_backward, soft_update
from .buffers import Minibatch
from .hyper import HyperParams


@dataclass
class UpdateResult:
    critic_loss: float
    actor_loss: float | None
    td_errors: np.ndarray


def _cast(batch: Minibatch, dtype):
    c = lambda a: np.asarray(a, dtype=dtype)
    return c(batch.states), c(batch.actions), c(batch.rewards), c(batch.next_states), c(batch.dones), c(batch.weights)


# targets


def ddpg_target(model: ModelParams, batch: Minibatch, hp: HyperParams) -> np.ndarray:
    dt = model.actor.dtype
    _, _, r, s2, d, _ = _cast(batch, dt)
    a2 = model.target_actor(s2)
    q2 = model.target_critic.q1(s2, a2)
    return r + hp.gamma * (1.0 - d) * q2


def td3_target(model: ModelParams, batch: Minibatch, hp: HyperParams, noise: np.ndarray | None = None, rng=None) -> np.ndarray:
    """Clipped double-Q target with clipped Gaussian smoothing noise.

    ``noise`` is the pre-clip standard-normal draw; it is sampled from ``rng``
    when omitted.
    """
    dt = model.actor.dtype
    _, _, r, s2, d, _ = _cast(batch, dt)
    a2 = model.target_actor(s2)
    if noise is None:
        noise = rng.standard_normal(a2.shape)
    eps = np.clip(hp.td3_target_noise * np.asarray(noise, dt), -hp.td3_noise_clip, hp.td3_noise_clip)
    a2 = np.clip(a2 + eps, -1.0, 1.0).astype(dt, copy=False)
    q1, q2 = model.target_critic(s2, a2)
    return r + hp.gamma * (1.0 - d) * np.minimum(q1, q2)


def sac_target(model: ModelParams, batch: Minibatch, hp: HyperParams, eps: np.ndarray | None = None, rng=None) -> np.ndarray:
    """Soft clipped double-Q target. The next action and its log-probability
    come from the current actor unless a target actor is kept."""
    dt = model.actor.dtype
    _, _, r, s2, d, _ = _cast(batch, dt)
    policy = model.target_actor if model.target_actor is not None else model.actor
    a2, logp2, _ = sac_sample(policy, s2, rng, eps=eps)
    q1, q2 = model.target_critic(s2, a2)
    return r + hp.gamma * (1.0 - d) * (np.minimum(q1, q2) - hp.sac_alpha * logp2)


# losses


def critic_loss(qnets: list[QNet], batch: Minibatch, y: np.ndarray):
    """Sum over critics of the importance-weighted mean squared TD error.

    Returns (loss, grads concatenated per critic, Q1 - y).
    """
    dt = qnets[0].dtype
    s, a, _, _, _, w = _cast(batch, dt)
    y = np.asarray(y, dt)
    n = len(y)
    total = 0.0
    grads: list[np.ndarray] = []
    td = None
    for q in qnets:
        val, cache = q.forward(s, a)
        err = val - y
        if td is None:
            td = err.astype(np.float64)
        total += float(np.mean(w.astype(np.float64) * err.astype(np.float64) ** 2))
        g, _ = q.backward(cache, (2.0 / n) * w * err)
        grads.extend(g)
    return total, grads, td


def deterministic_actor_loss(model: ModelParams, states: np.ndarray):
    """-mean Q1(s, pi(s)); gradient with respect to the actor only."""
    actor, q1 = model.actor, model.critic.q1
    s = np.asarray(states, actor.dtype)
    a, acache = actor.forward(s)
    q, qcache = q1.forward(s, a)
    n = len(s)
    _, g_act = q1.backward(qcache, np.full(n, -1.0 / n, actor.dtype), need_params=False)
    return -float(np.mean(q.astype(np.float64))), actor.backward(acache, g_act)


def sac_actor_loss(model: ModelParams, states: np.ndarray, alpha: float, eps: np.ndarray | None = None, rng=None):
    """mean(alpha * log pi(a|s) - min_j Qj(s, a)) with reparameterized a."""
    actor = model.actor
    s = np.asarray(states, actor.dtype)
    a, logp, scache = sac_sample(actor, s, rng, eps=eps)
    (q1, c1), (q2, c2) = model.critic.q1.forward(s, a), model.critic.q2.forward(s, a)
    n = len(s)
    pick1 = q1 <= q2
    qmin = np.where(pick1, q1, q2)
    loss = float(np.mean(alpha * logp.astype(np.float64) - qmin.astype(np.float64)))
    _, ga1 = model.critic.q1.backward(c1, np.where(pick1, -1.0 / n, 0.0).astype(actor.dtype), need_params=False)
    _, ga2 = model.critic.q2.backward(c2, np.where(pick1, 0.0, -1.0 / n).astype(actor.dtype), need_params=False)
    grads = sac_sample_backward(actor, scache, ga1 + ga2, np.full(n, alpha / n, actor.dtype))
    return loss, grads


# updates


@dataclass
class Learner:
    """A model plus its optimizers, RNG and 1-based update counter."""

    model: ModelParams
    hp: HyperParams
    rng: np.random.Generator
    actor_opt: Adam = field(init=False)
    critic_opt: Adam = field(init=False)
    updates: int = 0

    def __post_init__(self):
        m = self.model
        self.actor_opt = Adam([m.actor.flat], self.hp.lr)
        self.critic_opt = Adam([m.critic.q1.flat] if m.algo == "ddpg" else m.critic.flats, self.hp.lr)

    def step_critic(self, grads: list[np.ndarray]) -> None:
        """Apply per-parameter critic gradients (8 arrays per Q network)."""
        self.critic_opt.step([Network.flatten_grads(grads[k : k + 8]) for k in range(0, len(grads), 8)])

    def step_actor(self, grads: list[np.ndarray]) -> None:
        self.actor_opt.step([Network.flatten_grads(grads)])

    def update(self, batch: Minibatch) -> UpdateResult:
        return UPDATES[self.model.algo](self, batch)


def _actor_due(learner: Learner) -> bool:
    learner.updates += 1
    return learner.updates % learner.hp.policy_delay == 0


def ddpg_update(learner: Learner, batch: Minibatch) -> UpdateResult:
    m, hp = learner.model, learner.hp
    if m.algo != "ddpg":
        raise ValueError("ddpg_update needs a ddpg model")
    due = _actor_due(learner)
    y = ddpg_target(m, batch, hp)
    c_loss, grads, td = critic_loss([m.critic.q1], batch, y)
    learner.step_critic(grads)
    a_loss = None
    if due:
        a_loss, agrads = deterministic_actor_loss(m, batch.states)
        learner.step_actor(agrads)
        soft_update([m.target_actor.flat], [m.actor.flat], hp.tau)
    soft_update([m.target_critic.q1.flat], [m.critic.q1.flat], hp.tau)
    return UpdateResult(c_loss, a_loss, td)


def td3_update(learner: Learner, batch: Minibatch) -> UpdateResult:
    m, hp = learner.model, learner.hp
    if m.algo != "td3":
        raise ValueError("td3_update needs a td3 model")
    due = _actor_due(learner)
    y = td3_target(m, batch, hp, rng=learner.rng)
    c_loss, grads, td = critic_loss([m.critic.q1, m.critic.q2], batch, y)
    learner.step_critic(grads)
    a_loss = None
    if due:
        a_loss, agrads = deterministic_actor_loss(m, batch.states)
        learner.step_actor(agrads)
        soft_update([m.target_actor.flat], [m.actor.flat], hp.tau)
        soft_update(m.target_critic.flats, m.critic.flats, hp.tau)
    return UpdateResult(c_loss, a_loss, td)


def sac_update(learner: Learner, batch: Minibatch) -> UpdateResult:
    m, hp = learner.model, learner.hp
    if m.algo != "sac":
        raise ValueError("sac_update needs a sac model")
    due = _actor_due(learner)
    y = sac_target(m, batch, hp, rng=learner.rng)
    c_loss, grads, td = critic_loss([m.critic.q1, m.critic.q2], batch, y)
    learner.step_critic(grads)
    a_loss = None
    if due:
        a_loss, agrads = sac_actor_loss(m, batch.states, hp.sac_alpha, rng=learner.rng)
        learner.step_actor(agrads)
        if m.target_actor is not None:
            soft_update([m.target_actor.flat], [m.actor.flat], hp.tau)
    soft_update(m.target_critic.flats, m.critic.flats, hp.tau)
    return UpdateResult(c_loss, a_loss, td)


UPDATES = {"ddpg": ddpg_update, "sac": sac_update, "td3": td3_update}
