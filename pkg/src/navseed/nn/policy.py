"""Tanh-squashed Gaussian policy head for SAC."""

from __future__ import annotations

import math

import numpy as np

from .layers import LOG_STD_MAX, LOG_STD_MIN, Actor

HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def squash_correction(u: np.ndarray) -> np.ndarray:
    """log(1 - tanh(u)^2), stable for large |u|."""
    return 2.0 * (math.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))


def sac_sample(actor: Actor, obs: np.ndarray, rng: np.random.Generator | None = None, *, eps: np.ndarray | None = None, deterministic: bool = False):
    """Reparameterized sample ``tanh(mu + std * eps)`` and its log-density.

    Returns ``(action, log_prob, cache)``; pass the cache to
    :func:`sac_sample_backward`. ``deterministic`` uses eps = 0, i.e. tanh(mu).
    """
    if not actor.stochastic:
        raise ValueError("sac_sample needs a stochastic actor")
    z, acache = actor.forward(obs)
    d = actor.act_dim
    mu, raw_ls = z[:, :d], z[:, d:]
    log_std = np.clip(raw_ls, LOG_STD_MIN, LOG_STD_MAX)
    std = np.exp(log_std)
    if deterministic:
        eps = np.zeros_like(mu)
    elif eps is None:
        if rng is None:
            raise ValueError("stochastic sampling needs an rng or explicit eps")
        eps = rng.standard_normal(mu.shape).astype(mu.dtype)
    u = mu + std * eps
    action = np.tanh(u)
    log_prob = (-0.5 * eps * eps - log_std - HALF_LOG_2PI - squash_correction(u)).sum(axis=1)
    cache = (acache, raw_ls, std, eps, u, action)
    return action, log_prob, cache


def sac_sample_backward(actor: Actor, cache, grad_action: np.ndarray, grad_log_prob: np.ndarray):
    acache, raw_ls, std, eps, u, action = cache
    du = grad_action * (1.0 - action * action) + grad_log_prob[:, None] * 2.0 * action
    g_mu = du
    g_ls = du * std * eps - grad_log_prob[:, None]
    g_ls = g_ls * ((raw_ls >= LOG_STD_MIN) & (raw_ls <= LOG_STD_MAX))
    return actor.backward(acache, np.concatenate([g_mu, g_ls], axis=1).astype(actor.dtype, copy=False))


def gaussian_tanh_log_density(action: np.ndarray, mu: np.ndarray, log_std: np.ndarray) -> np.ndarray:
    """Density of tanh(N(mu, std^2)) evaluated at ``action`` (change of variables)."""
    u = np.arctanh(action)
    std = np.exp(log_std)
    z = (u - mu) / std
    return (-0.5 * z * z - log_std - HALF_LOG_2PI - np.log1p(-action * action)).sum(axis=-1)
