import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from navseed.nn import (
    Actor,
    Adam,
    ArchitectureMismatchError,
    ModelFormatError,
    ModelParams,
    QNet,
    TwinCritic,
    actor_forward,
    critic_forward,
    gaussian_tanh_log_density,
    load_model,
    sac_sample,
    sac_sample_backward,
    save_model,
    soft_update,
    squash_correction,
)


def relu(x):
    return x if x > 0 else 0.0


def dense_loop(x, w, b, act):
    return [act(sum(x[i] * w[i][o] for i in range(len(x))) + b[o]) for o in range(len(b))]


def actor_oracle(actor, obs_row):
    p = [a.astype(np.float64).tolist() for a in actor.params]
    h = list(map(float, obs_row))
    for k in range(3):
        h = dense_loop(h, p[2 * k], p[2 * k + 1], relu)
    return dense_loop(h, p[6], p[7], math.tanh)


def q_oracle(q, obs_row, act_row):
    p = [a.astype(np.float64).tolist() for a in q.params]
    hs = dense_loop(list(map(float, obs_row)), p[0], p[1], relu)
    ha = dense_loop(list(map(float, act_row)), p[2], p[3], relu)
    h2 = dense_loop(hs + ha, p[4], p[5], relu)
    return dense_loop(h2, p[6], p[7], lambda z: z)[0]


def zero(net):
    net.flat[...] = 0


# architecture and forward


def test_architecture_shapes():
    a = Actor(rng=np.random.default_rng(0))
    assert a.layer_shapes == [(40, 256), (256, 256), (256, 256), (256, 2)]
    s = Actor(stochastic=True, rng=np.random.default_rng(0))
    assert s.layer_shapes[-1] == (256, 4)
    q = QNet(rng=np.random.default_rng(0))
    assert q.layer_shapes == [(40, 128), (2, 128), (256, 256), (256, 1)]
    assert a.dtype == np.float32


def test_zero_weights_give_zero_outputs():
    rng = np.random.default_rng(1)
    a = Actor(rng=rng)
    c = TwinCritic(rng=rng)
    zero(a), zero(c.q1), zero(c.q2)
    obs = rng.random((5, 40)).astype(np.float32)
    assert np.all(actor_forward(a, obs) == 0)
    q1, q2 = critic_forward(c, obs, rng.uniform(-1, 1, (5, 2)).astype(np.float32))
    assert np.all(q1 == 0) and np.all(q2 == 0)


def test_batch_consistency():
    rng = np.random.default_rng(2)
    a = Actor(rng=rng)
    obs = rng.random((32, 40)).astype(np.float32)
    full = actor_forward(a, obs)
    for k in (0, 7, 31):
        assert np.allclose(actor_forward(a, obs[k : k + 1])[0], full[k], atol=1e-6)


def test_actor_matches_loop_oracle():
    rng = np.random.default_rng(3)
    a = Actor(hidden=16, dtype=np.float64, rng=rng)
    obs = rng.random((3, 40))
    out = actor_forward(a, obs)
    for k in range(3):
        assert np.allclose(out[k], actor_oracle(a, obs[k]), atol=1e-6)


def test_critic_matches_loop_oracle():
    rng = np.random.default_rng(4)
    c = TwinCritic(hidden=16, dtype=np.float64, rng=rng)
    obs, act = rng.random((3, 40)), rng.uniform(-1, 1, (3, 2))
    q1, q2 = critic_forward(c, obs, act)
    for k in range(3):
        assert q1[k] == pytest.approx(q_oracle(c.q1, obs[k], act[k]), abs=1e-6)
        assert q2[k] == pytest.approx(q_oracle(c.q2, obs[k], act[k]), abs=1e-6)


def test_q2_perturbation_leaves_q1():
    rng = np.random.default_rng(5)
    c = TwinCritic(rng=rng)
    obs, act = rng.random((4, 40)).astype(np.float32), rng.uniform(-1, 1, (4, 2)).astype(np.float32)
    q1, q2 = c(obs, act)
    c.q2.flat += 0.1
    q1b, q2b = c(obs, act)
    assert np.array_equal(q1, q1b) and not np.array_equal(q2, q2b)
    assert not np.shares_memory(c.q1.flat, c.q2.flat)


def test_forward_bit_deterministic():
    rng = np.random.default_rng(6)
    a = Actor(rng=rng)
    obs = rng.random((8, 40)).astype(np.float32)
    assert actor_forward(a, obs).tobytes() == actor_forward(a, obs).tobytes()


def test_shape_mismatch_errors():
    rng = np.random.default_rng(7)
    with pytest.raises(ValueError):
        Actor(rng=rng)(np.zeros((2, 39), np.float32))
    q = QNet(rng=rng)
    with pytest.raises(ValueError):
        q(np.zeros((2, 40), np.float32), np.zeros((3, 2), np.float32))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_actor_output_bounded(seed):
    rng = np.random.default_rng(seed)
    a = Actor(hidden=32, rng=rng)
    out = actor_forward(a, rng.normal(0, 10, (16, 40)).astype(np.float32))
    assert np.all(np.abs(out) <= 1.0)


# backward


def test_linear_mse_hand_gradient():
    # a 1 -> 1 linear map is the last layer of a critic with everything else fixed
    w, b, x, y = 0.7, -0.2, 1.5, 0.3
    loss_grad_w = 2 * (w * x + b - y) * x
    loss_grad_b = 2 * (w * x + b - y)
    eps = 1e-6
    f = lambda w_, b_: (w_ * x + b_ - y) ** 2
    assert loss_grad_w == pytest.approx((f(w + eps, b) - f(w - eps, b)) / (2 * eps), rel=1e-6)
    assert loss_grad_b == pytest.approx((f(w, b + eps) - f(w, b - eps)) / (2 * eps), rel=1e-6)


def fd_grads(net, loss, eps=1e-5):
    out = []
    for p in net.params:
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            old = p[idx]
            p[idx] = old + eps
            lp = loss()
            p[idx] = old - eps
            lm = loss()
            p[idx] = old
            g[idx] = (lp - lm) / (2 * eps)
        out.append(g)
    return out


def rel_err(a, n):
    a, n = np.concatenate([x.ravel() for x in a]), np.concatenate([x.ravel() for x in n])
    return np.linalg.norm(a - n) / max(np.linalg.norm(a), np.linalg.norm(n), 1e-30)


def test_actor_backward_matches_finite_differences():
    rng = np.random.default_rng(8)
    a = Actor(obs_dim=40, hidden=8, dtype=np.float64, rng=rng)
    obs = rng.random((4, 40))
    target = rng.uniform(-0.5, 0.5, (4, 2))
    loss = lambda: float(((a(obs) - target) ** 2).sum())
    out, cache = a.forward(obs)
    analytic = a.backward(cache, 2 * (out - target))
    assert rel_err(analytic, fd_grads(a, loss)) < 1e-4


def test_critic_backward_matches_finite_differences():
    rng = np.random.default_rng(9)
    q = QNet(obs_dim=6, hidden=8, dtype=np.float64, rng=rng)
    obs, act, y = rng.random((5, 6)), rng.uniform(-1, 1, (5, 2)), rng.normal(size=5)
    loss = lambda: float(((q(obs, act) - y) ** 2).mean())
    out, cache = q.forward(obs, act)
    grads, g_act = q.backward(cache, 2 * (out - y) / 5)
    assert rel_err(grads, fd_grads(q, loss)) < 1e-4
    # gradient with respect to the action input
    num = np.zeros_like(act)
    for idx in np.ndindex(act.shape):
        old = act[idx]
        act[idx] = old + 1e-5
        lp = loss()
        act[idx] = old - 1e-5
        lm = loss()
        act[idx] = old
        num[idx] = (lp - lm) / 2e-5
    assert rel_err([g_act], [num]) < 1e-4


def test_zero_loss_gives_zero_gradients():
    rng = np.random.default_rng(10)
    q = QNet(obs_dim=6, hidden=8, dtype=np.float64, rng=rng)
    obs, act = rng.random((5, 6)), rng.uniform(-1, 1, (5, 2))
    out, cache = q.forward(obs, act)
    grads, _ = q.backward(cache, 2 * (out - out))
    assert all(np.all(g == 0) for g in grads)


def test_tanh_saturation_is_finite():
    rng = np.random.default_rng(11)
    a = Actor(hidden=8, dtype=np.float64, rng=rng)
    a.params[7][...] = 20.0  # pre-activation pushed to the saturation regime
    a.params[6][...] = 0.0
    out, cache = a.forward(rng.random((3, 40)))
    grads = a.backward(cache, np.ones_like(out))
    assert all(np.all(np.isfinite(g)) for g in grads)
    assert np.abs(grads[7]).max() < 1e-12


# Adam


def test_adam_first_step_is_lr_sign():
    p = np.array([1.0])
    opt = Adam([p], lr=1e-3)
    opt.step([np.array([0.37])])
    assert p[0] == pytest.approx(1.0 - 1e-3, abs=1e-6)
    q = np.array([1.0])
    Adam([q], lr=1e-3).step([np.array([-5.0])])
    assert q[0] == pytest.approx(1.0 + 1e-3, abs=1e-6)


def test_adam_zero_gradient():
    p = np.array([2.0, -1.0])
    opt = Adam([p], lr=0.1)
    opt.step([np.zeros(2)])
    assert np.array_equal(p, [2.0, -1.0]) and opt.t == 1
    opt.step([np.zeros(2)])
    assert opt.t == 2


def test_adam_two_steps_by_hand():
    lr, b1, b2, eps, g = 0.01, 0.9, 0.999, 1e-8, 0.5
    x = 1.0
    m = v = 0.0
    for t in (1, 2):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        x -= lr * (m / (1 - b1**t)) / (math.sqrt(v / (1 - b2**t)) + eps)
    p = np.array([1.0])
    opt = Adam([p], lr=lr)
    opt.step([np.array([g])])
    opt.step([np.array([g])])
    assert p[0] == pytest.approx(x, abs=1e-7)


def test_adam_shape_mismatch():
    with pytest.raises(ValueError):
        Adam([np.zeros(3)], 0.1).step([np.zeros(2)])


# soft update


def test_soft_update_endpoints():
    rng = np.random.default_rng(12)
    t, o = rng.random(5), rng.random(5)
    t0 = t.copy()
    soft_update([t], [o], 0.0)
    assert np.array_equal(t, t0)
    soft_update([t], [o], 1.0)
    assert np.array_equal(t, o)


def test_soft_update_half():
    t, o = np.array([1.0]), np.array([0.0])
    soft_update([t], [o], 0.5)
    assert t[0] == 0.5


def test_soft_update_rejects_bad_tau():
    with pytest.raises(ValueError):
        soft_update([np.zeros(1)], [np.zeros(1)], 1.5)
    with pytest.raises(ValueError):
        soft_update([np.zeros(1)], [np.zeros(1)], -0.1)


@given(st.floats(0, 1), st.floats(-10, 10), st.floats(-10, 10))
def test_soft_update_convex_combination(tau, a, b):
    t = np.array([a])
    soft_update([t], [np.array([b])], tau)
    assert min(a, b) - 1e-9 <= t[0] <= max(a, b) + 1e-9


# SAC head


def test_sac_actions_bounded():
    rng = np.random.default_rng(13)
    a = Actor(hidden=16, stochastic=True, rng=rng)
    obs = rng.random((100_000, 40)).astype(np.float32)
    act, logp, _ = sac_sample(a, obs, rng)
    assert np.all(np.abs(act) <= 1.0) and np.all(np.isfinite(logp))
    assert act.shape == (100_000, 2)


def test_sac_zero_std_limit():
    rng = np.random.default_rng(14)
    a = Actor(hidden=16, stochastic=True, rng=rng)
    a.params[6][:, 2:] = 0.0
    a.params[7][2:] = -20.0  # log std at the lower clamp
    obs = rng.random((10, 40)).astype(np.float32)
    act, _, _ = sac_sample(a, obs, rng)
    assert np.allclose(act, actor_forward(a, obs), atol=1e-6)
    det, _, _ = sac_sample(a, obs, deterministic=True)
    assert np.array_equal(det, actor_forward(a, obs))


def test_sac_log_prob_matches_numerical_density():
    rng = np.random.default_rng(15)
    a = Actor(hidden=16, stochastic=True, dtype=np.float64, rng=rng)
    a.params[7][2:] = -0.5
    obs = rng.random((100, 40))
    act, logp, _ = sac_sample(a, obs, rng)
    z = a(obs)
    mu, ls = z[:, :2], np.clip(z[:, 2:], -20, 2)
    h = 1e-5
    lo, hi = np.clip(act - h, -1 + 1e-12, 1), np.clip(act + h, -1, 1 - 1e-12)
    mass = norm.cdf((np.arctanh(hi) - mu) / np.exp(ls)) - norm.cdf((np.arctanh(lo) - mu) / np.exp(ls))
    numeric = np.log(mass / (hi - lo)).sum(axis=1)
    assert np.max(np.abs(numeric - logp)) < 1e-3
    assert np.allclose(gaussian_tanh_log_density(act, mu, ls), logp, atol=1e-6)


def test_squash_correction_stable():
    u = np.array([-30.0, -1.0, 0.0, 2.0, 30.0])
    ref = np.log(1 - np.tanh(u[1:4]) ** 2)
    out = squash_correction(u)
    assert np.allclose(out[1:4], ref)
    assert np.all(np.isfinite(out))


def test_sac_sample_backward_matches_finite_differences():
    rng = np.random.default_rng(16)
    a = Actor(obs_dim=6, hidden=8, stochastic=True, dtype=np.float64, rng=rng)
    obs = rng.random((4, 6))
    eps = rng.standard_normal((4, 2))
    w_act, w_lp = rng.normal(size=(4, 2)), rng.normal(size=4)

    def loss():
        act, lp, _ = sac_sample(a, obs, eps=eps)
        return float((act * w_act).sum() + (lp * w_lp).sum())

    _, _, cache = sac_sample(a, obs, eps=eps)
    analytic = sac_sample_backward(a, cache, w_act, w_lp)
    assert rel_err(analytic, fd_grads(a, loss)) < 1e-4


def test_sac_sample_needs_stochastic_actor():
    with pytest.raises(ValueError):
        sac_sample(Actor(hidden=8, rng=np.random.default_rng(0)), np.zeros((1, 40), np.float32), np.random.default_rng(0))


# model files


@pytest.mark.parametrize("algo", ["ddpg", "sac", "td3"])
def test_model_round_trip(tmp_path, algo):
    m = ModelParams.create(algo, np.random.default_rng(17), hidden=16)
    m.target_critic.q1.flat += 0.5
    save_model(m, tmp_path / "m.navm")
    back = load_model(tmp_path / "m.navm")
    assert back.algo == algo
    for x, y in zip(m.all_params(), back.all_params()):
        assert x.tobytes() == y.tobytes()
    assert (back.target_actor is None) == (algo == "sac")


def test_model_wrong_algo(tmp_path):
    save_model(ModelParams.create("ddpg", np.random.default_rng(0), hidden=8), tmp_path / "m.navm")
    with pytest.raises(ArchitectureMismatchError):
        load_model(tmp_path / "m.navm", expect_algo="sac")


def test_model_truncated_and_bad_magic():
    buf = ModelParams.create("td3", np.random.default_rng(0), hidden=8).to_bytes()
    with pytest.raises(ModelFormatError, match="truncated"):
        ModelParams.from_bytes(buf[:-4])
    with pytest.raises(ModelFormatError, match="magic"):
        ModelParams.from_bytes(b"XXXX" + buf[4:])
    with pytest.raises(ModelFormatError, match="truncated"):
        ModelParams.from_bytes(buf[:10])


def test_model_copy_is_independent():
    m = ModelParams.create("td3", np.random.default_rng(0), hidden=8)
    c = m.copy()
    c.actor.flat += 1.0
    assert not np.array_equal(c.actor.flat, m.actor.flat)
    assert np.array_equal(m.target_actor.flat, m.actor.flat)


def test_targets_start_equal_to_online():
    m = ModelParams.create("td3", np.random.default_rng(0), hidden=8)
    assert np.array_equal(m.target_critic.q1.flat, m.critic.q1.flat)
    assert not np.shares_memory(m.target_critic.q1.flat, m.critic.q1.flat)
