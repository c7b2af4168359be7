import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navseed.drl import (
    ExpertBuffer,
    HyperParams,
    Learner,
    Minibatch,
    ReplayBuffer,
    SumTree,
    TrainLog,
    critic_loss,
    ddpg_target,
    deterministic_actor_loss,
    online_train,
    per_sample,
    per_update_priorities,
    pretrain,
    sac_target,
    select_action,
    td3_target,
)
from navseed.expert import ExpertDataset, TransitionRecord
from navseed.nn import ModelParams, sac_sample
from navseed.sim import NavEnv, TerminalKind, builtin_map


def toy_dataset(n=64, seed=0, obs_dim=40, kinds=None):
    rng = np.random.default_rng(seed)
    kinds = kinds if kinds is not None else rng.integers(0, 4, n)
    return ExpertDataset(
        rng.random((n, obs_dim)).astype(np.float32), rng.uniform(-1, 1, (n, 2)).astype(np.float32),
        rng.normal(size=n).astype(np.float32), rng.random((n, obs_dim)).astype(np.float32),
        np.asarray(kinds, np.uint8),
    )


def toy_batch(n=8, seed=0, obs_dim=40, dones=None, dtype=np.float32):
    rng = np.random.default_rng(seed)
    d = np.zeros(n) if dones is None else np.asarray(dones, float)
    return Minibatch(
        rng.random((n, obs_dim)).astype(dtype), rng.uniform(-1, 1, (n, 2)).astype(dtype), rng.normal(size=n).astype(dtype),
        rng.random((n, obs_dim)).astype(dtype), d.astype(dtype), np.ones(n, dtype), np.arange(n), np.zeros(n, bool),
    )


def toy_model(algo, seed=0, obs_dim=40, hidden=16, dtype=np.float32):
    return ModelParams.create(algo, np.random.default_rng(seed), obs_dim=obs_dim, hidden=hidden, dtype=dtype)


# hyperparameters


def test_hyper_defaults():
    hp = HyperParams()
    assert (hp.gamma, hp.tau, hp.lr, hp.batch_size, hp.policy_delay) == (0.99, 0.005, 3e-6, 256, 2)


@pytest.mark.parametrize("kw", [{"gamma": 1.5}, {"tau": 0.0}, {"batch_size": 0}, {"policy_delay": 0},
                                {"expert_fraction_start": 1.2}, {"lr": -1.0}, {"per_eps": 0.0}])
def test_hyper_validation(kw):
    with pytest.raises(ValueError):
        HyperParams(**kw)


def test_schedules():
    hp = HyperParams()
    assert hp.expert_fraction(0, 100) == 0.5 and hp.expert_fraction(100, 100) == pytest.approx(0.1)
    assert hp.per_beta(0, 100) == 0.4 and hp.per_beta(100, 100) == 1.0
    assert hp.expert_fraction(50, 100) == pytest.approx(0.3)


# replay buffer


def test_ring_overwrites_oldest():
    buf = ReplayBuffer(3, obs_dim=1)
    for k in range(5):
        buf.add([k], [0, 0], float(k), [k + 1], False)
    assert len(buf) == 3
    assert sorted(buf.rewards.tolist()) == [2.0, 3.0, 4.0]
    assert buf.cursor == 2


def test_ring_samples_filled_region_only():
    buf = ReplayBuffer(100, obs_dim=1)
    for k in range(5):
        buf.add([k], [0, 0], 1.0, [k], k == 4)
    idx = buf.sample_indices(np.random.default_rng(0), 1000)
    assert idx.max() < 5
    b = buf.gather(np.array([4]))
    assert b.dones[0] == 1.0 and b.weights[0] == 1.0


def test_empty_buffer_sampling_fails():
    with pytest.raises(ValueError):
        ReplayBuffer(4).sample(np.random.default_rng(0), 2)


def test_minibatch_validation():
    b = toy_batch(4)
    with pytest.raises(ValueError):
        Minibatch(b.states[:3], b.actions, b.rewards, b.next_states, b.dones, b.weights, b.indices, b.from_expert)
    with pytest.raises(ValueError):
        Minibatch(b.states[:0], b.actions[:0], b.rewards[:0], b.next_states[:0], b.dones[:0], b.weights[:0],
                  b.indices[:0], b.from_expert[:0])


# sum tree and PER


def test_sumtree_single_update_delta():
    t = SumTree(10)
    t.update(np.arange(10), np.ones(10))
    before = t.total
    t.update([3], [4.5])
    assert t.total - before == 3.5


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 300), st.integers(0, 10_000))
def test_sumtree_root_matches_linear_scan(n, seed):
    rng = np.random.default_rng(seed)
    t = SumTree(n)
    vals = np.zeros(n)
    for _ in range(50):
        idx = rng.integers(0, n, size=rng.integers(1, 8))
        v = rng.random(len(idx)) * 10
        t.update(idx, v)
        for i, x in zip(idx, v):
            vals[i] = x
    assert math.isclose(t.total, vals.sum(), rel_tol=1e-6, abs_tol=1e-12)
    assert np.array_equal(t.leaves(), vals)


def test_sumtree_find_intervals():
    t = SumTree(3)
    t.update([0, 1, 2], [1.0, 0.0, 2.0])
    assert t.find(np.array([0.0, 0.99, 1.0, 2.5, 3.0])).tolist() == [0, 0, 2, 2, 2]


def test_sumtree_rejects_bad_input():
    t = SumTree(4)
    with pytest.raises(IndexError):
        t.update([4], [1.0])
    with pytest.raises(ValueError):
        t.update([0], [-1.0])


def test_per_frequencies_quarter_three_quarters():
    ds = toy_dataset(2)
    eb = ExpertBuffer(ds, alpha=1.0, eps=1e-12)
    eb.update_priorities([0, 1], [1.0, 3.0])
    idx = eb.sample_indices(np.random.default_rng(0), 1_000_000)
    freq = np.bincount(idx, minlength=2) / len(idx)
    assert abs(freq[0] - 0.25) < 0.02 and abs(freq[1] - 0.75) < 0.02


def test_per_single_record_fills_batch():
    eb = ExpertBuffer(toy_dataset(1))
    b = per_sample(eb, None, 16, 1.0, 0.4, np.random.default_rng(0))
    assert np.all(b.indices == 0) and np.all(b.weights == 1.0) and b.expert_rows == 16


def test_per_rho_endpoints():
    eb = ExpertBuffer(toy_dataset(10))
    online = ReplayBuffer(50)
    for k in range(20):
        online.add(np.zeros(40), [0, 0], 0.0, np.zeros(40), False)
    b = per_sample(eb, online, 32, 0.0, 0.4, np.random.default_rng(0))
    assert b.expert_rows == 0 and np.all(b.weights == 1.0)
    b = per_sample(eb, online, 32, 1.0, 0.4, np.random.default_rng(0))
    assert b.expert_rows == 32
    b = per_sample(eb, online, 10, 0.31, 0.4, np.random.default_rng(0))
    assert b.expert_rows == 4  # ceil(3.1)


def test_per_weights_normalized():
    eb = ExpertBuffer(toy_dataset(50))
    eb.update_priorities(np.arange(50), np.linspace(0, 5, 50))
    b = per_sample(eb, None, 64, 1.0, 0.7, np.random.default_rng(1))
    assert b.weights.max() == 1.0 and np.all(b.weights > 0)


def test_per_empty_buffers():
    with pytest.raises(ValueError):
        per_sample(None, ReplayBuffer(3), 4, 0.5, 0.4, np.random.default_rng(0))


def test_priority_floor_and_range():
    eb = ExpertBuffer(toy_dataset(5), eps=1e-3)
    per_update_priorities(eb, [2], [0.0])
    assert eb.priorities[2] == 1e-3
    with pytest.raises(IndexError):
        per_update_priorities(eb, [5], [1.0])


def test_per_distribution_total_variation():
    rng = np.random.default_rng(3)
    eb = ExpertBuffer(toy_dataset(100), alpha=0.6)
    eb.update_priorities(np.arange(100), rng.random(100) * 5)
    idx = eb.sample_indices(rng, 1_000_000)
    freq = np.bincount(idx, minlength=100) / len(idx)
    p = eb.priorities**0.6
    assert 0.5 * np.abs(freq - p / p.sum()).sum() < 0.02


# targets


@pytest.mark.parametrize("algo", ["ddpg", "td3", "sac"])
def test_gamma_zero_target_is_reward(algo):
    m, b = toy_model(algo), toy_batch()
    hp = HyperParams(gamma=0.0)
    rng = np.random.default_rng(0)
    y = {"ddpg": lambda: ddpg_target(m, b, hp), "td3": lambda: td3_target(m, b, hp, rng=rng),
         "sac": lambda: sac_target(m, b, hp, rng=rng)}[algo]()
    assert np.array_equal(y, b.rewards)


@pytest.mark.parametrize("algo", ["ddpg", "td3", "sac"])
def test_terminal_rows_do_not_bootstrap(algo):
    b = toy_batch(6, dones=[1, 0, 1, 0, 0, 1])
    m = toy_model(algo)
    rng = np.random.default_rng(0)
    hp = HyperParams()
    y = {"ddpg": lambda: ddpg_target(m, b, hp), "td3": lambda: td3_target(m, b, hp, rng=rng),
         "sac": lambda: sac_target(m, b, hp, rng=rng)}[algo]()
    done = b.dones == 1
    assert np.array_equal(y[done], b.rewards[done])
    assert not np.array_equal(y[~done], b.rewards[~done])


def test_td3_noise_free_target():
    m, b = toy_model("td3"), toy_batch()
    hp = HyperParams(td3_target_noise=0.0, td3_noise_clip=0.0)
    y = td3_target(m, b, hp, rng=np.random.default_rng(0))
    a2 = m.target_actor(b.next_states)
    q1, q2 = m.target_critic(b.next_states, a2)
    assert np.allclose(y, b.rewards + 0.99 * np.minimum(q1, q2), atol=1e-6)


def test_td3_scalar_hand_computation():
    m, b = toy_model("td3", dtype=np.float64), toy_batch(1, dtype=np.float64)
    hp = HyperParams(gamma=0.9, td3_target_noise=0.0, td3_noise_clip=0.0)
    b.rewards[0] = 1.0
    a2 = m.target_actor(b.next_states)
    q1, q2 = m.target_critic(b.next_states, a2)
    y = td3_target(m, b, hp, noise=np.zeros((1, 2)))
    assert y[0] == 1.0 + 0.9 * min(q1[0], q2[0])


@given(st.lists(st.floats(-50, 50), min_size=2, max_size=2))
@settings(max_examples=50, deadline=None)
def test_td3_noise_clipped(noise):
    # a target actor saturated at +1: noisy actions stay in [-1, 1] and within c of the clean action
    m = toy_model("td3", hidden=8)
    m.target_actor.params[7][...] = 50.0
    m.target_actor.params[6][...] = 0.0
    b = toy_batch(1)
    hp = HyperParams()
    captured = {}
    orig = m.target_critic.__class__.__call__

    def spy(self, s, a):
        captured["a"] = a.copy()
        return orig(self, s, a)

    m.target_critic.__class__.__call__ = spy
    try:
        td3_target(m, b, hp, noise=np.array([noise], np.float32))
    finally:
        m.target_critic.__class__.__call__ = orig
    a = captured["a"][0]
    assert np.all(a <= 1.0) and np.all(a >= 1.0 - hp.td3_noise_clip - 1e-6)


def test_sac_alpha_zero_deterministic_limit():
    m, b = toy_model("sac"), toy_batch()
    hp = HyperParams(sac_alpha=0.0)
    y = sac_target(m, b, hp, eps=np.zeros((len(b), 2), np.float32))
    a2, _, _ = sac_sample(m.actor, b.next_states, deterministic=True)
    q1, q2 = m.target_critic(b.next_states, a2)
    assert np.allclose(y, b.rewards + 0.99 * np.minimum(q1, q2), atol=1e-6)


# losses against scalar oracles


def test_ddpg_losses_scalar_oracle():
    m, b = toy_model("ddpg", obs_dim=3, hidden=2, dtype=np.float64), toy_batch(1, obs_dim=3, dtype=np.float64)
    hp = HyperParams()
    s, a, r, s2 = b.states[0], b.actions[0], float(b.rewards[0]), b.next_states[0]

    def q(net, s_, a_):
        p = [x.tolist() for x in net.params]
        hs = max(0.0, sum(s_[i] * p[0][i][0] for i in range(3)) + p[1][0])
        ha = max(0.0, sum(a_[i] * p[2][i][0] for i in range(2)) + p[3][0])
        h2 = [max(0.0, hs * p[4][0][k] + ha * p[4][1][k] + p[5][k]) for k in range(2)]
        return sum(h2[k] * p[6][k][0] for k in range(2)) + p[7][0]

    def pi(net, s_):
        p = [x.tolist() for x in net.params]
        h = list(s_)
        for layer in range(3):
            w, bias = p[2 * layer], p[2 * layer + 1]
            h = [max(0.0, sum(h[i] * w[i][o] for i in range(len(h))) + bias[o]) for o in range(len(bias))]
        return [math.tanh(sum(h[i] * p[6][i][o] for i in range(len(h))) + p[7][o]) for o in range(2)]

    y = r + 0.99 * q(m.target_critic.q1, s2, pi(m.target_actor, s2))
    assert ddpg_target(m, b, hp)[0] == pytest.approx(y, abs=1e-6)
    loss, _, td = critic_loss([m.critic.q1], b, np.array([y]))
    assert loss == pytest.approx((q(m.critic.q1, s, a) - y) ** 2, abs=1e-6)
    assert td[0] == pytest.approx(q(m.critic.q1, s, a) - y, abs=1e-6)
    a_loss, _ = deterministic_actor_loss(m, b.states)
    assert a_loss == pytest.approx(-q(m.critic.q1, s, pi(m.actor, s)), abs=1e-6)


def test_critic_loss_zero_at_perfect_targets():
    m, b = toy_model("td3", dtype=np.float64), toy_batch(dtype=np.float64)
    q1 = m.critic.q1(b.states, b.actions)
    m.critic.q2.load_from(m.critic.q1)
    loss, grads, td = critic_loss([m.critic.q1, m.critic.q2], b, q1)
    assert loss == 0.0 and all(np.all(g == 0) for g in grads) and np.all(td == 0)


def test_q1_only_loss_leaves_q2_gradients_out():
    m, b = toy_model("td3"), toy_batch()
    _, grads, _ = critic_loss([m.critic.q1], b, np.zeros(len(b)))
    assert len(grads) == 8


# updates


@pytest.mark.parametrize("algo", ["ddpg", "td3", "sac"])
def test_lr_zero_leaves_params_unchanged_but_reports_losses(algo):
    m = toy_model(algo)
    before = [p.copy() for p in (m.actor.flat, m.critic.q1.flat, m.critic.q2.flat)]
    learner = Learner(m, HyperParams(lr=0.0), np.random.default_rng(0))
    results = [learner.update(toy_batch(seed=k)) for k in range(4)]
    after = (m.actor.flat, m.critic.q1.flat, m.critic.q2.flat)
    assert all(np.array_equal(x, y) for x, y in zip(before, after))
    assert all(math.isfinite(r.critic_loss) for r in results)
    assert sum(r.actor_loss is not None for r in results) == 2


@pytest.mark.parametrize("algo", ["ddpg", "td3", "sac"])
def test_policy_delay_cadence(algo):
    m = toy_model(algo)
    learner = Learner(m, HyperParams(lr=1e-3, policy_delay=3), np.random.default_rng(0))
    actor_before = m.actor.flat.copy()
    first = learner.update(toy_batch())
    assert first.actor_loss is None and np.array_equal(m.actor.flat, actor_before)
    results = [first] + [learner.update(toy_batch(seed=k)) for k in range(1, 10)]
    assert sum(r.actor_loss is not None for r in results) == 10 // 3


def test_ddpg_leaves_q2_untouched():
    m = toy_model("ddpg")
    q2 = m.critic.q2.flat.copy()
    learner = Learner(m, HyperParams(lr=1e-3), np.random.default_rng(0))
    for k in range(3):
        learner.update(toy_batch(seed=k))
    assert np.array_equal(m.critic.q2.flat, q2)


def test_target_lag_is_tau_fraction():
    m = toy_model("td3", dtype=np.float64)
    hp = HyperParams(lr=1e-2, tau=0.005)
    learner = Learner(m, hp, np.random.default_rng(0))
    learner.update(toy_batch(seed=0))  # critic only
    old_target = m.target_critic.q1.flat.copy()
    learner.update(toy_batch(seed=1))  # actor step: targets move
    moved = m.target_critic.q1.flat - old_target
    assert np.allclose(moved, hp.tau * (m.critic.q1.flat - old_target), atol=1e-15)


def test_td3_targets_fixed_between_actor_steps():
    m = toy_model("td3")
    learner = Learner(m, HyperParams(lr=1e-3), np.random.default_rng(0))
    tgt = m.target_critic.q1.flat.copy()
    learner.update(toy_batch())
    assert np.array_equal(m.target_critic.q1.flat, tgt)


def test_critic_improves_on_fixed_batch():
    m = toy_model("td3", hidden=32)
    learner = Learner(m, HyperParams(lr=1e-3, gamma=0.0), np.random.default_rng(0))
    b = toy_batch(32)
    losses = [learner.update(b).critic_loss for _ in range(200)]
    assert losses[-1] < 0.2 * losses[0]


# pretraining


def test_pretrain_bookkeeping():
    ds = toy_dataset(64)
    _, log = pretrain(ds, "td3", HyperParams(batch_size=8, lr=1e-4), 100, 0)
    assert len(log.critic_losses()) == 100 and len(log.actor_losses()) == 50
    assert log.steps == list(range(1, 101))


def test_pretrain_lr_zero_keeps_init():
    ds = toy_dataset(64)
    m, _ = pretrain(ds, "ddpg", HyperParams(batch_size=8, lr=0.0), 20, 5)
    init = ModelParams.create("ddpg", np.random.default_rng(np.random.SeedSequence(5).spawn(3)[0]))
    for a, b in zip(m.all_params(), init.all_params()):
        assert a.tobytes() == b.tobytes()


@pytest.mark.parametrize("algo", ["ddpg", "td3", "sac"])
def test_pretrain_deterministic(algo):
    ds = toy_dataset(64)
    hp = HyperParams(batch_size=8, lr=1e-4)
    m1, l1 = pretrain(ds, algo, hp, 10, 3)
    m2, l2 = pretrain(ds, algo, hp, 10, 3)
    assert l1.critic_loss == l2.critic_loss
    assert all(a.tobytes() == b.tobytes() for a, b in zip(m1.all_params(), m2.all_params()))


def test_pretrain_errors():
    with pytest.raises(ValueError):
        pretrain(toy_dataset(8), "td3", HyperParams(), 0, 0)
    with pytest.raises(ValueError):
        pretrain(toy_dataset(8), "td3", HyperParams(batch_size=4), 1, 0, model=toy_model("td3", obs_dim=6))
    with pytest.raises(ValueError):
        pretrain(toy_dataset(8), "td3", HyperParams(batch_size=4), 1, 0, model=toy_model("sac"))


# online training


FAST = HyperParams(batch_size=16, lr=1e-4, warmup_steps=20)


def test_online_zero_steps_returns_init():
    init = toy_model("td3", hidden=256)
    env = NavEnv(builtin_map("corridor"))
    m, log = online_train(env, init, ExpertBuffer(toy_dataset()), "pretrain_per", "td3", FAST, 0, 0)
    assert m is init and not log.steps and not log.episodes


def test_scratch_never_uses_expert_rows():
    env = NavEnv(builtin_map("corridor"))
    _, log = online_train(env, None, None, "scratch", "td3", FAST, 80, 1)
    assert log.meta["expert_rows"] == 0
    # uniform online sampling starts once a batch is available
    assert log.steps[0] == FAST.batch_size


def test_per_mode_mixes_expert_rows():
    env = NavEnv(builtin_map("corridor"))
    eb = ExpertBuffer(toy_dataset())
    _, log = online_train(env, None, eb, "per", "td3", FAST, 40, 1)
    assert log.meta["expert_rows"] >= 40 * 2  # at least 10% of 16 rows each step
    assert log.steps == list(range(1, 41))
    assert not np.all(eb.priorities == 1.0)


def test_online_modes_preconditions():
    env = NavEnv(builtin_map("corridor"))
    with pytest.raises(ValueError):
        online_train(env, None, ExpertBuffer(toy_dataset()), "pretrain_per", "td3", FAST, 10, 0)
    with pytest.raises(ValueError):
        online_train(env, None, None, "per", "td3", FAST, 10, 0)
    with pytest.raises(ValueError):
        online_train(env, None, None, "bogus", "td3", FAST, 10, 0)


@pytest.mark.parametrize("algo", ["td3", "sac"])
def test_online_deterministic(algo):
    def run():
        env = NavEnv(builtin_map("corridor"))
        m, log = online_train(env, None, ExpertBuffer(toy_dataset()), "per", algo, FAST, 60, 4)
        return m, log

    (m1, l1), (m2, l2) = run(), run()
    assert l1.critic_loss == l2.critic_loss and l1.episodes == l2.episodes
    assert m1.actor.flat.tobytes() == m2.actor.flat.tobytes()


def test_pretrain_per_does_not_modify_init():
    init = toy_model("td3", hidden=256)
    snap = init.actor.flat.copy()
    env = NavEnv(builtin_map("corridor"))
    m, _ = online_train(env, init, ExpertBuffer(toy_dataset()), "pretrain_per", "td3", FAST, 10, 0)
    assert np.array_equal(init.actor.flat, snap) and m is not init


def test_episode_records_add_up():
    env = NavEnv(builtin_map("corridor"), )
    _, log = online_train(env, None, None, "scratch", "ddpg", HyperParams(batch_size=16, warmup_steps=400), 400, 2)
    assert log.episodes
    assert sum(e.env_steps for e in log.episodes) <= 400
    assert all(e.outcome in ("arrived", "collided", "timeout") for e in log.episodes)
    assert [e.episode for e in log.episodes] == list(range(len(log.episodes)))


def test_select_action_modes():
    m = toy_model("td3", hidden=256)
    obs = np.zeros(40, np.float32)
    a = select_action(m, obs)
    assert a.shape == (2,) and np.array_equal(a, select_action(m, obs))
    noisy = select_action(m, obs, np.random.default_rng(0), explore=True, noise=5.0)
    assert np.all(np.abs(noisy) <= 1.0)
    s = toy_model("sac", hidden=256)
    assert np.all(np.abs(select_action(s, obs, np.random.default_rng(0), explore=True)) < 1.0)


# logs


def test_trainlog_rows_and_monotonic_steps(tmp_path):
    log = TrainLog()
    log.record_update(1, 2.0, None)
    log.record_update(2, 1.5, -0.3)
    with pytest.raises(ValueError):
        log.record_update(2, 1.0, None)
    from navseed.drl.train import EpisodeRecord

    log.episodes.append(EpisodeRecord(0, 2, 10.0, 100.0, 3.0, "arrived", 2))
    rows = log.rows()
    assert [r[0] for r in rows] == [1, 2, 2]
    assert rows[-1][7] == "arrived"
    log.write_csv(tmp_path / "log.csv")
    header = (tmp_path / "log.csv").read_text().splitlines()[0]
    assert header == "step,episode,critic_loss,actor_loss,episode_reward,arrive_reward,distance_reward,outcome,env_steps"


def test_terminal_kind_bootstrap_in_dataset_buffer():
    ds = toy_dataset(4, kinds=[TerminalKind.NONE, TerminalKind.ARRIVED, TerminalKind.COLLIDED, TerminalKind.TIMEOUT])
    eb = ExpertBuffer(ds)
    assert eb.dones.tolist() == [0.0, 1.0, 1.0, 0.0]


def test_transition_record_done_flag():
    r = TransitionRecord(np.zeros(40), np.zeros(2), 0.0, np.zeros(40), TerminalKind.TIMEOUT)
    assert r.done
