"""Acceptance checks with independent oracles, shared by the test suite and
``navseed repro --scale desk``.

Each ``criterion_*`` function returns a :class:`CriterionResult`; the heavy
ones take precomputed comparison reports so runs can be shared.
"""

from __future__ import annotations

import filecmp
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .drl import ExpertBuffer, HyperParams, Minibatch, SumTree, critic_loss, deterministic_actor_loss, sac_actor_loss
from .drl.algorithms import ddpg_target, sac_target, td3_target
from .eval import ComparisonReport, EvalMetrics
from .expert import CollectConfig, ExpertDataset, NoPathError, grid_astar, run_expert_episode
from .nn import ModelParams
from .sim import BUILTIN_MAPS, Pose, TerminalKind, builtin_map, compute_reward, raycast, sample_free_point
from .sim.lidar import BEAM_OFFSETS, RANGE_MAX, RANGE_MIN
from .sim.reward import RewardParams


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    limit_seconds: float | None = None
    data: dict = field(default_factory=dict)

    @property
    def within_time(self) -> bool:
        return self.limit_seconds is None or self.seconds <= self.limit_seconds

    def line(self) -> str:
        verdict = "PASS" if self.passed and self.within_time else "FAIL"
        limit = f" (limit {self.limit_seconds:.0f}s)" if self.limit_seconds else ""
        return f"[{verdict}] criterion {self.number} {self.name}: {self.detail}; {self.seconds:.1f}s{limit}"


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


# 1. reward table: (d_prev, d_curr, nearest scan, v, omega, terminal, r_distance, r_collision, r_velocity, r_arrive, total)
REWARD_TABLE = [
    (2.0, 1.875, 1.0, 0.2, 0.3, TerminalKind.NONE, 0.625, 0.0, 0.0, 0.0, 0.625),
    (3.0, 3.0625, 2.5, 0.1, -0.5, TerminalKind.ARRIVED, -0.3125, 0.0, 0.0, 100.0, 99.6875),
    (1.5, 1.25, 1.0, 0.2, 0.3, TerminalKind.COLLIDED, 1.25, 0.0, 0.0, -100.0, -98.75),
    (2.0, 1.875, 2.5, 0.1, -1.0, TerminalKind.TIMEOUT, 0.625, 0.0, -1.0, 0.0, -0.375),
    (3.0, 3.0625, 1.0, 0.2, 0.8, TerminalKind.ARRIVED, -0.3125, 0.0, -1.0, 100.0, 98.6875),
    (1.5, 1.25, 2.5, 0.1, -1.0, TerminalKind.COLLIDED, 1.25, 0.0, -1.0, -100.0, -99.75),
    (2.0, 1.875, 1.0, 0.05, 0.3, TerminalKind.NONE, 0.625, 0.0, -4.0, 0.0, -3.375),
    (3.0, 3.0625, 2.5, 0.0, -0.5, TerminalKind.ARRIVED, -0.3125, 0.0, -4.0, 100.0, 95.6875),
    (1.5, 1.25, 1.0, 0.05, 0.3, TerminalKind.COLLIDED, 1.25, 0.0, -4.0, -100.0, -102.75),
    (2.0, 1.875, 2.5, 0.0, -1.0, TerminalKind.TIMEOUT, 0.625, 0.0, -5.0, 0.0, -4.375),
    (3.0, 3.0625, 1.0, 0.05, 0.8, TerminalKind.ARRIVED, -0.3125, 0.0, -5.0, 100.0, 94.6875),
    (1.5, 1.25, 2.5, 0.0, -1.0, TerminalKind.COLLIDED, 1.25, 0.0, -5.0, -100.0, -103.75),
    (2.0, 1.875, 0.7, 0.2, 0.3, TerminalKind.NONE, 0.625, -10.0, 0.0, 0.0, -9.375),
    (3.0, 3.0625, 0.5, 0.1, -0.5, TerminalKind.ARRIVED, -0.3125, -10.0, 0.0, 100.0, 89.6875),
    (1.5, 1.25, 0.7, 0.2, 0.3, TerminalKind.COLLIDED, 1.25, -10.0, 0.0, -100.0, -108.75),
    (2.0, 1.875, 0.5, 0.1, -1.0, TerminalKind.TIMEOUT, 0.625, -10.0, -1.0, 0.0, -10.375),
    (3.0, 3.0625, 0.7, 0.2, 0.8, TerminalKind.ARRIVED, -0.3125, -10.0, -1.0, 100.0, 88.6875),
    (1.5, 1.25, 0.5, 0.1, -1.0, TerminalKind.COLLIDED, 1.25, -10.0, -1.0, -100.0, -109.75),
    (2.0, 1.875, 0.7, 0.05, 0.3, TerminalKind.NONE, 0.625, -10.0, -4.0, 0.0, -13.375),
    (3.0, 3.0625, 0.5, 0.0, -0.5, TerminalKind.ARRIVED, -0.3125, -10.0, -4.0, 100.0, 85.6875),
    (1.5, 1.25, 0.7, 0.05, 0.3, TerminalKind.COLLIDED, 1.25, -10.0, -4.0, -100.0, -112.75),
    (2.0, 1.875, 0.5, 0.0, -1.0, TerminalKind.TIMEOUT, 0.625, -10.0, -5.0, 0.0, -14.375),
    (3.0, 3.0625, 0.7, 0.05, 0.8, TerminalKind.ARRIVED, -0.3125, -10.0, -5.0, 100.0, 84.6875),
    (1.5, 1.25, 0.5, 0.0, -1.0, TerminalKind.COLLIDED, 1.25, -10.0, -5.0, -100.0, -113.75),
    (2.0, 1.875, 0.35, 0.2, 0.3, TerminalKind.NONE, 0.625, -20.0, 0.0, 0.0, -19.375),
    (3.0, 3.0625, 0.3, 0.1, -0.5, TerminalKind.ARRIVED, -0.3125, -20.0, 0.0, 100.0, 79.6875),
    (1.5, 1.25, 0.35, 0.2, 0.3, TerminalKind.COLLIDED, 1.25, -20.0, 0.0, -100.0, -118.75),
    (2.0, 1.875, 0.3, 0.1, -1.0, TerminalKind.TIMEOUT, 0.625, -20.0, -1.0, 0.0, -20.375),
    (3.0, 3.0625, 0.35, 0.2, 0.8, TerminalKind.ARRIVED, -0.3125, -20.0, -1.0, 100.0, 78.6875),
    (1.5, 1.25, 0.3, 0.1, -1.0, TerminalKind.COLLIDED, 1.25, -20.0, -1.0, -100.0, -119.75),
    (2.0, 1.875, 0.35, 0.05, 0.3, TerminalKind.NONE, 0.625, -20.0, -4.0, 0.0, -23.375),
    (3.0, 3.0625, 0.3, 0.0, -0.5, TerminalKind.ARRIVED, -0.3125, -20.0, -4.0, 100.0, 75.6875),
    (1.5, 1.25, 0.35, 0.05, 0.3, TerminalKind.COLLIDED, 1.25, -20.0, -4.0, -100.0, -122.75),
    (2.0, 1.875, 0.3, 0.0, -1.0, TerminalKind.TIMEOUT, 0.625, -20.0, -5.0, 0.0, -24.375),
    (3.0, 3.0625, 0.35, 0.05, 0.8, TerminalKind.ARRIVED, -0.3125, -20.0, -5.0, 100.0, 74.6875),
    (1.5, 1.25, 0.3, 0.0, -1.0, TerminalKind.COLLIDED, 1.25, -20.0, -5.0, -100.0, -123.75),
]


def reward_table_mismatches() -> list[str]:
    bad = []
    for k, (dp, dc, near, v, w, term, rd, rc, rv, ra, tot) in enumerate(REWARD_TABLE):
        scan = np.full(36, RANGE_MAX)
        scan[k % 36] = near
        got = compute_reward(dp, dc, scan, v, w, term, RewardParams())
        want = (rd, rc, rv, ra, tot)
        have = (got.r_distance, got.r_collision, got.r_velocity, got.r_arrive, got.total)
        if have != want:
            bad.append(f"row {k}: {have} != {want}")
    return bad


def criterion_reward() -> CriterionResult:
    with _Timer() as t:
        bad = reward_table_mismatches()
    return CriterionResult(1, "reward exactness", not bad and len(REWARD_TABLE) == 36,
                           f"{len(REWARD_TABLE) - len(bad)}/{len(REWARD_TABLE)} rows bit-exact", t.seconds, 1.0)


# 2. gradients


def toy_batch(rng: np.random.Generator, n: int, obs_dim: int) -> Minibatch:
    return Minibatch(
        rng.normal(size=(n, obs_dim)), rng.uniform(-0.9, 0.9, size=(n, 2)), rng.normal(size=n),
        rng.normal(size=(n, obs_dim)), (rng.random(n) < 0.3).astype(np.float64), rng.uniform(0.2, 1.0, size=n),
        np.arange(n), np.zeros(n, bool),
    )


def _fd_grad(loss_fn, arrays: list[np.ndarray], eps: float) -> list[np.ndarray]:
    out = []
    for a in arrays:
        g = np.zeros_like(a)
        flat, gflat = a.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + eps
            up = loss_fn()
            flat[i] = old - eps
            down = loss_fn()
            flat[i] = old
            gflat[i] = (up - down) / (2 * eps)
        out.append(g)
    return out


def _rel_err(analytic: list[np.ndarray], numeric: list[np.ndarray]) -> float:
    a = np.concatenate([g.ravel() for g in analytic])
    n = np.concatenate([g.ravel() for g in numeric])
    scale = max(np.linalg.norm(a), np.linalg.norm(n), 1e-12)
    return float(np.linalg.norm(a - n) / scale)


def loss_gradient_errors(seed: int, obs_dim: int = 6, hidden: int = 8, n: int = 5, eps: float = 1e-5) -> dict[str, float]:
    """Relative error between analytic and central-difference gradients for
    the six losses (critic and actor losses of DDPG, SAC and TD3)."""
    rng = np.random.default_rng(seed)
    hp = HyperParams(gamma=0.9)
    errs = {}
    for algo in ("ddpg", "sac", "td3"):
        m = ModelParams.create(algo, rng, obs_dim, 2, hidden, dtype=np.float64)
        # move targets away from the online nets
        for net in m.networks():
            net.flat += rng.normal(scale=0.05, size=net.flat.shape)
        batch = toy_batch(rng, n, obs_dim)
        if algo == "ddpg":
            y = ddpg_target(m, batch, hp)
            qnets = [m.critic.q1]
        elif algo == "td3":
            y = td3_target(m, batch, hp, noise=rng.normal(size=(n, 2)))
            qnets = [m.critic.q1, m.critic.q2]
        else:
            y = sac_target(m, batch, hp, eps=rng.normal(size=(n, 2)))
            qnets = [m.critic.q1, m.critic.q2]
        _, grads, _ = critic_loss(qnets, batch, y)
        arrays = [p for q in qnets for p in q.params]
        numeric = _fd_grad(lambda: critic_loss(qnets, batch, y)[0], arrays, eps)
        errs[f"{algo}_critic"] = _rel_err(grads, numeric)

        if algo == "sac":
            e = rng.normal(size=(n, 2))
            fn = lambda: sac_actor_loss(m, batch.states, hp.sac_alpha, eps=e)
        else:
            fn = lambda: deterministic_actor_loss(m, batch.states)
        _, agrads = fn()
        numeric = _fd_grad(lambda: fn()[0], m.actor.params, eps)
        errs[f"{algo}_actor"] = _rel_err(agrads, numeric)
    return errs


def criterion_gradients(seeds=range(20), tol: float = 1e-4) -> CriterionResult:
    with _Timer() as t:
        worst: dict[str, float] = {}
        for s in seeds:
            for k, v in loss_gradient_errors(s).items():
                worst[k] = max(worst.get(k, 0.0), v)
    ok = len(worst) == 6 and all(v <= tol for v in worst.values())
    top = max(worst, key=worst.get)
    return CriterionResult(2, "gradient correctness", ok,
                           f"6 losses x {len(list(seeds))} seeds, worst relative error {worst[top]:.2e} ({top})",
                           t.seconds, 30.0, {"worst": worst})


# 3. oracle equivalences


def march_ranges(world, pose: Pose, step: float = 1e-3) -> np.ndarray:
    """Reference ranges from marching each beam in ``step`` increments."""
    s = np.arange(1, int(round(RANGE_MAX / step)) + 1) * step
    ang = pose.theta + BEAM_OFFSETS
    xs = pose.x + np.cos(ang)[:, None] * s
    ys = pose.y + np.sin(ang)[:, None] * s
    ox, oy = world.origin
    i = np.floor((xs - ox) / world.resolution).astype(np.int64)
    j = np.floor((ys - oy) / world.resolution).astype(np.int64)
    inside = (i >= 0) & (i < world.width_cells) & (j >= 0) & (j < world.height_cells)
    hit = ~inside
    hit[inside] = world.cells[j[inside], i[inside]]
    first = np.where(hit.any(axis=1), hit.argmax(axis=1), len(s) - 1)
    r = np.where(hit.any(axis=1), s[first], RANGE_MAX)
    return np.clip(r, RANGE_MIN, RANGE_MAX)


def _chord_through_cell(world, pose: Pose, angle: float, r: float) -> float:
    """Length of the beam inside the occupied cell it reaches at range ``r``."""
    dx, dy = math.cos(angle), math.sin(angle)
    px, py = pose.x + dx * (r + 1e-9), pose.y + dy * (r + 1e-9)
    res = world.resolution
    ox, oy = world.origin
    ci, cj = math.floor((px - ox) / res), math.floor((py - oy) / res)
    lo_x, lo_y = ox + ci * res, oy + cj * res
    t0, t1 = -math.inf, math.inf
    for o, d, lo in ((pose.x, dx, lo_x), (pose.y, dy, lo_y)):
        if abs(d) < 1e-15:
            if not lo <= o <= lo + res:
                return 0.0
            continue
        a, b = (lo - o) / d, (lo + res - o) / d
        t0, t1 = max(t0, min(a, b)), min(t1, max(a, b))
    return max(0.0, t1 - t0)


def raycast_march_check(n_poses: int = 1000, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    worlds = [builtin_map(m) for m in BUILTIN_MAPS]
    beams = agree = grazes = 0
    worst_unexplained = 0.0
    for k in range(n_poses):
        w = worlds[k % len(worlds)]
        x, y = sample_free_point(w, rng, 0.18)
        pose = Pose(x, y, float(rng.uniform(-math.pi, math.pi)))
        fast = raycast(w, pose)
        ref = march_ranges(w, pose)
        diff = np.abs(fast - ref)
        beams += len(diff)
        ok = diff <= w.resolution
        agree += int(ok.sum())
        for b in np.flatnonzero(~ok):
            # a 1 mm march can step over a corner graze shorter than its step
            chord = _chord_through_cell(w, pose, pose.theta + BEAM_OFFSETS[b], fast[b])
            if fast[b] < ref[b] and chord < 1e-3:
                grazes += 1
            else:
                worst_unexplained = max(worst_unexplained, float(diff[b]))
    return {"beams": beams, "agree": agree, "grazes": grazes, "worst_unexplained": worst_unexplained}


def dijkstra_cost(free: np.ndarray, start, goal) -> float:
    """Shortest 8-connected path cost via scipy's graph Dijkstra, with the
    same no-corner-cutting rule as the planner."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import dijkstra

    h, w = free.shape
    idx = np.arange(h * w).reshape(h, w)
    rows, cols, vals = [], [], []
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            js, is_ = np.mgrid[0:h, 0:w]
            nj, ni = js + dj, is_ + di
            ok = (nj >= 0) & (nj < h) & (ni >= 0) & (ni < w)
            ok &= free
            ok[ok] &= free[nj[ok], ni[ok]]
            if di and dj:
                side_a = np.zeros_like(ok)
                side_b = np.zeros_like(ok)
                side_a[ok] = free[js[ok], ni[ok]]
                side_b[ok] = free[nj[ok], is_[ok]]
                ok &= side_a & side_b
            rows.append(idx[ok])
            cols.append(idx[nj[ok], ni[ok]])
            vals.append(np.full(int(ok.sum()), math.sqrt(2.0) if (di and dj) else 1.0))
    g = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(h * w, h * w)).tocsr()
    d = dijkstra(g, indices=idx[start[1], start[0]])
    return float(d[idx[goal[1], goal[0]]])


def astar_dijkstra_check(n_grids: int = 200, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    agree = unreachable = 0
    worst = 0.0
    for _ in range(n_grids):
        h, w = int(rng.integers(8, 40)), int(rng.integers(8, 40))
        free = rng.random((h, w)) > rng.uniform(0.1, 0.4)
        cells = np.argwhere(free)
        if len(cells) < 2:
            free[0, 0] = free[h - 1, w - 1] = True
            cells = np.argwhere(free)
        a, b = cells[rng.choice(len(cells), 2, replace=False)]
        start, goal = (int(a[1]), int(a[0])), (int(b[1]), int(b[0]))
        ref = dijkstra_cost(free, start, goal)
        try:
            _, cost = grid_astar(free, start, goal)
        except NoPathError:
            cost = math.inf
        if math.isinf(ref) and math.isinf(cost):
            agree += 1
            unreachable += 1
            continue
        err = abs(cost - ref)
        worst = max(worst, err)
        agree += err <= 1e-9
    return {"grids": n_grids, "agree": agree, "unreachable": unreachable, "worst": worst}


def _dummy_dataset(n: int) -> ExpertDataset:
    z = np.zeros((n, 40), np.float32)
    return ExpertDataset(z, np.zeros((n, 2), np.float32), np.zeros(n, np.float32), z, np.zeros(n, np.int64))


def per_distribution_check(draws: int = 1_000_000, n: int = 100, alpha: float = 0.6, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    buf = ExpertBuffer(_dummy_dataset(n), alpha=alpha)
    buf.update_priorities(np.arange(n), rng.uniform(0.0, 5.0, n))
    want = buf.priorities**alpha
    want /= want.sum()
    counts = np.bincount(buf.sample_indices(rng, draws), minlength=n)
    return float(0.5 * np.abs(counts / draws - want).sum())


def sumtree_check(updates: int = 10_000, n: int = 1000, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    tree = SumTree(n)
    for _ in range(updates):
        k = int(rng.integers(1, 8))
        tree.update(rng.integers(0, n, k), rng.exponential(1.0, k) * 10.0 ** rng.uniform(-3, 3))
    ref = math.fsum(tree.leaves())
    return abs(tree.total - ref) / ref


def criterion_oracles() -> CriterionResult:
    with _Timer() as t:
        rc = raycast_march_check()
        ad = astar_dijkstra_check()
        tv = per_distribution_check()
        st = sumtree_check()
    ok_rc = rc["agree"] + rc["grazes"] == rc["beams"]
    ok = ok_rc and ad["agree"] == ad["grids"] and tv <= 0.02 and st <= 1e-6
    detail = (f"raycast {rc['agree']}/{rc['beams']} beams within a cell (+{rc['grazes']} sub-mm grazes); "
              f"A* {ad['agree']}/{ad['grids']} grids match Dijkstra; PER TV {tv:.4f}; sum-tree rel err {st:.1e}")
    return CriterionResult(3, "oracle equivalences", ok, detail, t.seconds, 120.0,
                           {"raycast": rc, "astar": ad, "per_tv": tv, "sumtree": st})


# 4. expert


def criterion_expert(episodes: int = 100, seed: int = 0) -> CriterionResult:
    with _Timer() as t:
        world = builtin_map("corridor")
        cfg = CollectConfig()
        outcomes = []
        bad_successes = 0
        for k in range(episodes):
            records, kind = run_expert_episode(world, cfg, seed + k)
            outcomes.append(kind)
            if kind is TerminalKind.ARRIVED and any(r.done_kind is TerminalKind.COLLIDED for r in records):
                bad_successes += 1
        rate = sum(k is TerminalKind.ARRIVED for k in outcomes) / episodes
        collisions = sum(k is TerminalKind.COLLIDED for k in outcomes)
    return CriterionResult(4, "expert quality", rate >= 0.9 and bad_successes == 0,
                           f"success {rate:.2f} over {episodes} episodes, {collisions} collision episodes, "
                           f"{bad_successes} successes with a collision", t.seconds, 120.0,
                           {"success_rate": rate, "collisions": collisions})


# 5-8. measured comparisons


def criterion_offline(report: ComparisonReport, seconds: float) -> CriterionResult:
    seeds = sorted({r.seed for r in report.runs})
    conv = {a: report.by_seed(a) for a in ("ddpg", "sac", "td3")}
    wins = [s for s in seeds if conv["td3"][s].steps_to_threshold < conv["ddpg"][s].steps_to_threshold
            and conv["td3"][s].steps_to_threshold < conv["sac"][s].steps_to_threshold]
    decreasing = [r for r in report.runs if r.extra["final_window_loss"] < r.extra["first_window_loss"]]
    ok = len(wins) >= 2 and len(decreasing) == len(report.runs)
    steps = ", ".join(f"s{s}: td3 {conv['td3'][s].steps_to_threshold} ddpg {conv['ddpg'][s].steps_to_threshold} "
                      f"sac {conv['sac'][s].steps_to_threshold}" for s in seeds)
    return CriterionResult(5, "offline convergence ordering", ok,
                           f"td3 fastest in {len(wins)}/{len(seeds)} seeds ({steps}); "
                           f"{len(decreasing)}/{len(report.runs)} runs end below their first-1k loss",
                           seconds, 1800.0)


def criterion_online(report: ComparisonReport, seconds: float) -> CriterionResult:
    pp, sc = report.by_seed("pretrain_per"), report.by_seed("scratch")
    seeds = sorted(pp)
    pp_reward = float(np.mean([pp[s].extra["final_reward"] for s in seeds]))
    sc_reward = float(np.mean([sc[s].extra["final_reward"] for s in seeds]))
    better = [s for s in seeds if pp[s].extra["final_success"] > sc[s].extra["final_success"]]
    ok = pp_reward >= 1.5 * sc_reward and len(better) >= 2
    succ = ", ".join(f"s{s}: {pp[s].extra['final_success']:.2f} vs {sc[s].extra['final_success']:.2f}" for s in seeds)
    return CriterionResult(6, "online regime comparison", ok,
                           f"final-5 reward pretrain+PER {pp_reward:.1f} vs scratch {sc_reward:.1f} "
                           f"(need >= {1.5 * sc_reward:.1f}); last-20 success {succ}", seconds, 7200.0)


def criterion_steps(report: ComparisonReport) -> CriterionResult:
    pp, per = report.by_seed("pretrain_per"), report.by_seed("per")
    seeds = sorted(pp)
    good = []
    for s in seeds:
        a, b = pp[s].steps_to_threshold, per[s].steps_to_threshold
        if a is not None and (b is None or a <= 0.5 * b):
            good.append(s)
    detail = ", ".join(f"s{s}: {pp[s].steps_to_threshold} vs {per[s].steps_to_threshold}" for s in seeds)
    return CriterionResult(7, "training-step reduction", len(good) >= 2,
                           f"steps to 0.6 success (pretrain+PER vs PER-only) {detail}; {len(good)}/{len(seeds)} seeds ok")


def criterion_generalization(metrics: dict[str, list[EvalMetrics]], seconds: float, limit: float = 0.3) -> CriterionResult:
    """``metrics`` maps each map to the evaluations of the per-seed policies."""
    pooled = {}
    for name, ms in metrics.items():
        n = sum(m.episodes for m in ms)
        pooled[name] = sum(m.collision_rate * m.episodes for m in ms) / n
    ok = all(v <= limit for v in pooled.values()) and set(pooled) == {"house", "office", "maze"}
    detail = ", ".join(f"{k} {v:.3f}" for k, v in pooled.items())
    return CriterionResult(8, "generalization", ok, f"collision rate {detail} (limit {limit})", seconds, 600.0,
                           {"pooled": pooled})


def csv_files(root: str) -> list[str]:
    out = []
    for d, _, files in os.walk(root):
        out += [os.path.relpath(os.path.join(d, f), root) for f in files if f.endswith(".csv") and f != "timings.csv"]
    return sorted(out)


def criterion_determinism(dir_a: str, dir_b: str, seconds: float) -> CriterionResult:
    a, b = csv_files(dir_a), csv_files(dir_b)
    same = a == b and bool(a) and all(filecmp.cmp(os.path.join(dir_a, f), os.path.join(dir_b, f), shallow=False) for f in a)
    return CriterionResult(9, "determinism", same, f"{len(a)} CSV files, byte-identical: {same}", seconds, 600.0)
