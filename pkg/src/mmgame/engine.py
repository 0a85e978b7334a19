"""Repeated-game simulator for independent Q-learning market makers.

The batch runner advances all training instances in lock step through a
numba-compiled kernel. Randomness is pre-drawn outside the kernel from
counter-based Philox streams, one per instance, substreamed per agent and per
market side, so every instance's trajectory depends only on its own seed and
is identical whether it runs alone or inside a batch.

``step`` is the scalar one-period reference used by tests and small scripts;
the kernel is its vectorized twin.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from . import learning
from .learning import AgentState, LearningRateSchedule
from .market import ArrivalModel, InventoryPenalty, JointAction, SpreadGrid

__all__ = [
    "SkewRule",
    "TrainSettings",
    "MarketStep",
    "RunRecord",
    "BatchResult",
    "RngBundle",
    "step",
    "run_instance",
    "run_batch",
    "simulate_frozen",
]

RNG_CHUNK = 1 << 16


@dataclass(frozen=True)
class SkewRule:
    """Hard inventory override: quote to unwind once a threshold is breached.

    ``long_action``/``short_action`` are 0-based combined actions; the long
    rule (inventory above ``upper``) quotes the lowest ask and highest bid,
    the short rule the opposite.
    """

    enabled: bool = False
    upper: float = 100.0
    lower: float = -100.0
    long_action: int = 0
    short_action: int = 0

    def __post_init__(self):
        if self.enabled and not self.lower < 0 < self.upper:
            raise ValueError("skew thresholds must straddle zero")

    @classmethod
    def for_grid(cls, m: int, upper: float = 100.0, lower: float = -100.0) -> "SkewRule":
        """Standard rule: ask low / bid high when long, the mirror when short."""
        return cls(
            enabled=True,
            upper=upper,
            lower=lower,
            long_action=0 * m + (m - 1),
            short_action=(m - 1) * m + 0,
        )


@dataclass(frozen=True)
class TrainSettings:
    """Learning and protocol parameters for a training run."""

    temperature: float
    gamma: float = 0.0
    schedule: LearningRateSchedule = field(default_factory=LearningRateSchedule)
    q0: float | tuple[float, ...] = 0.0
    memory: bool = False
    budget: int = 2_000_000
    stability_window: int | None = 1_000_000
    snapshot_every: int = 10_000
    last_window: int = 1_000
    skew: SkewRule = field(default_factory=SkewRule)
    update_on_override: bool = True

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.budget < 1:
            raise ValueError("budget must be positive")
        if self.stability_window is not None and self.stability_window < 1:
            raise ValueError("stability window must be positive")
        if self.snapshot_every < 1:
            raise ValueError("snapshot interval must be positive")
        if self.last_window < 1:
            raise ValueError("last window must be positive")


@dataclass(frozen=True)
class MarketStep:
    """Outcome of one period: actions, arrivals, fills, rewards, inventories."""

    period: int
    actions: tuple[int, ...]  # 1-based combined (or side) action per agent
    ask_arrived: bool
    bid_arrived: bool
    ask_fills: np.ndarray
    bid_fills: np.ndarray
    rewards: np.ndarray
    inventories: np.ndarray
    overridden: tuple[bool, ...]
    next_state: int


@dataclass(frozen=True)
class LastWindowStats:
    n_periods: int
    orders_mean: float
    reward_means: np.ndarray  # (n_agents,)
    action_counts: np.ndarray  # (n_actions,) pooled over agents


@dataclass(frozen=True)
class RunRecord:
    """Everything recorded for one training instance."""

    instance: int
    seed_key: tuple
    config_digest: str
    periods: np.ndarray
    q_snapshots: np.ndarray  # (n_snaps, n_agents, n_actions), mean over states
    inventory_snapshots: np.ndarray  # (n_snaps, n_agents)
    reward_window_means: np.ndarray  # (n_snaps, n_agents)
    orders_window_means: np.ndarray  # (n_snaps,)
    final_q: np.ndarray  # (n_agents, n_states, n_actions)
    greedy: np.ndarray  # (n_agents, n_states)
    final_inventory: np.ndarray
    max_abs_inventory: np.ndarray
    stop_period: int
    termination: str
    last_window: LastWindowStats
    wall_clock: float


@dataclass(frozen=True)
class BatchResult:
    records: tuple[RunRecord, ...]
    temperature: float

    def mean_final_q(self) -> np.ndarray:
        """Terminal Q averaged over instances, agents, and memory states."""
        return np.mean([r.final_q.mean(axis=(0, 1)) for r in self.records], axis=0)

    def implied_probabilities(self) -> np.ndarray:
        """Long-run action distribution implied by the mean terminal Q."""
        q = self.mean_final_q()
        e = np.exp((q - q.max()) / self.temperature)
        return e / e.sum()

    def last_window_orders(self) -> float:
        return float(np.mean([r.last_window.orders_mean for r in self.records]))

    def last_window_rewards(self) -> float:
        return float(np.mean([r.last_window.reward_means.mean() for r in self.records]))

    def action_frequencies(self) -> np.ndarray:
        counts = np.sum([r.last_window.action_counts for r in self.records], axis=0)
        return counts / counts.sum()


@dataclass
class RngBundle:
    """Per-instance random streams: one per agent plus one per market side."""

    agents: list[np.random.Generator]
    ask: np.random.Generator
    bid: np.random.Generator

    @classmethod
    def from_seed(cls, seed, n_agents: int) -> "RngBundle":
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        children = ss.spawn(n_agents + 2)
        gens = [np.random.Generator(np.random.Philox(c)) for c in children]
        return cls(agents=gens[:n_agents], ask=gens[n_agents], bid=gens[n_agents + 1])


# ---------------------------------------------------------------------------
# scalar reference step
# ---------------------------------------------------------------------------


def _side_outcome(side_acts: np.ndarray, k: np.ndarray, w: np.ndarray, sigma_n: float):
    """Winner shares and arrival probability for one side (sequential sums)."""
    best = side_acts.min()
    winners = int((side_acts == best).sum())
    f = 0.0
    for a in side_acts:
        f += w[a]
    prob = float(np.exp(-f / sigma_n))
    shares = np.where(side_acts == best, 1.0 / winners, 0.0)
    return shares, prob


def step(
    grid: SpreadGrid,
    model: ArrivalModel,
    penalty: InventoryPenalty,
    skew: SkewRule,
    agents: Sequence[AgentState],
    inventories: np.ndarray,
    rng: RngBundle,
    state: int = 0,
    period: int = 0,
    two_sided: bool = True,
) -> MarketStep:
    """Play one period: select actions, sample arrivals, route fills, reward.

    Does not update the agents' Q-tables; callers pair it with the learning
    updates. Consumes one uniform per agent stream and one per active side.
    """
    n = len(agents)
    m = grid.m
    k = grid.as_array()
    w = model.weights_array()
    sigma_n = model.sigma * n

    acts = np.empty(n, dtype=int)
    overridden = []
    for j, agent in enumerate(agents):
        a = learning.select_action(agent, state, rng.agents[j])
        over = False
        if skew.enabled:
            if inventories[j] > skew.upper:
                a, over = skew.long_action, True
            elif inventories[j] < skew.lower:
                a, over = skew.short_action, True
        acts[j] = a
        overridden.append(over)

    if two_sided:
        ask_idx, bid_idx = np.divmod(acts, m)
    else:
        ask_idx, bid_idx = acts, None

    ask_shares, pa = _side_outcome(ask_idx, k, w, sigma_n)
    ask_arrived = bool(rng.ask.random() < pa)
    ask_fills = ask_shares * ask_arrived
    if two_sided:
        bid_shares, pb = _side_outcome(bid_idx, k, w, sigma_n)
        bid_arrived = bool(rng.bid.random() < pb)
        bid_fills = bid_shares * bid_arrived
    else:
        bid_arrived = False
        bid_fills = np.zeros(n)

    dy = bid_fills - ask_fills
    rewards = k[ask_idx] * ask_fills - penalty.xi * dy * dy
    if two_sided:
        rewards = rewards + k[bid_idx] * bid_fills
    new_inv = np.asarray(inventories, dtype=float) + dy

    next_state = learning.encode_joint_state(acts, agents[0].n_actions) if agents[0].n_states > 1 else 0
    return MarketStep(
        period=period,
        actions=tuple(int(a) + 1 for a in acts),
        ask_arrived=ask_arrived,
        bid_arrived=bid_arrived,
        ask_fills=ask_fills,
        bid_fills=bid_fills,
        rewards=rewards,
        inventories=new_inv,
        overridden=tuple(overridden),
        next_state=next_state,
    )


# ---------------------------------------------------------------------------
# vectorized kernel
# ---------------------------------------------------------------------------


@njit(cache=True)
def _run_chunk(
    q,
    state,
    inv,
    inv_maxabs,
    alive,
    last_change,
    stop_t,
    ring_act,
    ring_orders,
    ring_rew,
    acc_rew,
    acc_orders,
    acc_steps,
    u_act,
    u_ask,
    u_bid,
    t0,
    k_levels,
    weights,
    sigma_n,
    xi,
    lam,
    gamma,
    sched_kind,
    sched_value,
    two_sided,
    memory,
    m_levels,
    skew_on,
    skew_upper,
    skew_lower,
    skew_long,
    skew_short,
    update_on_override,
    window,
):
    n_inst, n_agents, n_states, n_actions = q.shape
    n_steps = u_ask.shape[1]
    ring = ring_orders.shape[1]
    ps = np.empty(n_actions)
    acts = np.empty(n_agents, np.int64)
    over = np.empty(n_agents, np.bool_)

    for k in range(n_steps):
        t = t0 + k
        if sched_kind == 0:
            alpha = sched_value / (sched_value + t)
        else:
            alpha = sched_value
        for i in range(n_inst):
            if not alive[i]:
                continue
            st = state[i]

            for j in range(n_agents):
                row = q[i, j, st]
                mx = row[0]
                for v in range(1, n_actions):
                    if row[v] > mx:
                        mx = row[v]
                total = 0.0
                for v in range(n_actions):
                    ps[v] = np.exp((row[v] - mx) / lam)
                    total += ps[v]
                u = u_act[i, j, k] * total
                a = n_actions - 1
                acc = 0.0
                for v in range(n_actions):
                    acc += ps[v]
                    if u < acc:
                        a = v
                        break
                o = False
                if skew_on:
                    if inv[i, j] > skew_upper:
                        a = skew_long
                        o = True
                    elif inv[i, j] < skew_lower:
                        a = skew_short
                        o = True
                acts[j] = a
                over[j] = o

            # market mechanics
            amin = m_levels
            bmin = m_levels
            fa = 0.0
            fb = 0.0
            for j in range(n_agents):
                if two_sided:
                    aj = acts[j] // m_levels
                    bj = acts[j] % m_levels
                else:
                    aj = acts[j]
                    bj = 0
                if aj < amin:
                    amin = aj
                fa += weights[aj]
                if two_sided:
                    if bj < bmin:
                        bmin = bj
                    fb += weights[bj]
            na = 0
            nb = 0
            for j in range(n_agents):
                if two_sided:
                    aj = acts[j] // m_levels
                    bj = acts[j] % m_levels
                else:
                    aj = acts[j]
                    bj = -1
                if aj == amin:
                    na += 1
                if two_sided and bj == bmin:
                    nb += 1
            pa = np.exp(-fa / sigma_n)
            xa = 1.0 if u_ask[i, k] < pa else 0.0
            if two_sided:
                pb = np.exp(-fb / sigma_n)
                xb = 1.0 if u_bid[i, k] < pb else 0.0
            else:
                xb = 0.0

            if memory:
                ns = 0
                for j in range(n_agents):
                    ns = ns * n_actions + acts[j]
            else:
                ns = 0

            changed = False
            for j in range(n_agents):
                if two_sided:
                    aj = acts[j] // m_levels
                    bj = acts[j] % m_levels
                else:
                    aj = acts[j]
                    bj = 0
                ga = (xa / na) if aj == amin else 0.0
                if two_sided:
                    gb = (xb / nb) if bj == bmin else 0.0
                else:
                    gb = 0.0
                dy = gb - ga
                r = k_levels[aj] * ga - xi * dy * dy
                if two_sided:
                    r += k_levels[bj] * gb
                inv[i, j] += dy
                mag = abs(inv[i, j])
                if mag > inv_maxabs[i, j]:
                    inv_maxabs[i, j] = mag
                ring_act[i, j, t % ring] = acts[j]
                ring_rew[i, j, t % ring] = r
                acc_rew[i, j] += r

                if update_on_override or not over[j]:
                    row = q[i, j, st]
                    oldmax = 0
                    for v in range(1, n_actions):
                        if row[v] > row[oldmax]:
                            oldmax = v
                    if gamma > 0.0:
                        nrow = q[i, j, ns]
                        vmax = nrow[0]
                        for v in range(1, n_actions):
                            if nrow[v] > vmax:
                                vmax = nrow[v]
                        target = r + gamma * vmax
                    else:
                        target = r
                    row[acts[j]] = (1.0 - alpha) * row[acts[j]] + alpha * target
                    newmax = 0
                    for v in range(1, n_actions):
                        if row[v] > row[newmax]:
                            newmax = v
                    if newmax != oldmax:
                        changed = True

            orders = xa + xb
            ring_orders[i, t % ring] = int(orders)
            acc_orders[i] += orders
            acc_steps[i] += 1
            if memory:
                state[i] = ns
            if changed:
                last_change[i] = t
            if window > 0 and t - last_change[i] >= window:
                alive[i] = False
                stop_t[i] = t


# ---------------------------------------------------------------------------
# batch driver
# ---------------------------------------------------------------------------


def _initial_q(settings: TrainSettings, n_states: int, n_actions: int) -> np.ndarray:
    row = np.broadcast_to(np.asarray(settings.q0, dtype=float), (n_actions,))
    return np.tile(row, (n_states, 1)).astype(float)


def run_batch(
    grid: SpreadGrid,
    model: ArrivalModel,
    penalty: InventoryPenalty,
    settings: TrainSettings,
    n_instances: int,
    base_seed: int,
    two_sided: bool = True,
    config_digest: str = "",
    jobs: int = 1,
) -> BatchResult:
    """Run independently seeded training instances and collect their records.

    Instance ``i`` always receives the ``i``-th spawn of the base seed, so
    results do not depend on the batch size or on ``jobs``.
    """
    if n_instances < 1:
        raise ValueError("need at least one instance")
    seeds = np.random.SeedSequence(base_seed).spawn(n_instances)
    ids = list(range(n_instances))
    if jobs > 1 and n_instances > 1:
        from concurrent.futures import ProcessPoolExecutor

        groups = [(ids[g::jobs], [seeds[i] for i in ids[g::jobs]]) for g in range(jobs)]
        groups = [g for g in groups if g[0]]
        with ProcessPoolExecutor(max_workers=len(groups)) as pool:
            futures = [
                pool.submit(
                    _run_group, grid, model, penalty, settings, gi, gs, two_sided, config_digest
                )
                for gi, gs in groups
            ]
            records = [rec for fut in futures for rec in fut.result()]
        records.sort(key=lambda r: r.instance)
    else:
        records = _run_group(grid, model, penalty, settings, ids, seeds, two_sided, config_digest)
    return BatchResult(records=tuple(records), temperature=settings.temperature)


def run_instance(
    grid: SpreadGrid,
    model: ArrivalModel,
    penalty: InventoryPenalty,
    settings: TrainSettings,
    seed,
    two_sided: bool = True,
    config_digest: str = "",
    instance: int = 0,
) -> RunRecord:
    """Run a single instance; ``seed`` is an int or a SeedSequence."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return _run_group(grid, model, penalty, settings, [instance], [ss], two_sided, config_digest)[0]


def _run_group(
    grid: SpreadGrid,
    model: ArrivalModel,
    penalty: InventoryPenalty,
    settings: TrainSettings,
    instance_ids: list[int],
    seeds: list[np.random.SeedSequence],
    two_sided: bool,
    config_digest: str,
) -> list["RunRecord"]:
    started = time.perf_counter()
    n_inst = len(instance_ids)
    n_agents = model.n_agents
    m = grid.m
    n_actions = m * m if two_sided else m
    if not two_sided and penalty.xi != 0.0:
        raise ValueError("inventory penalty requires two-sided quoting")
    if not two_sided and settings.skew.enabled:
        raise ValueError("skew rule requires two-sided quoting")
    n_states = n_actions**n_agents if settings.memory else 1
    if n_inst * n_agents * n_states * n_actions > 200_000_000:
        raise ValueError("Q-table storage for this configuration is unreasonably large")

    bundles = [RngBundle.from_seed(s, n_agents) for s in seeds]

    q = np.empty((n_inst, n_agents, n_states, n_actions))
    q[:] = _initial_q(settings, n_states, n_actions)
    state = np.zeros(n_inst, dtype=np.int64)
    inv = np.zeros((n_inst, n_agents))
    inv_maxabs = np.zeros((n_inst, n_agents))
    alive = np.ones(n_inst, dtype=np.bool_)
    last_change = np.zeros(n_inst, dtype=np.int64)
    stop_t = np.full(n_inst, -1, dtype=np.int64)
    ring = settings.last_window
    ring_act = np.full((n_inst, n_agents, ring), -1, dtype=np.int64)
    ring_orders = np.full((n_inst, ring), -1, dtype=np.int64)
    ring_rew = np.zeros((n_inst, n_agents, ring))
    acc_rew = np.zeros((n_inst, n_agents))
    acc_orders = np.zeros(n_inst)
    acc_steps = np.zeros(n_inst, dtype=np.int64)

    sched_kind = 0 if settings.schedule.kind == "harmonic" else 1
    window = settings.stability_window or 0
    skew = settings.skew

    snaps_periods: list[int] = []
    snaps_q: list[np.ndarray] = []
    snaps_inv: list[np.ndarray] = []
    snaps_rew: list[np.ndarray] = []
    snaps_orders: list[np.ndarray] = []
    snaps_steps: list[np.ndarray] = []

    u_act = np.empty((n_inst, n_agents, RNG_CHUNK))
    u_ask = np.empty((n_inst, RNG_CHUNK))
    u_bid = np.empty((n_inst, RNG_CHUNK))

    t = 0
    while t < settings.budget and alive.any():
        next_snap = (t // settings.snapshot_every + 1) * settings.snapshot_every
        n = min(next_snap, settings.budget) - t
        n = min(n, RNG_CHUNK)
        for b, bundle in enumerate(bundles):
            for j in range(n_agents):
                u_act[b, j, :n] = bundle.agents[j].random(n)
            u_ask[b, :n] = bundle.ask.random(n)
            if two_sided:
                u_bid[b, :n] = bundle.bid.random(n)
        _run_chunk(
            q,
            state,
            inv,
            inv_maxabs,
            alive,
            last_change,
            stop_t,
            ring_act,
            ring_orders,
            ring_rew,
            acc_rew,
            acc_orders,
            acc_steps,
            u_act[:, :, :n],
            u_ask[:, :n],
            u_bid[:, :n],
            t,
            grid.as_array(),
            model.weights_array(),
            model.sigma * n_agents,
            penalty.xi,
            settings.temperature,
            settings.gamma,
            sched_kind,
            settings.schedule.value,
            two_sided,
            settings.memory,
            m,
            skew.enabled,
            skew.upper,
            skew.lower,
            skew.long_action,
            skew.short_action,
            settings.update_on_override,
            window,
        )
        t += n
        if t % settings.snapshot_every == 0 or t == settings.budget or not alive.any():
            snaps_periods.append(t)
            snaps_q.append(q.mean(axis=2).copy())
            snaps_inv.append(inv.copy())
            with np.errstate(invalid="ignore", divide="ignore"):
                snaps_rew.append(acc_rew / acc_steps[:, None])
                snaps_orders.append(acc_orders / acc_steps)
            snaps_steps.append(acc_steps.copy())
            acc_rew[:] = 0.0
            acc_orders[:] = 0.0
            acc_steps[:] = 0

    stopped_early = stop_t >= 0
    stop_t = np.where(stop_t < 0, settings.budget - 1, stop_t)
    wall = time.perf_counter() - started

    periods = np.asarray(snaps_periods, dtype=np.int64)
    all_q = np.asarray(snaps_q)  # (n_snaps, I, N, W)
    all_inv = np.asarray(snaps_inv)
    all_rew = np.asarray(snaps_rew)
    all_orders = np.asarray(snaps_orders)
    all_steps = np.asarray(snaps_steps)

    records = []
    for b, inst_id in enumerate(instance_ids):
        live = all_steps[:, b] > 0
        n_last = int(min(stop_t[b] + 1, ring))
        valid = ring_orders[b] >= 0
        counts = np.zeros(n_actions)
        for j in range(n_agents):
            sel = ring_act[b, j][ring_act[b, j] >= 0]
            counts += np.bincount(sel, minlength=n_actions)
        seed_key = (seeds[b].entropy, tuple(seeds[b].spawn_key))
        records.append(
            RunRecord(
                instance=inst_id,
                seed_key=seed_key,
                config_digest=config_digest,
                periods=periods[live],
                q_snapshots=all_q[live, b],
                inventory_snapshots=all_inv[live, b],
                reward_window_means=all_rew[live, b],
                orders_window_means=all_orders[live, b],
                final_q=q[b].copy(),
                greedy=q[b].argmax(axis=2),
                final_inventory=inv[b].copy(),
                max_abs_inventory=inv_maxabs[b].copy(),
                stop_period=int(stop_t[b]),
                termination="greedy-stable" if stopped_early[b] else "step-budget",
                last_window=LastWindowStats(
                    n_periods=n_last,
                    orders_mean=float(ring_orders[b][valid].mean()),
                    reward_means=ring_rew[b][:, valid].mean(axis=1),
                    action_counts=counts,
                ),
                wall_clock=wall,
            )
        )
    return records


# ---------------------------------------------------------------------------
# frozen-action Monte Carlo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrozenStats:
    mean_rewards: np.ndarray
    stderr_rewards: np.ndarray
    mean_orders: float
    n_steps: int


def simulate_frozen(
    grid: SpreadGrid,
    model: ArrivalModel,
    penalty: InventoryPenalty,
    joint_action: JointAction,
    n_steps: int,
    seed,
    two_sided: bool = True,
) -> FrozenStats:
    """Simulate fills and rewards with actions held fixed every period.

    An independent check of the payoff tensor: sample means converge to the
    exact conditional expectations.
    """
    n = model.n_agents
    k = grid.as_array()
    w = model.weights_array()
    sigma_n = model.sigma * n
    bundle = RngBundle.from_seed(seed, n)

    if two_sided:
        ask_idx = np.asarray(joint_action.ask_indices) - 1
        bid_idx = np.asarray(joint_action.bid_indices) - 1
    else:
        ask_idx = np.asarray(joint_action.ask_indices) - 1
        bid_idx = None

    ask_shares, pa = _side_outcome(ask_idx, k, w, sigma_n)
    xa = (bundle.ask.random(n_steps) < pa).astype(float)
    if two_sided:
        bid_shares, pb = _side_outcome(bid_idx, k, w, sigma_n)
        xb = (bundle.bid.random(n_steps) < pb).astype(float)
    else:
        bid_shares = np.zeros(n)
        xb = np.zeros(n_steps)

    ask_fills = ask_shares[None, :] * xa[:, None]
    bid_fills = bid_shares[None, :] * xb[:, None]
    dy = bid_fills - ask_fills
    rewards = k[ask_idx][None, :] * ask_fills - penalty.xi * dy * dy
    if two_sided:
        rewards = rewards + k[bid_idx][None, :] * bid_fills

    return FrozenStats(
        mean_rewards=rewards.mean(axis=0),
        stderr_rewards=rewards.std(axis=0, ddof=1) / np.sqrt(n_steps),
        mean_orders=float(xa.mean() + xb.mean()),
        n_steps=n_steps,
    )
