"""Dealer-market game primitives.

Agents quote ask/bid spreads from a shared discrete grid. Each period one
market order per side may arrive; it is filled by the best (lowest-spread)
quotes, split equally on ties. Rewards are spread revenue minus a quadratic
penalty on the one-period inventory change.

Spread and agent indices in the public API are 1-based, matching the
combined-action encoding ``(a - 1) * M + (b - 1) + 1``. Internal arrays are
0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "SpreadGrid",
    "ArrivalModel",
    "InventoryPenalty",
    "JointAction",
    "PayoffTensor",
    "arrival_probability",
    "expected_side_reward",
    "expected_inventory_penalty",
    "build_payoff_tensor",
    "tensor_to_csv",
]

DEFAULT_CELL_BUDGET = 10_000_000


@dataclass(frozen=True)
class SpreadGrid:
    """Discrete spread levels shared by the ask and bid sides."""

    levels: tuple[float, ...]

    def __init__(self, levels: Sequence[float]):
        levels = tuple(float(k) for k in levels)
        if len(levels) < 2:
            raise ValueError("need at least two spread levels")
        if any(k <= 0 for k in levels):
            raise ValueError("spread levels must be positive")
        if any(a >= b for a, b in zip(levels, levels[1:])):
            raise ValueError("spread levels must be strictly ascending")
        object.__setattr__(self, "levels", levels)

    @property
    def m(self) -> int:
        return len(self.levels)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=float)


@dataclass(frozen=True)
class ArrivalModel:
    """Order-arrival probabilities driven by quoted spreads.

    The chance that a market order hits one side is
    ``exp(-(sum_i w_i * v_i) / (sigma * n_agents))`` where ``v_i`` counts the
    agents quoting spread level ``i`` on that side.
    """

    weights: tuple[float, ...]
    sigma: float
    n_agents: int

    def __init__(self, weights: Sequence[float], sigma: float, n_agents: int):
        weights = tuple(float(w) for w in weights)
        if any(w < 0 for w in weights):
            raise ValueError("weights must be non-negative")
        if any(a > b for a, b in zip(weights, weights[1:])):
            raise ValueError("weights must be non-decreasing")
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        if n_agents < 1:
            raise ValueError("need at least one agent")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "sigma", float(sigma))
        object.__setattr__(self, "n_agents", int(n_agents))

    @property
    def m(self) -> int:
        return len(self.weights)

    def weights_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


@dataclass(frozen=True)
class InventoryPenalty:
    """Aversion weight on the squared one-period inventory change."""

    xi: float = 0.0

    def __post_init__(self):
        if self.xi < 0:
            raise ValueError("xi must be non-negative")


@dataclass(frozen=True)
class JointAction:
    """Per-agent (ask, bid) spread index pairs, 1-based."""

    pairs: tuple[tuple[int, int], ...]
    m: int

    def __post_init__(self):
        for a, b in self.pairs:
            if not (1 <= a <= self.m and 1 <= b <= self.m):
                raise ValueError(f"spread index out of range 1..{self.m}")

    @classmethod
    def from_combined(cls, indices: Sequence[int], m: int) -> "JointAction":
        """Decode row-major combined action indices (1-based)."""
        pairs = []
        for c in indices:
            if not (1 <= c <= m * m):
                raise ValueError(f"combined index out of range 1..{m * m}")
            a, b = divmod(c - 1, m)
            pairs.append((a + 1, b + 1))
        return cls(tuple(pairs), m)

    @property
    def ask_indices(self) -> tuple[int, ...]:
        return tuple(a for a, _ in self.pairs)

    @property
    def bid_indices(self) -> tuple[int, ...]:
        return tuple(b for _, b in self.pairs)

    @property
    def combined_indices(self) -> tuple[int, ...]:
        return tuple((a - 1) * self.m + (b - 1) + 1 for a, b in self.pairs)


@dataclass(frozen=True)
class PayoffTensor:
    """Expected one-period rewards for every agent under every joint action.

    ``payoffs[i]`` has one axis per agent; entry ``payoffs[i][c_1, ..., c_N]``
    is agent ``i+1``'s expected reward when agent ``j+1`` plays (0-based)
    action ``c_j``. Actions are combined (ask, bid) pairs when ``two_sided``,
    single-side spread indices otherwise.
    """

    n_agents: int
    n_levels: int
    two_sided: bool
    side_separable: bool
    payoffs: np.ndarray = field(repr=False)

    @property
    def n_actions(self) -> int:
        return self.n_levels * self.n_levels if self.two_sided else self.n_levels

    def agent_matrix(self, agent_index: int = 1) -> np.ndarray:
        """Payoff slice for one agent (1-based index)."""
        return self.payoffs[agent_index - 1]

    def max_abs_payoff(self) -> float:
        return float(np.abs(self.payoffs).max())

    def total_payoff(self) -> np.ndarray:
        """Sum of all agents' expected rewards per joint action."""
        return self.payoffs.sum(axis=0)


def _validate_side_actions(m: int, n_agents: int, side_actions: Sequence[int]) -> np.ndarray:
    acts = np.asarray(side_actions, dtype=int)
    if acts.shape != (n_agents,):
        raise ValueError(f"expected {n_agents} side actions, got {acts.shape}")
    if acts.min() < 1 or acts.max() > m:
        raise ValueError(f"spread index out of range 1..{m}")
    return acts - 1


def arrival_probability(model: ArrivalModel, side_actions: Sequence[int]) -> float:
    """Probability that a market order arrives on one side this period."""
    acts = _validate_side_actions(model.m, model.n_agents, side_actions)
    w = model.weights_array()
    return float(np.exp(-w[acts].sum() / (model.sigma * model.n_agents)))


def expected_side_reward(
    grid: SpreadGrid,
    model: ArrivalModel,
    side_actions: Sequence[int],
    agent_index: int,
) -> float:
    """Expected one-side revenue for one agent given the side's action profile.

    Only agents quoting the minimum spread earn anything; ties split the
    single order equally.
    """
    if grid.m != model.m:
        raise ValueError("grid and arrival model disagree on level count")
    acts = _validate_side_actions(model.m, model.n_agents, side_actions)
    if not (1 <= agent_index <= model.n_agents):
        raise ValueError("agent index out of range")
    own = acts[agent_index - 1]
    best = acts.min()
    if own != best:
        return 0.0
    winners = int((acts == best).sum())
    prob = arrival_probability(model, side_actions)
    return grid.levels[own] / winners * prob


def _fill_moments(win: bool, winners: int, prob: float) -> tuple[float, float]:
    """Mean and second moment of one agent's fill quantity on one side."""
    if not win:
        return 0.0, 0.0
    share = 1.0 / winners
    return share * prob, share * share * prob


def expected_inventory_penalty(
    grid: SpreadGrid,
    model: ArrivalModel,
    joint_action: JointAction,
    agent_index: int,
    penalty: InventoryPenalty,
) -> float:
    """Expected quadratic inventory cost ``xi * E[(dy)^2]`` for one agent.

    Ask and bid orders arrive independently, so
    ``E[(dy)^2] = E[g_b^2] + E[g_a^2] - 2 E[g_a] E[g_b]`` with ``g_a``/``g_b``
    the (possibly split) fill quantities on each side.
    """
    if penalty.xi == 0.0:
        return 0.0
    asks = np.asarray(joint_action.ask_indices, dtype=int) - 1
    bids = np.asarray(joint_action.bid_indices, dtype=int) - 1
    if len(asks) != model.n_agents:
        raise ValueError("joint action does not match agent count")
    i = agent_index - 1
    pa = arrival_probability(model, joint_action.ask_indices)
    pb = arrival_probability(model, joint_action.bid_indices)
    ea, ea2 = _fill_moments(asks[i] == asks.min(), int((asks == asks.min()).sum()), pa)
    eb, eb2 = _fill_moments(bids[i] == bids.min(), int((bids == bids.min()).sum()), pb)
    return penalty.xi * (ea2 + eb2 - 2.0 * ea * eb)


def _joint_action_grid(n_actions: int, n_agents: int) -> np.ndarray:
    """All joint actions as an (n_actions**n_agents, n_agents) index array."""
    grids = np.indices((n_actions,) * n_agents)
    return grids.reshape(n_agents, -1).T


def build_payoff_tensor(
    grid: SpreadGrid,
    model: ArrivalModel,
    penalty: InventoryPenalty | None = None,
    two_sided: bool = True,
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> PayoffTensor:
    """Materialize expected rewards for every (agent, joint action) cell.

    With ``two_sided=False`` agents quote the ask side only and actions are
    plain spread indices; the inventory penalty does not apply there.
    """
    if grid.m != model.m:
        raise ValueError("grid and arrival model disagree on level count")
    penalty = penalty or InventoryPenalty(0.0)
    if not two_sided and penalty.xi != 0.0:
        raise ValueError("inventory penalty requires two-sided quoting")
    n = model.n_agents
    m = grid.m
    w_actions = m * m if two_sided else m
    cells = n * w_actions**n
    if cells > cell_budget:
        raise ValueError(
            f"tensor needs {cells} cells, above the budget of {cell_budget}; "
            "reduce agents or levels, or raise cell_budget"
        )

    joint = _joint_action_grid(w_actions, n)  # (J, n)
    k = grid.as_array()
    w = model.weights_array()
    sn = model.sigma * n

    if two_sided:
        asks = joint // m
        bids = joint % m
    else:
        asks = joint
        bids = None

    pa = np.exp(-w[asks].sum(axis=1) / sn)
    best_a = asks.min(axis=1, keepdims=True)
    win_a = asks == best_a
    cnt_a = win_a.sum(axis=1, keepdims=True)
    share_a = np.where(win_a, 1.0 / cnt_a, 0.0)
    rewards = k[asks] * share_a * pa[:, None]

    if two_sided:
        pb = np.exp(-w[bids].sum(axis=1) / sn)
        best_b = bids.min(axis=1, keepdims=True)
        win_b = bids == best_b
        cnt_b = win_b.sum(axis=1, keepdims=True)
        share_b = np.where(win_b, 1.0 / cnt_b, 0.0)
        rewards = rewards + k[bids] * share_b * pb[:, None]
        if penalty.xi > 0.0:
            ea = share_a * pa[:, None]
            ea2 = share_a**2 * pa[:, None]
            eb = share_b * pb[:, None]
            eb2 = share_b**2 * pb[:, None]
            rewards = rewards - penalty.xi * (ea2 + eb2 - 2.0 * ea * eb)

    payoffs = np.ascontiguousarray(
        rewards.T.reshape((n,) + (w_actions,) * n)
    )
    return PayoffTensor(
        n_agents=n,
        n_levels=m,
        two_sided=two_sided,
        side_separable=penalty.xi == 0.0,
        payoffs=payoffs,
    )


def tensor_from_matrix(matrix: Sequence[Sequence[float]], n_levels: int | None = None) -> PayoffTensor:
    """Wrap an explicit two-agent one-side payoff matrix (rows = own spread)."""
    z = np.asarray(matrix, dtype=float)
    if z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise ValueError("explicit payoff matrix must be square")
    payoffs = np.stack([z, z.T])
    return PayoffTensor(
        n_agents=2,
        n_levels=n_levels or z.shape[0],
        two_sided=False,
        side_separable=True,
        payoffs=payoffs,
    )


def tensor_to_csv(tensor: PayoffTensor, path) -> None:
    """Write the tensor as rows of agent, action indices (1-based), reward."""
    import csv

    n = tensor.n_agents
    joint = _joint_action_grid(tensor.n_actions, n)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["agent"] + [f"action_{j + 1}" for j in range(n)] + ["expected_reward"]
        )
        flat = tensor.payoffs.reshape(n, -1)
        for i in range(n):
            for row_idx, actions in enumerate(joint):
                writer.writerow(
                    [i + 1] + [int(c) + 1 for c in actions] + [repr(float(flat[i, row_idx]))]
                )
