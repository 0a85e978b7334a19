"""Independent tabular Q-learners with Boltzmann action selection.

Stateless learners keep a single row of action values; memory learners keep
one row per observed joint-action state (the previous period's play by all
agents). Action and state indices at this level are 0-based; CSV exports
convert to the 1-based encoding used in reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "LearningRateSchedule",
    "AgentState",
    "make_agent",
    "select_action",
    "update_stateless",
    "update_with_memory",
    "greedy_policy",
    "encode_joint_state",
    "decode_joint_state",
]


@dataclass(frozen=True)
class LearningRateSchedule:
    """Step sizes ``c / (c + t)`` or a fixed constant in [0, 1]."""

    kind: str = "harmonic"
    value: float = 1e4

    def __post_init__(self):
        if self.kind == "harmonic":
            if self.value <= 0:
                raise ValueError("harmonic schedule needs c > 0")
        elif self.kind == "constant":
            if not 0.0 <= self.value <= 1.0:
                raise ValueError("constant rate must lie in [0, 1]")
        else:
            raise ValueError(f"unknown schedule kind {self.kind!r}")

    def rate(self, t: int) -> float:
        if self.kind == "harmonic":
            return self.value / (self.value + t)
        return self.value


@dataclass
class AgentState:
    """Mutable learner state: Q-table, temperature, discount, and step count."""

    q: np.ndarray  # (n_states, n_actions)
    temperature: float
    gamma: float
    schedule: LearningRateSchedule
    t: int = 0

    @property
    def n_states(self) -> int:
        return self.q.shape[0]

    @property
    def n_actions(self) -> int:
        return self.q.shape[1]


def make_agent(
    n_actions: int,
    temperature: float,
    gamma: float = 0.0,
    schedule: LearningRateSchedule | None = None,
    n_states: int = 1,
    q0: float | Sequence[float] = 0.0,
) -> AgentState:
    """Build a learner with per-action initial values replicated across states."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    row = np.broadcast_to(np.asarray(q0, dtype=float), (n_actions,))
    q = np.tile(row, (n_states, 1)).astype(float)
    return AgentState(
        q=q,
        temperature=temperature,
        gamma=gamma,
        schedule=schedule or LearningRateSchedule(),
    )


def select_action(agent: AgentState, state: int, rng: np.random.Generator) -> int:
    """Sample an action from the Boltzmann distribution of the state's Q-row.

    Consumes exactly one uniform draw. Every action has strictly positive
    probability for any finite temperature.
    """
    row = agent.q[state]
    weights = np.exp((row - row.max()) / agent.temperature)
    cum = np.cumsum(weights)
    u = rng.random() * cum[-1]
    return min(int(np.searchsorted(cum, u, side="right")), agent.n_actions - 1)


def update_stateless(agent: AgentState, action: int, reward: float) -> AgentState:
    """Standard tabular update on the single state row; advances the step count."""
    return update_with_memory(agent, 0, action, reward, 0)


def update_with_memory(
    agent: AgentState, state: int, action: int, reward: float, next_state: int
) -> AgentState:
    """Update one (state, action) cell toward ``reward + gamma * max_next``.

    The bootstrap maximum is taken from the pre-update table, so a transition
    back into the same state uses the old row.
    """
    alpha = agent.schedule.rate(agent.t)
    target = reward + agent.gamma * agent.q[next_state].max()
    agent.q[state, action] = (1.0 - alpha) * agent.q[state, action] + alpha * target
    agent.t += 1
    return agent


def greedy_policy(agent: AgentState) -> np.ndarray:
    """Per-state argmax actions; ties resolve to the lowest action index."""
    return agent.q.argmax(axis=1)


def encode_joint_state(actions: Sequence[int], n_actions: int) -> int:
    """Pack all agents' action indices into one state id, agent 1 most significant."""
    state = 0
    for a in actions:
        if not 0 <= a < n_actions:
            raise ValueError("action index out of range")
        state = state * n_actions + int(a)
    return state


def decode_joint_state(state: int, n_actions: int, n_agents: int) -> tuple[int, ...]:
    out = []
    for _ in range(n_agents):
        state, a = divmod(state, n_actions)
        out.append(a)
    if state:
        raise ValueError("state id out of range")
    return tuple(reversed(out))
