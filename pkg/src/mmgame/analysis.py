"""Static and long-run analysis of the quoting game.

Covers pure-Nash / cooperative classification of payoff tensors, the
Boltzmann-selection fixed point ``q*`` and its expected-update operator,
sufficient contraction bounds, side-separability checks, two-spread crossing
diagrams, and the many-agent limiting profiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .market import (
    ArrivalModel,
    InventoryPenalty,
    PayoffTensor,
    SpreadGrid,
    build_payoff_tensor,
)

__all__ = [
    "FixedPointError",
    "FixedPointResult",
    "EquilibriumReport",
    "LimitProfile",
    "boltzmann_policy",
    "apply_expected_update",
    "fixed_point_q",
    "theoretical_action_probabilities",
    "pure_nash_equilibria",
    "cooperative_strategies",
    "equilibrium_report",
    "two_spread_crossings",
    "contraction_coefficient",
    "separability_check",
    "infinite_agent_limit",
]


class FixedPointError(RuntimeError):
    """Damped iteration failed to reach the requested residual."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class FixedPointResult:
    """Symmetric fixed point of the expected-update operator."""

    q: np.ndarray
    policy: np.ndarray
    residual: float
    iterations: int
    temperature: float
    gamma: float
    branch: str  # "direct" or "continuation"


@dataclass(frozen=True)
class EquilibriumReport:
    """Pure Nash and cooperative joint actions (1-based combined indices)."""

    nash: tuple[tuple[int, ...], ...]
    cooperative: tuple[tuple[int, ...], ...]
    max_total_payoff: float
    total_payoffs: np.ndarray


@dataclass(frozen=True)
class LimitProfile:
    """One-side spread distribution in the many-agent limit."""

    u: float
    probabilities: np.ndarray
    residual: float
    roots: tuple[float, ...]
    unique: bool


def boltzmann_policy(q: Sequence[float], temperature: float) -> np.ndarray:
    """Softmax of ``q / temperature`` with max-subtraction for overflow safety."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    q = np.asarray(q, dtype=float)
    x = (q - q.max()) / temperature
    e = np.exp(x)
    return e / e.sum()


def _rival_expected_reward(payoff_i: np.ndarray, agent: int, policies: list[np.ndarray]) -> np.ndarray:
    """Contract one agent's payoff block with the rivals' action distributions."""
    t = np.moveaxis(payoff_i, agent, 0)
    rivals = [p for j, p in enumerate(policies) if j != agent]
    for p in reversed(rivals):
        t = t @ p
    return t


def apply_expected_update(
    tensor: PayoffTensor, q_stacked: np.ndarray, temperature: float, gamma: float
) -> np.ndarray:
    """One application of the expected-update operator to stacked Q-values.

    ``q_stacked`` has shape (n_agents, n_actions); row ``i`` is mapped to
    ``R_i(w; Q_-i) + gamma * max_w' q_i(w')`` where ``R_i`` averages agent
    ``i``'s payoffs over the rivals' Boltzmann action distributions.
    """
    q_stacked = np.asarray(q_stacked, dtype=float)
    n, w = q_stacked.shape
    if n != tensor.n_agents or w != tensor.n_actions:
        raise ValueError("stacked Q shape does not match the tensor")
    policies = [boltzmann_policy(q_stacked[j], temperature) for j in range(n)]
    out = np.empty_like(q_stacked)
    for i in range(n):
        out[i] = _rival_expected_reward(tensor.payoffs[i], i, policies)
        out[i] += gamma * q_stacked[i].max()
    return out


def _symmetric_update(tensor: PayoffTensor, q: np.ndarray, temperature: float, gamma: float) -> np.ndarray:
    policy = boltzmann_policy(q, temperature)
    r = _rival_expected_reward(tensor.payoffs[0], 0, [policy] * tensor.n_agents)
    return r + gamma * q.max()


def _iterate(
    tensor: PayoffTensor,
    temperature: float,
    gamma: float,
    q0: np.ndarray,
    damping: float,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, float, int]:
    q = q0.copy()
    residual = np.inf
    for it in range(1, max_iter + 1):
        target = _symmetric_update(tensor, q, temperature, gamma)
        residual = float(np.abs(target - q).max())
        if residual <= tol:
            return q, residual, it
        q = (1.0 - damping) * q + damping * target
    return q, residual, max_iter


def fixed_point_q(
    tensor: PayoffTensor,
    temperature: float,
    gamma: float = 0.0,
    q0: Sequence[float] | None = None,
    damping: float = 0.5,
    tol: float = 1e-12,
    max_iter: int = 1_000_000,
    continuation_from: float | None = None,
    continuation_steps: int = 24,
) -> FixedPointResult:
    """Solve ``q = R(q) + gamma * max q`` for the symmetric game by damped iteration.

    At small temperatures the iteration may diverge or cycle; passing
    ``continuation_from`` (a larger temperature) solves there first and tracks
    the solution down a geometric temperature schedule. The result is then
    labelled as the continuation branch: with several coexisting fixed points
    it reports the one connected to the high-temperature solution.
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    w = tensor.n_actions
    q = np.zeros(w) if q0 is None else np.asarray(q0, dtype=float).copy()
    if q.shape != (w,):
        raise ValueError("q0 has the wrong length")

    branch = "direct"
    if continuation_from is not None and continuation_from > temperature:
        branch = "continuation"
        schedule = np.geomspace(continuation_from, temperature, continuation_steps)
        for lam in schedule[:-1]:
            q, residual, _ = _iterate(tensor, lam, gamma, q, damping, tol, max_iter)
            if residual > tol:
                raise FixedPointError(
                    f"no convergence at continuation temperature {lam:.6g} "
                    f"(residual {residual:.3e})",
                    residual,
                    max_iter,
                )

    q, residual, iterations = _iterate(tensor, temperature, gamma, q, damping, tol, max_iter)
    if residual > tol:
        raise FixedPointError(
            f"no convergence at temperature {temperature:.6g} after {iterations} "
            f"iterations (residual {residual:.3e}); the expected update is "
            "likely not contractive here",
            residual,
            iterations,
        )
    return FixedPointResult(
        q=q,
        policy=boltzmann_policy(q, temperature),
        residual=residual,
        iterations=iterations,
        temperature=temperature,
        gamma=gamma,
        branch=branch,
    )


def theoretical_action_probabilities(
    grid: SpreadGrid,
    model: ArrivalModel,
    temperature: float,
    xi_values: Sequence[float],
    gamma: float = 0.0,
    **solver_kwargs,
) -> list[tuple[float, FixedPointResult]]:
    """Fixed-point action distributions across inventory-aversion levels.

    Rebuilds the two-sided payoff tensor for each ``xi`` and solves at the
    given temperature; solver failures propagate per row.
    """
    out = []
    for xi in xi_values:
        tensor = build_payoff_tensor(grid, model, InventoryPenalty(xi))
        out.append((float(xi), fixed_point_q(tensor, temperature, gamma, **solver_kwargs)))
    return out


def pure_nash_equilibria(tensor: PayoffTensor) -> tuple[tuple[int, ...], ...]:
    """All joint actions (1-based) surviving every unilateral deviation.

    Ties count: the comparison is a weak inequality against the exact best
    response value.
    """
    n = tensor.n_agents
    mask = np.ones(tensor.payoffs.shape[1:], dtype=bool)
    for i in range(n):
        best = tensor.payoffs[i].max(axis=i, keepdims=True)
        mask &= tensor.payoffs[i] >= best
    profiles = np.argwhere(mask)
    return tuple(tuple(int(c) + 1 for c in row) for row in profiles)


def cooperative_strategies(tensor: PayoffTensor) -> tuple[tuple[int, ...], ...]:
    """Joint actions (1-based) maximizing the sum of all agents' payoffs."""
    total = tensor.total_payoff()
    profiles = np.argwhere(total >= total.max())
    return tuple(tuple(int(c) + 1 for c in row) for row in profiles)


def equilibrium_report(tensor: PayoffTensor) -> EquilibriumReport:
    total = tensor.total_payoff()
    return EquilibriumReport(
        nash=pure_nash_equilibria(tensor),
        cooperative=cooperative_strategies(tensor),
        max_total_payoff=float(total.max()),
        total_payoffs=total,
    )


def two_spread_crossings(
    z: Sequence[Sequence[float]],
    temperature: float,
    grid_points: int = 100_000,
) -> list[float]:
    """Fixed-point probabilities of the lower spread in a two-spread game.

    Solves ``ln(p/(1-p)) = (z12 - z22)/lam + (z11 - z12 + z22)/lam * p`` by a
    sign-change scan in log-odds space plus bracketed root polishing. Returns
    every root in (0, 1); the count is odd for non-degenerate payoffs.
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    z = np.asarray(z, dtype=float)
    if z.shape != (2, 2):
        raise ValueError("expected a 2x2 one-side payoff matrix")
    if z[1, 0] != 0.0:
        raise ValueError("undercut rival payoff z21 must be zero")
    a = (z[0, 1] - z[1, 1]) / temperature
    b = (z[0, 0] - z[0, 1] + z[1, 1]) / temperature
    if a == 0.0 and b == 0.0:
        return [0.5]  # all payoffs equal: log-odds vanish at p = 1/2

    def gap(t: float) -> float:
        return t - a - b / (1.0 + np.exp(-t))

    span = abs(a) + abs(b) + 60.0
    ts = np.linspace(-span, span, grid_points)
    vals = gap(ts)
    t_roots = []
    sign = np.signbit(vals)
    for idx in np.nonzero(sign[:-1] != sign[1:])[0]:
        t_roots.append(brentq(gap, ts[idx], ts[idx + 1], xtol=1e-15, rtol=8.9e-16))
    t_roots.extend(ts[vals == 0.0])
    # extreme log-odds saturate in double precision; keep inside (0, 1)
    lo, hi = np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0)
    return sorted({float(np.clip(1.0 / (1.0 + np.exp(-t)), lo, hi)) for t in t_roots})


def contraction_coefficient(
    tensor: PayoffTensor,
    temperature: float,
    gamma: float = 0.0,
    q_bound: float | None = None,
) -> float:
    """Sufficient Lipschitz bound for the expected-update operator.

    Returns ``(N - 1) * M^2 * max|payoff| / temperature + gamma`` with ``M``
    the per-side level count. Values below one certify global convergence of
    the learning recursion; above one nothing is implied (the bound is
    sufficient, not necessary).
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    max_abs = tensor.max_abs_payoff()
    if q_bound is not None and gamma < 1.0 and q_bound < max_abs / (1.0 - gamma):
        raise ValueError("q_bound below the attainable Q-value range")
    return (tensor.n_agents - 1) * tensor.n_levels**2 * max_abs / temperature + gamma


def separability_check(
    grid: SpreadGrid,
    model: ArrivalModel,
    temperature: float,
    gamma: float = 0.0,
    r_d: float = 0.0,
    **solver_kwargs,
) -> float:
    """Worst-case defect of the ask/bid decomposition of the combined fixed point.

    Without inventory aversion the combined-game solution should equal the sum
    of the one-side solutions plus ``r_d / (1 - gamma)`` for any constant
    reward shift ``r_d``. Returns ``max_w |q*(w) - q*_a(w_a) - q*_b(w_b) -
    r_d/(1-gamma)|``.
    """
    side = build_payoff_tensor(grid, model, two_sided=False)
    combined = build_payoff_tensor(grid, model, InventoryPenalty(0.0))
    if r_d != 0.0:
        combined = PayoffTensor(
            n_agents=combined.n_agents,
            n_levels=combined.n_levels,
            two_sided=True,
            side_separable=True,
            payoffs=combined.payoffs + r_d,
        )
    res_side = fixed_point_q(side, temperature, gamma, **solver_kwargs)
    res_comb = fixed_point_q(combined, temperature, gamma, **solver_kwargs)
    m = grid.m
    composed = (
        res_side.q[:, None] + res_side.q[None, :] + r_d / (1.0 - gamma)
    ).reshape(m * m)
    return float(np.abs(res_comb.q - composed).max())


def infinite_agent_limit(
    grid: SpreadGrid,
    arrival: Callable[[np.ndarray], float],
    u: float,
    tol: float = 1e-12,
    scan_points: int = 4001,
) -> LimitProfile:
    """One-side spread distribution as the number of agents grows without bound.

    ``arrival`` maps a frequency vector over the M spreads to an order-arrival
    probability; it must be continuous and bounded away from zero. Temperature
    scales as ``1/N**u``: exploration dominates for ``u < 1`` (uniform play),
    undercutting dominates for ``u > 1`` (lowest spread only), and ``u = 1``
    balances them through a one-dimensional consistency equation in the
    lowest-spread probability.
    """
    m = grid.m
    if u < 1.0:
        x = np.full(m, 1.0 / m)
        return LimitProfile(u=u, probabilities=x, residual=0.0, roots=(1.0 / m,), unique=True)
    if u > 1.0:
        x = np.zeros(m)
        x[0] = 1.0
        return LimitProfile(u=u, probabilities=x, residual=0.0, roots=(1.0,), unique=True)

    k1 = grid.levels[0]

    def profile(x1: float) -> np.ndarray:
        x = np.full(m, (1.0 - x1) / (m - 1))
        x[0] = x1
        return x

    def gap(x1: float) -> float:
        p = float(arrival(profile(x1)))
        if not 0.0 < p <= 1.0:
            raise ValueError("arrival probability must lie in (0, 1]")
        # x1 = e^t / (e^t + M - 1) with t = K(1) P(x) / x1, evaluated stably
        rhs = 1.0 / (1.0 + (m - 1) * np.exp(-k1 * p / x1))
        return x1 - rhs

    eps = 1e-12
    xs = np.linspace(eps, 1.0 - eps, scan_points)
    vals = np.array([gap(x) for x in xs])
    sign = np.signbit(vals)
    brackets = np.nonzero(sign[:-1] != sign[1:])[0]
    roots = [float(brentq(gap, xs[i], xs[i + 1], xtol=1e-15, rtol=8.9e-16)) for i in brackets]
    if not roots:
        raise FixedPointError("no consistent lowest-spread probability found", np.inf, 0)
    x1 = roots[0]
    residual = abs(gap(x1))
    if residual > tol:
        raise FixedPointError(
            f"limit consistency residual {residual:.3e} above tolerance", residual, 0
        )
    return LimitProfile(
        u=u,
        probabilities=profile(x1),
        residual=residual,
        roots=tuple(roots),
        unique=len(roots) == 1,
    )
