"""Shared test oracles: deliberately naive, loop-based reimplementations."""

from __future__ import annotations

import math

import numpy as np
import pytest

from mmgame.market import ArrivalModel, InventoryPenalty, SpreadGrid, build_payoff_tensor


def naive_expected_payoffs(levels, weights, sigma, xi, n_agents, two_sided=True):
    """Expected rewards by explicit enumeration of joint actions and arrivals.

    Independent of the library's vectorized builder: plain loops, and the
    inventory term is an expectation over the four ask/bid arrival outcomes
    rather than a closed form.
    """
    m = len(levels)
    w_actions = m * m if two_sided else m
    shape = (n_agents,) + (w_actions,) * n_agents
    out = np.zeros(shape)
    joint_actions = np.ndindex(*(w_actions,) * n_agents)
    for joint in joint_actions:
        if two_sided:
            asks = [c // m for c in joint]
            bids = [c % m for c in joint]
        else:
            asks = list(joint)
            bids = None
        pa = math.exp(-sum(weights[a] for a in asks) / (sigma * n_agents))
        best_a = min(asks)
        na = asks.count(best_a)
        if two_sided:
            pb = math.exp(-sum(weights[b] for b in bids) / (sigma * n_agents))
            best_b = min(bids)
            nb = bids.count(best_b)
        for i in range(n_agents):
            ga = (1.0 / na) if asks[i] == best_a else 0.0
            if two_sided:
                gb = (1.0 / nb) if bids[i] == best_b else 0.0
                expected = 0.0
                for xa in (0, 1):
                    for xb in (0, 1):
                        prob = (pa if xa else 1 - pa) * (pb if xb else 1 - pb)
                        dy = gb * xb - ga * xa
                        r = (
                            levels[asks[i]] * ga * xa
                            + levels[bids[i]] * gb * xb
                            - xi * dy * dy
                        )
                        expected += prob * r
            else:
                expected = levels[asks[i]] * ga * pa
            out[(i,) + joint] = expected
    return out


def brute_force_nash(payoffs: np.ndarray) -> set[tuple[int, ...]]:
    """Profiles surviving unilateral deviations, via plain loops (1-based)."""
    n_agents = payoffs.shape[0]
    w = payoffs.shape[1]
    result = set()
    for joint in np.ndindex(*(w,) * n_agents):
        ok = True
        for i in range(n_agents):
            own = payoffs[(i,) + joint]
            for alt in range(w):
                dev = list(joint)
                dev[i] = alt
                if payoffs[(i,) + tuple(dev)] > own:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            result.add(tuple(c + 1 for c in joint))
    return result


def random_market_game(rng: np.random.Generator, m=None, n_agents=2, two_sided=False,
                       xi=0.0, max_level=1.0):
    """A random grid/arrival pair plus its payoff tensor."""
    m = m or int(rng.integers(2, 4))
    levels = np.sort(rng.uniform(0.05, max_level, size=m))
    while np.any(np.diff(levels) < 1e-3):
        levels = np.sort(rng.uniform(0.05, max_level, size=m))
    weights = np.sort(rng.uniform(0.0, 0.08, size=m))
    weights[0] = rng.uniform(0.0, weights[0])
    sigma = rng.uniform(0.1, 0.5)
    grid = SpreadGrid(levels)
    model = ArrivalModel(weights, sigma, n_agents)
    tensor = build_payoff_tensor(grid, model, InventoryPenalty(xi), two_sided=two_sided)
    return grid, model, tensor


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
