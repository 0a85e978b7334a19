"""Payoff tensors, equilibria, and Boltzmann fixed points for the bundled games.

Walks the deterministic side of the toolkit: build a game, classify its pure
Nash and cooperative joint actions, then solve for the long-run action
distribution under Boltzmann selection at a few temperatures.
"""

import numpy as np

from mmgame import (
    ArrivalModel,
    InventoryPenalty,
    SpreadGrid,
    build_payoff_tensor,
    equilibrium_report,
    fixed_point_q,
    theoretical_action_probabilities,
)

np.set_printoptions(precision=4, suppress=True)


def banner(title):
    print(f"\n=== {title} " + "=" * max(0, 60 - len(title)))


# --- a stag-hunt game: two spreads, orders always arrive ------------------
banner("two spreads, stag-hunt payoffs")
grid = SpreadGrid([0.1, 0.8])
model = ArrivalModel([0.0, 0.0], sigma=0.1, n_agents=2)
tensor = build_payoff_tensor(grid, model, two_sided=False)
print("one-side payoff matrix (rows = own spread):")
print(tensor.agent_matrix(1))
report = equilibrium_report(tensor)
print("pure Nash joint actions:", report.nash)
print("cooperative joint actions:", report.cooperative)

for lam in (0.1, 0.5):
    res = fixed_point_q(tensor, temperature=lam)
    print(f"temperature {lam}: q* = {res.q}, policy = {res.policy}")

# --- ten spreads: the lowest is the unique Nash but not the favorite ------
banner("ten spreads, moderate temperature")
grid10 = SpreadGrid([(i + 1) / 10 for i in range(10)])
model10 = ArrivalModel([i / 90 for i in range(10)], sigma=0.1, n_agents=2)
t10 = build_payoff_tensor(grid10, model10, two_sided=False)
print("pure Nash:", equilibrium_report(t10).nash)
res = fixed_point_q(t10, temperature=0.1)
print("fixed-point probabilities:", res.policy)
print("most likely spread:", grid10.levels[int(res.policy.argmax())])

# --- inventory aversion reshapes the two-sided game ------------------------
banner("inventory aversion sweep (two-sided stag hunt)")
for xi, res in theoretical_action_probabilities(grid, model, 0.1, xi_values=(0.0, 0.1, 0.2)):
    print(f"xi={xi}: action probabilities {res.policy}")
print("actions: 1=(low,low) 2=(low,high) 3=(high,low) 4=(high,high)")

# --- four spreads per side with inventory risk -----------------------------
banner("four spreads per side, xi = 0.1")
grid4 = SpreadGrid([3 / 30, 7 / 30, 11 / 30, 15 / 30])
model4 = ArrivalModel([0.0, 1 / 30, 2 / 30, 3 / 30], sigma=0.1, n_agents=2)
t4 = build_payoff_tensor(grid4, model4, InventoryPenalty(0.1))
print("pure Nash:", equilibrium_report(t4).nash)
for lam in (0.1, 0.01):
    kwargs = {"continuation_from": 0.1} if lam < 0.1 else {}
    res = fixed_point_q(t4, temperature=lam, **kwargs)
    top = int(res.policy.argmax())
    print(f"temperature {lam}: top action {top + 1} with probability {res.policy[top]:.4f}")
