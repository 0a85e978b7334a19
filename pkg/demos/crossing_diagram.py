"""Two-spread crossing roots: where log-odds meet the expected-reward line.

In a two-spread game the fixed-point probability of the lower spread solves
``ln(p/(1-p)) = intercept + slope * p``. At moderate temperature there is a
single root; at low temperature the stag-hunt game develops three, and the
learning outcome depends on where the agents start.
"""

from mmgame import ArrivalModel, SpreadGrid, build_payoff_tensor, two_spread_crossings

SH = build_payoff_tensor(
    SpreadGrid([0.1, 0.8]), ArrivalModel([0.0, 0.0], 0.1, 2), two_sided=False
).agent_matrix(1)
PD = build_payoff_tensor(
    SpreadGrid([0.41, 0.8]), ArrivalModel([0.0, 0.0], 0.1, 2), two_sided=False
).agent_matrix(1)

for name, z in (("stag hunt", SH), ("prisoner's dilemma", PD)):
    print(f"\n{name}: one-side payoffs")
    print(z)
    for lam in (0.1, 0.01):
        roots = two_spread_crossings(z, temperature=lam)
        intercept = (z[0, 1] - z[1, 1]) / lam
        slope = (z[0, 0] - z[0, 1] + z[1, 1]) / lam
        print(f"  temperature {lam}: line {intercept:+.2f} {slope:+.2f}*p, "
              f"roots {['%.10g' % r for r in roots]}")

print(
    "\nReading: each root is a self-consistent probability of quoting the"
    "\nlower spread. Three roots mean both near-zero (cooperative) and"
    "\nnear-one (competitive) outcomes are stable long-run candidates."
)
