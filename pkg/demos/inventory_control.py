"""Inventory management: quadratic penalty vs hard skew thresholds.

Two ways to keep dealers' books flat. The L2 penalty prices every inventory
change inside the reward; the skew rule leaves rewards alone but overrides the
quote once inventory breaches a band, quoting aggressively on the side that
unwinds the position.
"""

import numpy as np

from mmgame import (
    ArrivalModel,
    InventoryPenalty,
    SkewRule,
    SpreadGrid,
    TrainSettings,
    run_batch,
)

grid = SpreadGrid([0.1, 0.8])
model = ArrivalModel([0.0, 0.0], sigma=0.1, n_agents=2)

common = dict(temperature=0.1, budget=500_000, stability_window=None,
              snapshot_every=100_000)

print("1) L2 penalty, xi = 0.1: inventory swings are costed, not capped")
batch = run_batch(grid, model, InventoryPenalty(0.1),
                  TrainSettings(**common), n_instances=5, base_seed=14)
for r in batch.records:
    print(f"   instance {r.instance}: max |inventory| {r.max_abs_inventory.max():7.1f}, "
          f"final {np.round(r.final_inventory, 1)}")

print("\n2) hard skew at +/-100, xi = 0: inventory is capped near the band")
skew = SkewRule.for_grid(grid.m, upper=100.0, lower=-100.0)
batch = run_batch(grid, model, InventoryPenalty(0.0),
                  TrainSettings(skew=skew, **common), n_instances=5, base_seed=14)
for r in batch.records:
    print(f"   instance {r.instance}: max |inventory| {r.max_abs_inventory.max():7.1f}")
print("   bound: threshold + one period of fills =", 100.0 + 1.0)

print("\n3) no control at all: a random walk")
batch = run_batch(grid, model, InventoryPenalty(0.0),
                  TrainSettings(**common), n_instances=5, base_seed=14)
print("   max |inventory| per instance:",
      [round(float(r.max_abs_inventory.max()), 1) for r in batch.records])
