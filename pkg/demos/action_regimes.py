"""
What one edge does as the pressure rises
========================================

Every edge faces the same choice: stay, get reweighted, be deleted, or be
contracted, with probabilities that keep the expected pseudoinverse exact.
A single trade-off parameter beta prices reduction against variance. Sweeping
it for one edge of the unit triangle shows the three regimes: below the onset
nothing happens, then a single action mixes with a compensating reweight,
and past the saturation point only delete-or-contract remains.
"""

import numpy as np

from graphreduce import (
    EdgeQuantities,
    WeightedGraph,
    activation_beta,
    build_pseudoinverse,
    edge_leverage,
    optimal_action,
    regime_thresholds,
    update_norm,
)
from graphreduce.action import expected_error, expected_reduction

g = WeightedGraph.from_edges([(0, 1), (1, 2), (0, 2)])
state = build_pseudoinverse(g)
eq = EdgeQuantities(
    leverage=edge_leverage(state, 0, 1, 1.0),
    update_norm=update_norm(state, 0, 1, 1.0),
    triangles=1,
)
print(f"leverage {eq.leverage:.4f}  update norm {eq.update_norm:.4f}  "
      f"payoffs (delete {eq.r_delete}, contract {eq.r_contract})")

th = regime_thresholds(eq)
print(f"onset delete {th.onset_delete:.4f}  onset contract {th.onset_contract:.4f}  "
      f"saturation {th.saturation:.4f}")
print(f"beta reaching an expected reduction of 1/4: "
      f"{activation_beta(eq, 0.25):.4f}\n")

print(f"{'beta':>8} {'p_del':>7} {'p_con':>7} {'p_rew':>7} {'dw/w':>8} "
      f"{'E[red]':>7} {'E[err]':>7}  regime")
for beta in (0.2, 0.3, 0.4, th.saturation, 0.6, 2.0, 10.0):
    d = optimal_action(eq, beta)
    print(f"{beta:8.4f} {d.p_delete:7.4f} {d.p_contract:7.4f} "
          f"{d.p_reweight:7.4f} {d.reweight_ratio:8.4f} "
          f"{expected_reduction(eq, d):7.4f} {expected_error(eq, d):7.4f}  "
          f"{d.regime.name}")

# the mixture is unbiased at every beta: reweighting pulls the pseudoinverse
# the opposite way from the contraction it compensates, in exact proportion
d = optimal_action(eq, 0.4)
x = eq.leverage
f_contract = -1.0 / x
f_reweight = -d.reweight_ratio / (1.0 + d.reweight_ratio * x)
print(f"\nat beta 0.4: p_con*f_con + p_rew*f_rew = "
      f"{d.p_contract * f_contract + d.p_reweight * f_reweight:+.2e} (zero mean)")
