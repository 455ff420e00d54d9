"""The conflict-avoidant direction on a handful of gradient sets.

For gradients stacked as columns of G, the min-norm weights lam* give the
direction -G lam*, which does not increase any objective to first order.
Its length is the Pareto-stationarity measure: zero at a Pareto-stationary
point.
"""

import numpy as np

from modo.minnorm import ca_distance, solve_min_norm
from modo.simplex import uniform_weights

np.set_printoptions(precision=4, suppress=True)

cases = {
    "aligned": np.array([[1.0, 2.0], [0.5, 1.0]]),
    "opposed": np.array([[1.0, -1.0], [0.0, 0.0]]),
    "obtuse": np.array([[1.0, -0.5], [0.2, 1.0]]),
    "three tasks": np.array([[1.0, 0.0, -0.6], [0.0, 1.0, -0.6]]),
}

for name, G in cases.items():
    sol = solve_min_norm(G)
    d = sol.direction
    print(f"{name:12s} lam*={sol.weights}  d={d}  |d|={sol.ps_value:.4f}")
    # every objective decreases (or stays put) along d
    print(f"{'':12s} directional derivatives G^T d = {G.T @ d}")

# Any fixed weights give some direction; the CA distance measures how far it is from -G lam*.
G = cases["obtuse"]
lam0 = uniform_weights(2)
print("\nuniform weights on 'obtuse':", (G.T @ (-G @ lam0)).round(4),
      " CA distance:", round(ca_distance(G, lam0), 4))
