"""The two-dimensional nonconvex toy from three starting points.

Above the x2 = 0 line both objectives are log ridges; below it they are noisy
quadratics. Plain updates with small steps are used throughout.
"""

import numpy as np

from modo.algorithms import AlgoConfig, run
from modo.minnorm import ps_measure
from modo.problems import TOY_INITIALIZATIONS, ToySpec, make_toy_nonconvex
from modo.simplex import uniform_weights

toy, S = make_toy_nonconvex(ToySpec(n=20))
T = 20000

for x0 in TOY_INITIALIZATIONS:
    print(f"start {x0}: PS = {ps_measure(toy.empirical_gradient_matrix(np.array(x0), S)):.4f}")
    for algo in ("modo", "static", "mgda"):
        cfg = AlgoConfig(algo, T, 5e-3, 1e-4, uniform_weights(2), x0, seed=0, record_every=T)
        traj = run(toy, S, cfg)
        ps = ps_measure(toy.empirical_gradient_matrix(traj.final_x, S))
        print(f"  {algo:6s} -> x_T = {traj.final_x.round(2)}  PS = {ps:.4f}")
