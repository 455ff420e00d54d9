"""Step-size and horizon regimes as functions of the sample size n.

The constants (10 alpha, 0.1 / T) are fixtures; only the growth orders matter.
"""

from modo import harness as h

n = 256
base = h.SweepConfig(seeds=(0, 1, 2))
print(f"n = {n}")
print(" regime |     T |  alpha  |  gamma   | r_opt  | r_gen   | e_ca")
for R in h.REGIMES:
    row = h.run_tradeoff_preset(R, n, base, workers=1, write=False).agg_rows[0]
    print(f" {R:>6} | {row['T']:5d} | {row['alpha']:.4f} | {row['gamma']:.2e} |"
          f" {row['final_r_opt_mean']:.4f} | {row['final_r_gen_mean']:+.4f} | {row['final_e_ca_mean']:.4f}")
