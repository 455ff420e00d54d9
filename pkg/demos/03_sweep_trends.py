"""One-factor sweeps around T=100, alpha=0.01, gamma=0.001 (three seeds, for speed).

The full preset uses ten seeds: ``modo preset figure2``.
"""

from modo import harness as h

res = h.run_figure2(seeds=(0, 1, 2), write=False)


def show(title, key, rows):
    print(f"\n{title}")
    print(f"  {key:>7} | avg r_opt | avg e_ca | final r_gen")
    for r in sorted(rows, key=lambda r: r[key]):
        print(f"  {r[key]:>7g} | {r['avg_r_opt_mean']:9.4f} | {r['avg_e_ca_mean']:8.4f} | {r['final_r_gen_mean']:+.4f}")


rows = res.agg_rows
show("horizon T", "T", [r for r in rows if r["alpha"] == 0.01 and r["gamma"] == 0.001])
show("step size alpha", "alpha", [r for r in rows if r["T"] == 100 and r["gamma"] == 0.001])
show("weight step gamma", "gamma", [r for r in rows if r["T"] == 100 and r["alpha"] == 0.01])
