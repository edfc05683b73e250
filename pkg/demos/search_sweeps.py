"""
Searching for bad instances
===========================

Hill-climb over kernel tables to find large decoupling ratios.  In l^inf_d
the best-found constant keeps creeping up with d; in l^1_d it levels off.
Small budgets keep this quick; the experiment harness runs the full sizes.
"""

from tangentlab import banach as B
from tangentlab import search as S

cfg = S.SearchConfig(B.Lp(2, B.INF), p=1.0, N=3, budget=2000, seed=7, restarts=2)
linf = S.dimension_sweep(cfg, [2, 4, 8])
l1 = S.dimension_sweep(S.SearchConfig(B.Lp(2, 1.0), p=1.0, N=3, budget=2000, seed=7, restarts=2), [2, 4, 8])

print("dim   l^inf     l^1")
for a, b in zip(linf.rows, l1.rows):
    print(f"{a['dim']:3d}  {a['best_constant']:.5f}  {b['best_constant']:.5f}")

###############################################################################
# UMD and one-sided Garling constants on Paley-Walsh instances

res = S.hill_climb(S.SearchConfig(B.Lp(3, B.INF), p=1.0, N=3, mode="umd_exact", budget=1500, seed=1))
print("best UMD ratio found:", round(res.best, 6), "signs", res.estimate.extra["signs"])
g = S.garling_constants(res.kernel, 1.0)
print(f"garling forward {g['forward']:.6f}, reverse {g['reverse']:.6f}")

# the Hilbert space is the control: every search returns 1
h = S.hill_climb(S.SearchConfig(B.Lp(3, 2.0), p=2.0, N=3, budget=500, seed=0))
print("Hilbert best:", h.best)
