"""
Experiment reports
==================

Run the small experiments and write their CSV and JSON reports.  Every row
carries the seed and instance fingerprint; rerunning gives identical CSVs.
"""

import tempfile

from tangentlab import banach as B
from tangentlab import experiments as X

# L^p(S; X) norms of block-diagonal instances split over sections exactly
rep = X.exp_fubini_lift(weights=(0.25, 0.75), p=1.0, N=3, inner=B.Lp(2, 2.0))
for v in rep.verdicts:
    print(f"{v.name:38s} {'pass' if v.passed else 'FAIL'}  ({v.value:.2e})")

# forward Garling constant coincides with the decoupling constant
rep = X.exp_garling_split(N=3, budget=500, restarts=2, instances=5)
print("max |forward - decoupling|:", max(rep.column("abs_diff")))

# a quick trace-norm probe; the default sizes are what the pins cover
rep = X.exp_schatten_probe(ks=(2, 3), N=3, budget=500, restarts=2)
print("trace-norm column:", [round(v, 5) for v in rep.column("best_constant")])
print(rep.notes)

out = tempfile.mkdtemp()
paths = rep.write(out)
print("wrote", paths["csv"], "and", paths["json"])
