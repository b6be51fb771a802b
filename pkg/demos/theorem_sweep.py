"""
Sweeping divisibility of Taylor coefficients
============================================

A sweep checks p^m | t_f(tau; n) over a range of n and emits one JSON row per
(n, m).  The weak bound starts at n = (m - 1) p^2, the sharp bound at
ceil(m/2) p^2 under extra conditions, and conjecture mode probes the sharp
range without them.
"""

from qmlab.cmtaylor import HypothesisError, load_registry, sweep
from qmlab.qmring import Q, delta_poly

points = load_registry()

rep = sweep(Q, points["i"], 7, [2, 3], range(98, 106), "weak", form_id="E4")
print(rep.to_jsonl())
print("all required rows pass:", rep.all_passed())

# sharp mode needs m <= k - 2 and p >= 2k - 2; for E4 that means m <= 2
rep = sweep(Q, points["i"], 7, 2, range(98, 121), "sharp", form_id="E4")
print("sharp, 23 rows, failures:", len(rep.failures()))

# 5 splits in Q(i), so the theorems say nothing there and sweeps refuse to run
try:
    sweep(delta_poly(), points["i"], 5, 2, range(25, 30), "weak")
except HypothesisError as exc:
    print("rejected:", exc)

# conjecture mode runs anyway and flags the rows; 13 also splits in Q(i)
rep = sweep(Q, points["i"], 13, 1, range(169, 172), "conjecture", form_id="E4")
for r in rep.rows:
    print(r.n, r.valuation, r.passed, "hypotheses hold:", r.hypotheses)
