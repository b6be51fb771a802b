"""
Taylor coefficients of modular forms at CM points
==================================================

The n-th non-holomorphic derivative of a modular form at a CM point is an
algebraic multiple of a period power.  For the points shipped with qmlab the
multiple is a rational number, computed here exactly.
"""

from qmlab.arith import factor_rational, padic_valuation
from qmlab.cmtaylor import load_registry, taylor_coeffs
from qmlab.qmring import Q, delta_poly

points = load_registry()
i, tau7 = points["i"], points["tau7"]

# E4 is the polynomial Q.  Its expansion at i starts 12, 0, 20, 0, ...
for t in taylor_coeffs(Q, i, range(6)):
    print(f"t_E4(i; {t.n}) = {t.value}")

# The discriminant at (1 + sqrt(-7))/2
for t in taylor_coeffs(delta_poly(), tau7, range(4)):
    print(f"t_delta(tau7; {t.n}) = {t.value}")

# Large n: a single derivative chain feeds every coefficient
big = taylor_coeffs(Q, i, [50, 170])
for t in big:
    print(f"\nt_E4(i; {t.n}) = {factor_rational(t.value)}")
    print("  valuations at 7, 11, 13:", [padic_valuation(t.value, p) for p in (7, 11, 13)])

# 7 is inert in Q(i), so high powers of 7 appear; 13 splits and nothing is forced.
