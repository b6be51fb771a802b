"""
Derivatives and the ideal (A^p, p)
==================================

A = E_{p-1} is congruent to 1 mod p.  Repeated derivatives of a quasimodular
form fall deeper into the ideal generated by A^p and p, and this is what
makes Taylor coefficients divisible by powers of p.
"""

from qmlab.padic import A_poly, ideal_valuation, is_modular_mod, reduce_poly
from qmlab.qmring import P, Q, R, delta_poly, derive_n, theta

p = 5
A = A_poly(p)
print("A =", A)

# D^5 A has every coefficient divisible by 5 ...
d5 = derive_n(A, 5)
print("D^5 A =", d5)
print("D^5 A mod 5 is zero:", reduce_poly(d5, p).is_zero())
# ... and lies in (A^5, 5) but not in its square
print("v(D^5 A) =", ideal_valuation(d5, p))

# p derivatives turn any form into a modular form mod p
for name, f in (("P", P), ("Q", Q), ("R", R), ("delta", delta_poly())):
    print(f"D^{p} {name} is P-free mod {p}:", is_modular_mod(derive_n(f, p), p))

# and D^p f agrees with A * theta(f) mod p
print("D^5 R == A theta(R) mod 5:", reduce_poly(derive_n(R, 5), p) == reduce_poly(A * theta(R, p), p))

# valuations grow with the number of derivatives
for n in (5, 25, 50, 75):
    print(f"v(D^{n} delta) =", ideal_valuation(derive_n(delta_poly(), n), p))
