"""
Supersingular j-invariants two ways
===================================

E_{p-1} factors as a power of the discriminant, powers of Q and R, and a
polynomial in j.  Reducing that polynomial mod p gives the supersingular
polynomial.  Counting points on curves over F_p finds the same roots.
"""

from qmlab.arith import primes_up_to
from qmlab.cmtaylor import legendre_applicable, load_registry
from qmlab.ssing import brute_force_supersingular, j_mod_p, kz_decompose, ss_poly

for p in (13, 23, 37):
    kz = kz_decompose(p)
    print(f"p = {p}: n={kz.n} delta={kz.delta} epsilon={kz.epsilon} ftilde coefficients {kz.ftilde}")
    print(f"  ss_{p}(j) = {ss_poly(p)} (mod {p}), roots {ss_poly(p).roots()}")
    print(f"  point counting finds {brute_force_supersingular(p)}")

agree = all(ss_poly(p).roots() == brute_force_supersingular(p) for p in primes_up_to(100) if p >= 5)
print("\nall primes 5..97 agree:", agree)

# A CM point whose field is not split at p has supersingular reduction
for pt in load_registry().values():
    for p in (5, 7, 11):
        if legendre_applicable(pt.d, p):
            j = j_mod_p(pt.triple, p)
            print(f"{pt.name}: j = {j} mod {p}, ss_{p}(j) = {ss_poly(p)(j)}")
