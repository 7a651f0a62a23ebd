"""
Certifying the separation bound
===============================

Each depth n gets an exact certificate Delta_n <= eps_n from whichever of
s and t has a convergent denominator just below 2^n.
"""

import math

from overlapforge import EpsilonSpec, certify_delta, no_overlap_certificate, persist, run

state = run(EpsilonSpec("pow8"), 4)

# a few depths, showing which side does the work
for n in (1, 7, 22, 73, 241, 796):
    c = certify_delta(state, n)
    print(f"n={n:4d} side={c.side} m={c.m} log2(1/bound)={math.log2(c.bound.denominator):.6f}")

# all of them, as CSV
certs = [certify_delta(state, n) for n in range(1, state.certified_through + 1)]
print(persist.delta_csv(certs).splitlines()[:3])

# no rational relation t = (a/b)s + c/d with small coefficients
cert = no_overlap_certificate(state, 2**10)
print("no relation with |a|,|b|,|d| <= 1024; witness round", cert.witness_m)
print(cert.checks)
