"""
Excluding exact overlaps
========================

A difference of two depth-n codes (a, b, c) is an exact overlap only if
a + b s + c t = 0. With interval enclosures for s and t we can rule every
such triple out, or print the ones we cannot.
"""

from fractions import Fraction

from overlapforge import EpsilonSpec, run
from overlapforge.contfrac import cylinder_interval
from overlapforge.exact import RationalInterval
from overlapforge.ifs import overlap_exclusion_search

state = run(EpsilonSpec("pow8"), 3)
s_enc = cylinder_interval(state.s_digits, state.s_table)
t_enc = cylinder_interval(state.t_digits, state.t_table)

for n in range(1, 6):
    res = overlap_exclusion_search("half6", n, s_enc, t_enc)
    print(f"depth {n}: {res.checked} triples, certified={res.certified}")

# a deliberately rational pair, where witnesses do appear
res = overlap_exclusion_search("half6", 2, RationalInterval.point(Fraction(1, 3)), RationalInterval.point(Fraction(2, 3)))
print("s=1/3, t=2/3:", res.certified, res.witnesses[:5])
