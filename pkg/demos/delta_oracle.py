"""
Brute-force separation at small depth
=====================================

Enumerate all 6^n points phi_w(0), sort them and take the closest pair,
with s and t known only up to a cylinder interval.
"""

from fractions import Fraction

from overlapforge import EpsilonSpec, certify_delta, run
from overlapforge.contfrac import cylinder_interval
from overlapforge.exact import RationalInterval
from overlapforge.ifs import delta_brute

state = run(EpsilonSpec("pow8"), 3)
s_enc = cylinder_interval(state.s_digits, state.s_table)
t_enc = cylinder_interval(state.t_digits, state.t_table)

# the enclosure of the true minimum sits below the certified bound
for n in range(1, 6):
    rep = delta_brute("half6", n, s_enc, t_enc)
    bound = certify_delta(state, n).bound
    print(n, float(rep.min_gap.lo), float(rep.min_gap.hi), float(bound), rep.min_gap.lo <= bound)

# rational parameters admit coincidences, and the minimum drops to zero
rep = delta_brute("half6", 3, RationalInterval.point(Fraction(1, 2)), RationalInterval.point(Fraction(1, 2)))
print("s = t = 1/2:", rep.min_gap, rep.attained_pair)
