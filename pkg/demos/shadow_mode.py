"""
Running far ahead in shadow mode
================================

Convergent denominators grow too fast for exact integers after a handful of
rounds. Shadow mode keeps digits as powers of 8 and tracks log2 q_m in
rational brackets, so markers come out as small integer ranges.
"""

import time

from overlapforge import EpsilonSpec, no_overlap_certificate, run

eps = EpsilonSpec("pow8")
t0 = time.perf_counter()
sh = run(eps, 50, mode="shadow")
print(f"50 rounds in {time.perf_counter() - t0:.4f} s")

exact = run(eps, 4)
for m in range(2, 5):
    print(m, "exact L", exact.L[m - 2], "shadow", sh.L_range(m), "exact M", exact.M[m - 2], "shadow", sh.M_range(m))

# widths stay tiny, and the conservative check 2 L_hi < M_lo holds throughout
print("max widening:", max(max(w) for w in sh.widening()))
print("witness for B = 2^10000:", no_overlap_certificate(sh, 2**10000).witness_m)
print("log2 of last L:", sh.L_range(50)[0].bit_length())
