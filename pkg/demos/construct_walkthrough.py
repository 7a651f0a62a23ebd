"""
Building the parameters s and t
===============================

Digits are chosen round by round so that s and t are extremely well
approximated by rationals, each one covering the depths the other leaves open.
"""

# the tolerance sequence eps_n = 8^-n, and four rounds of digit selection
from overlapforge import EpsilonSpec, run

eps = EpsilonSpec("pow8")
state = run(eps, 4)

# digits of s and t; huge powers of 8 stay symbolic
print("s digits:", state.s_digits.digits)
print("t digits:", state.t_digits.digits)

# scale markers: q_m sits between 2^(L-1) - 1 and 2^L - 1
for m in range(2, state.rounds + 1):
    L, M = state.L[m - 2], state.M[m - 2]
    print(f"round {m}: L={L:5d}  M={M:5d}  2L < M: {2 * L < M}")

# roughly threefold growth per round
print("bits of q_4:", state.s_table.Q(4).bit_length())
