"""
Similarity dimensions
=====================

log(number of maps) / log(1/ratio), compared exactly against 1.
"""

from overlapforge.ifs import similarity_dimension

for fam in ("half6", "eighth6", "half8"):
    res = similarity_dimension(fam)
    print(f"{fam:8s} {res.value!r:22s} {res.comparison} 1")
