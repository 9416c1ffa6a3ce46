"""Closed subspaces: complements, sums, intersections, measurements.

Walks through the algebra that interprets quantum negation and
disjunction: orthocomplements, direct sums and the decomposition of any
state into a subspace component and its orthogonal rest.
"""

import numpy as np

from hdql import hilbert as hl

rng = np.random.default_rng(0)

# A qubit pair: C^4 with the computational basis |00>, |01>, |10>, |11>.
dim = 4
plus = (hl.ket("00") + hl.ket("11")) / np.sqrt(2)

# Span a subspace from raw vectors; near-duplicates collapse.
s = hl.orthonormalize([hl.ket("00"), plus, hl.ket("00") + 1e-14 * hl.ket("01")])
print("rank of span{|00>, |phi+>, |00> + noise}:", s.rank)

# The orthocomplement interprets quantum negation.
perp = hl.orthocomplement(s)
print("rank of the complement:", perp.rank)
print("complement is orthogonal:",
      all(abs(hl.inner(b, c)) < 1e-12 for b in s.basis for c in perp.basis))

# Any state splits into a component in s and a component in its complement.
w = hl.random_state(dim, rng)
recomposed = hl.project(s, w) + hl.project(perp, w)
print("projection decomposition residual:", hl.norm(recomposed - w))

# The lattice identities behind the logic: X + X^perp is everything,
# and the sum of two subspaces is the complement of the meet of their
# complements.
x = hl.random_subspace(dim, rng, rank=2)
y = hl.random_subspace(dim, rng, rank=1)
full = hl.direct_sum(x, hl.orthocomplement(x))
print("X + X^perp has rank:", full.rank)
via_comp = hl.orthocomplement(
    hl.intersect(hl.orthocomplement(x), hl.orthocomplement(y)))
print("De Morgan sum residual:",
      np.linalg.norm(hl.projector(hl.direct_sum(x, y)) - hl.projector(via_comp), 2))

# A projective measurement projects and renormalizes; orthogonal inputs
# collapse to the origin, which keeps the map total.
m = hl.orthonormalize([hl.ket("00"), hl.ket("01")])
print("measuring |phi+>:", np.round(hl.apply_measurement(m, plus), 6))
print("measuring an orthogonal state:",
      hl.apply_measurement(m, hl.ket("10")))
