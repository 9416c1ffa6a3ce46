"""Initial models: the least valuation making a clause set true.

Builds the model whose regions hold exactly the derivable facts, shows
the three-valued query interface, and tests minimality against a model
with a strictly larger valuation.
"""

import numpy as np

from hdql import hilbert as hl
from hdql import syntax as sx
from hdql.initial_model import build_initial, check_minimality, holds
from hdql.semantics import FiniteVectors, QuantumModel
from hdql.signature import SignatureInstance

k0, k1 = hl.basis_state(2, 0), hl.basis_state(2, 1)
sig = SignatureInstance(
    dim=2,
    unitaries={"h": hl.H, "x": hl.X},
    measurements={"m": hl.orthonormalize([k0])},
    named_vectors={"v0": k0, "v1": k1},
    props=frozenset({"p", "r"}),
    closed_props=frozenset({"r"}))

# p is forced along a gate chain; the closed r is generated by two states.
gamma = [
    sx.parse("@(v0) [h] p"),
    sx.parse("@(v0) r"),
    sx.parse("@(v1) r"),
]
im = build_initial(sig, gamma, depth=4)
print("term universe:", len(im.term_universe), "states")

region_p = im.model.valuation["p"]
print("p holds at", len(region_p.vectors), "state(s):")
for v in region_p.vectors:
    print("  ", np.round(v, 6))

# r is closed, so its region is the span of its generators: everything.
print("r region rank:", im.model.valuation["r"].rank)

# Three-valued queries; closed propositions answer by span membership.
print("p at h(v0):", holds(im, "p", sx.parse_term("h(v0)")))
print("p at v1:", holds(im, "p", sx.parse_term("v1")))
print("r at 0.3*v0 + 2*v1:", holds(im, "r", sx.parse_term("0.3*v0 + 2*v1")))

# Minimality: any other model satisfying the clauses carries at least the
# derivable facts. A larger valuation is fine ...
bigger = QuantumModel(sig, {
    "p": FiniteVectors(tuple(region_p.vectors) + (k1,)),
    "r": im.model.valuation["r"],
})
samples = [sx.parse_term(t) for t in ["v0", "v1", "h(v0)"]]
print("bigger model dominates the initial one:",
      check_minimality(im, bigger, samples))

# ... but a model that drops a required fact fails the precondition.
from hdql.errors import PreconditionFailure
smaller = QuantumModel(sig, {"p": FiniteVectors(()),
                             "r": im.model.valuation["r"]})
try:
    check_minimality(im, smaller, samples)
except PreconditionFailure as e:
    print("smaller model rejected:", e)
