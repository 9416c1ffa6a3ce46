"""The sentence language and its two evaluators.

Parses sentences from the concrete grammar, classifies them against the
basic / closed / clause fragments, and evaluates them both pointwise and
as subspaces.
"""

import numpy as np

from hdql import hilbert as hl
from hdql import syntax as sx
from hdql.semantics import FiniteVectors, QuantumModel, closed_extension, sat_at
from hdql.signature import SignatureInstance, classify_in

# One qubit, a Hadamard gate, one measurement, a closed proposition r.
k0, k1 = hl.basis_state(2, 0), hl.basis_state(2, 1)
sig = SignatureInstance(
    dim=2,
    unitaries={"h": hl.H, "x": hl.X},
    measurements={"m": hl.orthonormalize([k0])},
    named_vectors={"v0": k0, "v1": k1},
    props=frozenset({"p", "r"}),
    closed_props=frozenset({"r"}))

model = QuantumModel(sig, {
    "p": FiniteVectors((k0,)),
    "r": hl.orthonormalize([k0]),
})

# Parsing and printing round-trip; @ binds tighter than /\.
s = sx.parse("@(v0) p /\\ [h] ~r")
print("parsed:", sx.format_sentence(s))

# Kind flags drive which rules and evaluators apply.
for text in ["p", "~r /\\ r", "[m] r", "p => [h] p", "r ~> r"]:
    kind = classify_in(sig, sx.parse(text))
    print(f"{text!r}: basic={kind.is_basic} closed={kind.is_closed} "
          f"clause={kind.is_quantum_clause}")

# Pointwise evaluation, including store/retrieve and until.
plus = (k0 + k1) / np.sqrt(2)
print("p at |0>:", sat_at(model, k0, sx.parse("p")))
print("[m] p at |+>:", sat_at(model, plus, sx.parse("[m] p")))
print("store z . [x] !here(z) at |0>:",
      sat_at(model, k0, sx.parse("store z . [x] !here(z)")))
print("until(x, p, p) at |1>:", sat_at(model, k1, sx.parse("until(x, p, p)")))

# Closed sentences denote subspaces; the quantum connectives act on them.
for text in ["r", "~r", "[h] r", "r (+) ~r", "[x*] r"]:
    ext = closed_extension(model, sx.parse(text))
    print(f"extension of {text!r}: rank {ext.rank}")

# The Sasaki hook is the quantum implication: globally satisfied exactly
# when the antecedent's subspace is included in the consequent's.
print("r ~> r globally:",
      closed_extension(model, sx.parse("r ~> r")).rank == sig.dim)
print("~r ~> r globally:",
      closed_extension(model, sx.parse("~r ~> r")).rank == sig.dim)
