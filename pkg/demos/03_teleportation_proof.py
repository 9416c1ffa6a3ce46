"""End-to-end case study: a formal proof that teleportation works.

Alice holds an unknown qubit w and half of a Bell pair; Bob holds the
other half. The clause set puts proposition p exactly on the four
acceptable outcomes |ij> (x) |w|. The goal says: after every
measure-and-correct branch, p holds. The prover finds the derivation,
the kernel re-checks it, and the trace serializes deterministically.
"""

import numpy as np

from hdql import hilbert as hl
from hdql import syntax as sx
from hdql.calculus import ProofSession, RuleId, check_proof, proof_nodes, used_premises
from hdql.signature import SignatureInstance, diagram_residual
from hdql.specfile import serialize_trace

alpha, beta = 0.6, 0.8
w = hl.vector([alpha, beta])
bell = (hl.ket("00") + hl.ket("11")) / np.sqrt(2)

sig = SignatureInstance(
    dim=8,
    unitaries={
        "u0": hl.tensor_op(hl.CNOT, hl.identity(2)),   # Alice entangles
        "u1": hl.tensor_op(hl.H, hl.identity(4)),      # and rotates
        "s0": hl.identity(8),                          # Bob's corrections
        "s1": hl.tensor_op(hl.identity(4), hl.X),
        "d0": hl.identity(8),
        "d1": hl.tensor_op(hl.identity(4), hl.Z),
    },
    measurements={
        f"q{i}{j}": hl.orthonormalize([hl.ket(f"{i}{j}0"), hl.ket(f"{i}{j}1")])
        for i in (0, 1) for j in (0, 1)
    },
    named_vectors={"w0": hl.tensor(w, bell),
                   **{f"t{i}{j}": hl.tensor(hl.ket(f"{i}{j}"), w)
                      for i in (0, 1) for j in (0, 1)}},
    props=frozenset({"p"}), closed_props=frozenset())

axioms = [sx.parse(f"@(t{i}{j}) p") for i in (0, 1) for j in (0, 1)]
goal = sx.parse("[u0;u1;q00;s0;d0 | u0;u1;q01;s1;d0"
                " | u0;u1;q10;s0;d1 | u0;u1;q11;s1;d1] p")

session = ProofSession(sig, axioms)
result = session.prove(sx.Name("w0"), goal)
print("prover verdict:", result.status)

tree = result.tree
print("kernel verdict:", check_proof(sig, tree).ok)
print("proof size:", sum(1 for _ in proof_nodes(tree)), "nodes")

# Each branch closes on a diagram equality: the five-gate chain applied
# to the start state lands exactly on one of the named outcomes.
for node in proof_nodes(tree):
    if node.rule is RuleId.EQ:
        chain = node.premises[0].conclusion.k
        target = node.conclusion.k
        print(f"  EQ: {sx.format_term(target)} == chain, residual "
              f"{diagram_residual(sig, chain, target):.2e}")

# Compactness in action: the derivation consumes exactly the four axioms.
print("used premises:")
for used in used_premises(tree):
    print("  ", sx.format_sentence(used))

print()
print(serialize_trace(tree.conclusion.gamma, tree)[:600] + "...")
