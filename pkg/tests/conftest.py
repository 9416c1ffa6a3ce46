"""Shared fixtures: the quantum-teleportation frame and clause set."""

import numpy as np
import pytest

from hdql import hilbert as hl
from hdql import syntax as sx
from hdql.signature import SignatureInstance


def make_teleport_signature(alpha: complex, beta: complex):
    """Teleportation of the qubit alpha|0> + beta|1> through a Bell pair.

    Returns (sig, axioms, start_term, goal) where the goal asserts that
    after any of the four measure-and-correct branches the protocol ends
    in a state satisfying p, and the axioms put p exactly on the four
    expected outcomes |ij> (x) |w>.
    """
    w = hl.vector([alpha, beta])
    bell = (hl.ket("00") + hl.ket("11")) / np.sqrt(2)
    unitaries = {
        "u0": hl.tensor_op(hl.CNOT, hl.identity(2)),
        "u1": hl.tensor_op(hl.H, hl.identity(4)),
        "s0": hl.identity(8),
        "s1": hl.tensor_op(hl.identity(4), hl.X),
        "d0": hl.identity(8),
        "d1": hl.tensor_op(hl.identity(4), hl.Z),
    }
    measurements = {
        f"q{i}{j}": hl.orthonormalize([hl.ket(f"{i}{j}0"), hl.ket(f"{i}{j}1")])
        for i in (0, 1) for j in (0, 1)
    }
    named = {"w0": hl.tensor(w, bell)}
    for i in (0, 1):
        for j in (0, 1):
            named[f"t{i}{j}"] = hl.tensor(hl.ket(f"{i}{j}"), w)
    sig = SignatureInstance(
        dim=8, unitaries=unitaries, measurements=measurements,
        named_vectors=named, props=frozenset({"p"}), closed_props=frozenset())

    axioms = [sx.At(sx.Name(f"t{i}{j}"), sx.Prop("p"))
              for i in (0, 1) for j in (0, 1)]
    branches = [
        sx.parse_action(f"u0 ; u1 ; q{i}{j} ; s{j} ; d{i}")
        for i in (0, 1) for j in (0, 1)
    ]
    union = branches[0]
    for b in branches[1:]:
        union = sx.AUnion(union, b)
    goal = sx.Nec(union, sx.Prop("p"))
    return sig, axioms, sx.Name("w0"), goal


@pytest.fixture
def teleport():
    return make_teleport_signature(0.6, 0.8)


def teleport_spec_text(alpha: complex, beta: complex,
                       with_valuation: bool = False) -> str:
    """Render the teleportation problem in the textual file format."""
    fmt = sx.format_complex

    def coords(v) -> str:
        return "(" + ", ".join(fmt(complex(c)) for c in v) + ")"

    w = hl.vector([alpha, beta])
    bell = (hl.ket("00") + hl.ket("11")) / np.sqrt(2)
    lines = ["# teleportation of one qubit through a Bell pair",
             "SPACE 8", "VECTORS",
             f"  w0 = {coords(hl.tensor(w, bell))}"]
    for i in (0, 1):
        for j in (0, 1):
            lines.append(f"  t{i}{j} = {coords(hl.tensor(hl.ket(f'{i}{j}'), w))}")
    lines += ["UNITARY",
              "  u0 = CNOT (x) I2",
              "  u1 = H (x) I4",
              "  s0 = I8",
              "  s1 = I4 (x) X",
              "  d0 = I8",
              "  d1 = I4 (x) Z",
              "MEASURE"]
    for i in (0, 1):
        for j in (0, 1):
            b0 = coords(hl.ket(f"{i}{j}0"))
            b1 = coords(hl.ket(f"{i}{j}1"))
            lines.append(f"  q{i}{j} = {{ {b0}, {b1} }}")
    lines += ["PROPS", "  p", "AXIOMS"]
    for i in (0, 1):
        for j in (0, 1):
            lines.append(f"  @(t{i}{j}) p")
    branches = " | ".join(f"u0;u1;q{i}{j};s{j};d{i}"
                          for i in (0, 1) for j in (0, 1))
    lines.append(f"GOAL AT w0 PROVE [{branches}] p")
    if with_valuation:
        lines += ["VALUATION", "  p = { t00, t01, t10, t11 }"]
    return "\n".join(lines) + "\n"
