"""Concrete signatures: a fixed frame plus named vectors and propositions.

A signature instance fixes the space dimension, the interpretation of every
unitary and measurement symbol, the named vector constants, and which
propositions are closed. The (infinite) positive diagram of the frame is
never materialized; ground equality is decided by evaluating both sides in
the frame and comparing within tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import hilbert as hl
from . import syntax as sx
from .errors import DimensionMismatch, MorphismError, SymbolError
from .hilbert import DEFAULT_TOL, Subspace

__all__ = [
    "SignatureInstance", "Violation", "Morphism", "identity_morphism",
    "eval_term", "diagram_eq", "diagram_residual", "validate",
    "apply_morphism", "classify_in",
]


@dataclass(frozen=True, eq=False)
class SignatureInstance:
    dim: int
    unitaries: dict[str, np.ndarray]
    measurements: dict[str, Subspace]
    named_vectors: dict[str, np.ndarray]
    props: frozenset[str]
    closed_props: frozenset[str]
    named_scalars: dict[str, complex] = field(default_factory=dict)
    tol: float = DEFAULT_TOL

    @property
    def action_symbols(self) -> frozenset[str]:
        return frozenset(self.unitaries) | frozenset(self.measurements)


@dataclass(frozen=True)
class Violation:
    symbol: str
    check: str
    residual: float

    def __str__(self) -> str:
        return f"{self.symbol}: {self.check} (residual {self.residual:.3e})"


def validate(sig: SignatureInstance) -> list[Violation]:
    """All invariant violations of the instance; empty iff well-formed."""
    out: list[Violation] = []
    if sig.dim < 1:
        out.append(Violation("<space>", "dimension must be positive", float(sig.dim)))
    if not (0.0 < sig.tol < 1.0):
        out.append(Violation("<tolerance>", "tolerance must lie in (0, 1)", sig.tol))
    for name, u in sig.unitaries.items():
        if u.shape != (sig.dim, sig.dim):
            out.append(Violation(name, "operator shape does not match the space", 0.0))
            continue
        r = hl.unitarity_residual(u)
        if r > sig.tol:
            out.append(Violation(name, "not unitary on max-norm check", r))
    for name, s in sig.measurements.items():
        if s.dim != sig.dim:
            out.append(Violation(name, "measurement subspace dim mismatch", 0.0))
            continue
        if s.rank > sig.dim:
            out.append(Violation(name, "basis larger than the space", float(s.rank)))
        if s.rank:
            gram = s.basis.conj() @ s.basis.T
            r = float(np.max(np.abs(gram - np.eye(s.rank))))
            if r > sig.tol:
                out.append(Violation(name, "basis not orthonormal", r))
    for name, v in sig.named_vectors.items():
        if v.shape != (sig.dim,):
            out.append(Violation(name, "named vector dim mismatch", 0.0))
        elif not np.all(np.isfinite(v.view(float))):
            out.append(Violation(name, "named vector has non-finite entries", np.inf))
    for extra in sig.closed_props - sig.props:
        out.append(Violation(extra, "closed proposition not declared in props", 0.0))
    return out


def classify_in(sig: SignatureInstance, s: sx.Sentence) -> sx.Kind:
    return sx.classify(s, sig.closed_props, frozenset(sig.measurements))


def eval_term(sig: SignatureInstance, k: sx.Term) -> np.ndarray:
    """Evaluate a ground term in the frame."""
    if isinstance(k, sx.Origin):
        return np.zeros(sig.dim, dtype=complex)
    if isinstance(k, sx.Var):
        raise SymbolError(f"free variable {k.name!r} in term")
    if isinstance(k, sx.Name):
        try:
            return sig.named_vectors[k.name]
        except KeyError:
            raise SymbolError(f"unknown vector constant {k.name!r}") from None
    if isinstance(k, sx.VecLit):
        v = hl.vector(k.coords)
        if v.shape[0] != sig.dim:
            raise DimensionMismatch(
                f"literal of dim {v.shape[0]} in space of dim {sig.dim}")
        return v
    if isinstance(k, sx.TSum):
        return eval_term(sig, k.left) + eval_term(sig, k.right)
    if isinstance(k, sx.TSmul):
        return k.scalar * eval_term(sig, k.arg)
    if isinstance(k, sx.TApp):
        arg = eval_term(sig, k.arg)
        if k.sym in sig.unitaries:
            return sig.unitaries[k.sym] @ arg
        if k.sym in sig.measurements:
            return hl.apply_measurement(sig.measurements[k.sym], arg, tol=sig.tol)
        raise SymbolError(f"unknown operation symbol {k.sym!r}")
    raise TypeError(f"not a term: {k!r}")


def diagram_residual(sig: SignatureInstance, k1: sx.Term, k2: sx.Term) -> float:
    """Scaled distance between the two evaluations."""
    v1, v2 = eval_term(sig, k1), eval_term(sig, k2)
    return hl.norm(v1 - v2) / max(1.0, hl.norm(v1))


def diagram_eq(sig: SignatureInstance, k1: sx.Term, k2: sx.Term) -> bool:
    """Decidable stand-in for 'k1 = k2 belongs to the positive diagram'."""
    return diagram_residual(sig, k1, k2) <= sig.tol


# ------------------------------------------------------------- morphisms

@dataclass(frozen=True, eq=False)
class Morphism:
    """Injective symbol renaming between signatures, identity on the frame."""

    source: SignatureInstance
    target: SignatureInstance
    unitaries: dict[str, str] = field(default_factory=dict)
    measurements: dict[str, str] = field(default_factory=dict)
    vectors: dict[str, str] = field(default_factory=dict)
    props: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        """Raise MorphismError unless injective, well-typed, frame-preserving."""
        for label, m in (("unitary", self.unitaries), ("measurement", self.measurements),
                         ("vector", self.vectors), ("prop", self.props)):
            if len(set(m.values())) != len(m):
                raise MorphismError(f"{label} map is not injective")
        if self.source.dim != self.target.dim:
            raise MorphismError("morphisms must preserve the Hilbert part")
        for a, b in self.unitaries.items():
            if b not in self.target.unitaries:
                raise MorphismError(f"unitary image {b!r} missing in target")
            if not np.allclose(self.source.unitaries[a], self.target.unitaries[b],
                               atol=self.source.tol):
                raise MorphismError(f"frame data changed for unitary {a!r}")
        for a, b in self.measurements.items():
            if b not in self.target.measurements:
                raise MorphismError(f"measurement image {b!r} missing in target")
            s, t = self.source.measurements[a], self.target.measurements[b]
            if np.max(np.abs(hl.projector(s) - hl.projector(t))) > 1e-7:
                raise MorphismError(f"frame data changed for measurement {a!r}")
        for a, b in self.vectors.items():
            if b not in self.target.named_vectors:
                raise MorphismError(f"vector image {b!r} missing in target")
            if not np.allclose(self.source.named_vectors[a],
                               self.target.named_vectors[b], atol=self.source.tol):
                raise MorphismError(f"frame data changed for vector {a!r}")
        for a, b in self.props.items():
            if b not in self.target.props:
                raise MorphismError(f"prop image {b!r} missing in target")
            if a in self.source.closed_props and b not in self.target.closed_props:
                raise MorphismError(f"closed prop {a!r} mapped to non-closed {b!r}")

    def map_action_symbol(self, name: str) -> str:
        if name in self.unitaries:
            return self.unitaries[name]
        if name in self.measurements:
            return self.measurements[name]
        raise MorphismError(f"unmapped action symbol {name!r}")

    def map_prop(self, name: str) -> str:
        try:
            return self.props[name]
        except KeyError:
            raise MorphismError(f"unmapped proposition {name!r}") from None

    def map_vector(self, name: str) -> str:
        try:
            return self.vectors[name]
        except KeyError:
            raise MorphismError(f"unmapped vector constant {name!r}") from None


def identity_morphism(sig: SignatureInstance) -> Morphism:
    return Morphism(sig, sig,
                    {u: u for u in sig.unitaries},
                    {q: q for q in sig.measurements},
                    {v: v for v in sig.named_vectors},
                    {p: p for p in sig.props})


def _rename_term(chi: Morphism, k: sx.Term) -> sx.Term:
    if isinstance(k, sx.Name):
        return sx.Name(chi.map_vector(k.name))
    if isinstance(k, sx.TSum):
        return sx.TSum(_rename_term(chi, k.left), _rename_term(chi, k.right))
    if isinstance(k, sx.TSmul):
        return sx.TSmul(k.scalar, _rename_term(chi, k.arg))
    if isinstance(k, sx.TApp):
        return sx.TApp(chi.map_action_symbol(k.sym), _rename_term(chi, k.arg))
    return k


def _rename_action(chi: Morphism, a: sx.Action) -> sx.Action:
    if isinstance(a, sx.ASym):
        return sx.ASym(chi.map_action_symbol(a.name))
    if isinstance(a, sx.AComp):
        return sx.AComp(_rename_action(chi, a.left), _rename_action(chi, a.right))
    if isinstance(a, sx.AUnion):
        return sx.AUnion(_rename_action(chi, a.left), _rename_action(chi, a.right))
    return sx.AStar(_rename_action(chi, a.body))


def _rename_sentence(chi: Morphism, s: sx.Sentence) -> sx.Sentence:
    if isinstance(s, sx.Prop):
        return sx.Prop(chi.map_prop(s.name))
    if isinstance(s, sx.Here):
        return sx.Here(_rename_term(chi, s.term))
    if isinstance(s, sx.At):
        return sx.At(_rename_term(chi, s.term), _rename_sentence(chi, s.body))
    if isinstance(s, sx.And):
        return sx.And(_rename_sentence(chi, s.left), _rename_sentence(chi, s.right))
    if isinstance(s, sx.Imp):
        return sx.Imp(_rename_sentence(chi, s.left), _rename_sentence(chi, s.right))
    if isinstance(s, sx.QImp):
        return sx.QImp(_rename_sentence(chi, s.left), _rename_sentence(chi, s.right))
    if isinstance(s, sx.OPlus):
        return sx.OPlus(_rename_sentence(chi, s.left), _rename_sentence(chi, s.right))
    if isinstance(s, sx.Not):
        return sx.Not(_rename_sentence(chi, s.body))
    if isinstance(s, sx.QNot):
        return sx.QNot(_rename_sentence(chi, s.body))
    if isinstance(s, sx.Nec):
        return sx.Nec(_rename_action(chi, s.action), _rename_sentence(chi, s.body))
    if isinstance(s, sx.Pos):
        return sx.Pos(_rename_action(chi, s.action), _rename_sentence(chi, s.body))
    if isinstance(s, sx.Store):
        return sx.Store(s.var, _rename_sentence(chi, s.body))
    if isinstance(s, sx.UntilS):
        return sx.UntilS(_rename_action(chi, s.action),
                         _rename_sentence(chi, s.first),
                         _rename_sentence(chi, s.second))
    raise TypeError(f"not a sentence: {s!r}")


def apply_morphism(chi: Morphism, x):
    """Homomorphic renaming of a term, action, sentence, or proof tree."""
    chi.validate()
    if isinstance(x, sx.Sentence):
        return _rename_sentence(chi, x)
    if isinstance(x, sx.Action):
        return _rename_action(chi, x)
    if isinstance(x, sx.Term):
        return _rename_term(chi, x)
    from .calculus import ProofTree, rename_proof
    if isinstance(x, ProofTree):
        return rename_proof(chi, x)
    raise TypeError(f"cannot apply a morphism to {type(x).__name__}")
