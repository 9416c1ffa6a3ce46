"""Sequent calculus: proof objects, a trusted checking kernel, and a prover.

Proof trees are plain data; ``check_proof`` re-validates every node against
its rule schema, recomputing all numeric side conditions (diagram equality,
span membership, orbit closure), so anything the prover emits is
independently certified. The prover is a deterministic backward chainer:
right rules decompose the goal, a forward saturation pass turns the clause
set into atomic facts, and closed propositions close under origin, scalar
multiples, sums and finite-basis spans.

The infinitary star introduction is replaced by a bounded instance that
carries an orbit-closure certificate; the infinitary Cauchy rule is
replaced by the finite-basis span rule. There is no cut rule.

One refinement to the documented rule order: a goal that is literally a
member of the clause set is closed by a one-node Monotonicity proof before
any decomposition is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import hilbert as hl
from . import syntax as sx
from .errors import BudgetExceeded, ProofError
from .semantics import QuantumModel, StarBudget, successors
from .signature import (Morphism, SignatureInstance, classify_in, diagram_eq,
                        diagram_residual, eval_term)
from .syntax import (AComp, ASym, AStar, AUnion, And, At, Imp, Nec, Origin,
                     Prop, QImp, Store, TApp, TSmul, TSum)

__all__ = [
    "RuleId", "Sequent", "ProofTree", "CheckResult", "ProveResult",
    "SearchBudget", "ProofSession", "check_proof", "prove", "used_premises",
    "restrict_premises", "rename_proof", "proof_nodes",
]


class RuleId(Enum):
    MONOTONICITY = "Monotonicity"
    UNIONS = "Unions"
    TRANSLATION = "Translation"
    ORIGIN = "Origin"
    MULT = "Mult"
    ADD = "Add"
    SPAN_CLOSURE = "SpanClosure"
    EQ = "EQ"
    RET_I = "RetI"
    RET_E = "RetE"
    STORE_I = "StoreI"
    STORE_E = "StoreE"
    CONJ_I = "ConjI"
    CONJ_E = "ConjE"
    FT_I = "FTI"
    FT_E = "FTE"
    COMP_I = "CompI"
    COMP_E = "CompE"
    UNION_I = "UnionI"
    UNION_E = "UnionE"
    STAR_I_BOUNDED = "StarI"
    STAR_E = "StarE"
    MP = "MP"
    MP_C = "MPc"
    IMP = "Imp"
    IMP_C = "ImpC"


@dataclass(frozen=True)
class Sequent:
    gamma: tuple[sx.Sentence, ...]
    k: sx.Term
    goal: sx.Sentence


@dataclass(frozen=True, eq=False)
class ProofTree:
    conclusion: Sequent
    rule: RuleId
    premises: tuple["ProofTree", ...] = ()
    certificate: "int | Morphism | None" = None


def proof_nodes(t: ProofTree):
    yield t
    for p in t.premises:
        yield from proof_nodes(p)


@dataclass(frozen=True)
class SearchBudget:
    """Caps for the prover: node count, star bounds, universe depth."""
    max_nodes: int = 10 ** 6
    star: StarBudget = StarBudget()
    depth: int = 6


# --------------------------------------------------------------- the kernel

@dataclass(frozen=True)
class CheckResult:
    ok: bool
    path: tuple[int, ...] = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _star_action(a: sx.Action, n: int) -> sx.Action:
    return a if n == 1 else AComp(a, _star_action(a, n - 1))


def _star_power(a: sx.Action, n: int, body: sx.Sentence) -> sx.Sentence:
    return body if n == 0 else Nec(_star_action(a, n), body)


def _orbit(sig: SignatureInstance, action: sx.Action, w: np.ndarray,
           budget: StarBudget) -> tuple[list[np.ndarray], int, bool]:
    """Layers of the successor orbit: (states seen, expansion rounds, closed)."""
    model = QuantumModel(sig, {})
    seen = [w]
    frontier = [w]
    for i in range(1, budget.max_iterations + 1):
        fresh: list[np.ndarray] = []
        complete = True
        for v in frontier:
            step = successors(model, action, v, budget)
            complete = complete and step.complete
            for s in step.vectors:
                bound = budget.tol * max(1.0, hl.norm(s))
                if all(hl.norm(s - o) > bound for o in seen) and \
                        all(hl.norm(s - o) > bound for o in fresh):
                    fresh.append(s)
        if not complete:
            return seen, i, False
        if not fresh:
            return seen, i - 1, True
        seen.extend(fresh)
        frontier = fresh
    return seen, budget.max_iterations, False


def check_proof(sig: SignatureInstance, tree: ProofTree,
                budget: StarBudget = StarBudget()) -> CheckResult:
    """Re-validate every node of a proof tree against its rule schema."""
    try:
        return _check(sig, tree, budget, ())
    except BudgetExceeded as e:
        return CheckResult(False, (), f"budget exceeded: {e}")


def _bad(path, reason) -> CheckResult:
    return CheckResult(False, path, reason)


def _closed_prop(sig, goal) -> bool:
    return isinstance(goal, Prop) and goal.name in sig.closed_props


def _check(sig: SignatureInstance, t: ProofTree, budget: StarBudget,
           path: tuple[int, ...]) -> CheckResult:
    gamma, k, goal = t.conclusion.gamma, t.conclusion.k, t.conclusion.goal
    rule = t.rule
    prem = t.premises

    def arity(n: int) -> CheckResult | None:
        if len(prem) != n:
            return _bad(path, f"{rule.value} expects {n} premises, got {len(prem)}")
        return None

    def same_context(p: ProofTree) -> bool:
        return p.conclusion.gamma == gamma

    if rule is RuleId.MONOTONICITY:
        if bad := arity(0):
            return bad
        if goal not in gamma:
            return _bad(path, "Monotonicity: goal is not a member of the clause set")
    elif rule is RuleId.UNIONS:
        if bad := arity(1):
            return bad
        p = prem[0].conclusion
        if p.goal != goal or p.k != k or not set(p.gamma) <= set(gamma):
            return _bad(path, "Unions: premise is not over a subset of the clause set")
    elif rule is RuleId.TRANSLATION:
        if bad := arity(1):
            return bad
        chi = t.certificate
        if not isinstance(chi, Morphism):
            return _bad(path, "Translation: certificate must be a morphism")
        try:
            chi.validate()
            p = prem[0].conclusion
            from .signature import apply_morphism
            renamed = Sequent(tuple(apply_morphism(chi, g) for g in p.gamma),
                              apply_morphism(chi, p.k), apply_morphism(chi, p.goal))
        except Exception as e:
            return _bad(path, f"Translation: {e}")
        if renamed != t.conclusion:
            return _bad(path, "Translation: conclusion is not the renamed premise")
        return _check(chi.source, prem[0], budget, path + (0,))
    elif rule is RuleId.ORIGIN:
        if bad := arity(0):
            return bad
        if not _closed_prop(sig, goal):
            return _bad(path, "Origin: goal must be a closed proposition")
        if not diagram_eq(sig, k, Origin()):
            return _bad(path, "Origin: term does not denote the origin vector")
    elif rule is RuleId.MULT:
        if bad := arity(1):
            return bad
        if not _closed_prop(sig, goal):
            return _bad(path, "Mult: goal must be a closed proposition")
        if not isinstance(k, TSmul):
            return _bad(path, "Mult: conclusion term is not a scalar multiple")
        p = prem[0].conclusion
        if not same_context(prem[0]) or p.goal != goal or p.k != k.arg:
            return _bad(path, "Mult: premise does not match the multiplicand")
    elif rule is RuleId.ADD:
        if bad := arity(2):
            return bad
        if not _closed_prop(sig, goal):
            return _bad(path, "Add: goal must be a closed proposition")
        if not isinstance(k, TSum):
            return _bad(path, "Add: conclusion term is not a sum")
        p1, p2 = prem[0].conclusion, prem[1].conclusion
        if not (same_context(prem[0]) and same_context(prem[1])
                and p1.goal == goal and p2.goal == goal
                and p1.k == k.left and p2.k == k.right):
            return _bad(path, "Add: premises do not match the summands")
    elif rule is RuleId.SPAN_CLOSURE:
        if not _closed_prop(sig, goal):
            return _bad(path, "SpanClosure: goal must be a closed proposition")
        vecs = []
        for i, p in enumerate(prem):
            if not same_context(p) or p.conclusion.goal != goal:
                return _bad(path, f"SpanClosure: premise {i} proves something else")
            vecs.append(eval_term(sig, p.conclusion.k))
        if vecs:
            gram = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
            if np.max(np.abs(gram - np.eye(len(vecs)))) > max(sig.tol, 1e-10):
                return _bad(path, "SpanClosure: premise family is not orthonormal")
        span = (hl.Subspace(sig.dim, np.array(vecs)) if vecs
                else hl.zero_subspace(sig.dim))
        if not hl.member(span, eval_term(sig, k), sig.tol):
            return _bad(path, "SpanClosure: conclusion vector lies outside the span")
    elif rule is RuleId.EQ:
        if bad := arity(1):
            return bad
        p = prem[0].conclusion
        if not same_context(prem[0]) or p.goal != goal:
            return _bad(path, "EQ: premise proves a different sentence")
        if not diagram_eq(sig, p.k, k):
            return _bad(path,
                        f"EQ: terms are not diagram-equal "
                        f"(residual {diagram_residual(sig, p.k, k):.3e})")
    elif rule is RuleId.RET_I:
        if bad := arity(1):
            return bad
        if not isinstance(goal, At):
            return _bad(path, "RetI: goal is not a retrieve sentence")
        p = prem[0].conclusion
        if not same_context(prem[0]) or p.k != goal.term or p.goal != goal.body:
            return _bad(path, "RetI: premise does not prove the body at the named term")
    elif rule is RuleId.RET_E:
        if bad := arity(1):
            return bad
        p = prem[0].conclusion
        if not isinstance(p.goal, At):
            return _bad(path, "RetE: premise is not a retrieve sentence")
        if not same_context(prem[0]) or p.goal.term != k or p.goal.body != goal:
            return _bad(path, "RetE: conclusion does not move to the named term")
    elif rule is RuleId.STORE_I:
        if bad := arity(1):
            return bad
        if not isinstance(goal, Store):
            return _bad(path, "StoreI: goal is not a store sentence")
        p = prem[0].conclusion
        want = sx.substitute(goal.body, goal.var, k)
        if not same_context(prem[0]) or p.k != k or p.goal != want:
            return _bad(path, "StoreI: premise is not the instantiated body")
    elif rule is RuleId.STORE_E:
        if bad := arity(1):
            return bad
        p = prem[0].conclusion
        if not isinstance(p.goal, Store):
            return _bad(path, "StoreE: premise is not a store sentence")
        want = sx.substitute(p.goal.body, p.goal.var, k)
        if not same_context(prem[0]) or p.k != k or goal != want:
            return _bad(path, "StoreE: conclusion is not the instantiated body")
    elif rule is RuleId.CONJ_I:
        if bad := arity(2):
            return bad
        if not isinstance(goal, And):
            return _bad(path, "ConjI: goal is not a conjunction")
        p1, p2 = prem[0].conclusion, prem[1].conclusion
        if not (same_context(prem[0]) and same_context(prem[1])
                and p1.k == k and p2.k == k
                and p1.goal == goal.left and p2.goal == goal.right):
            return _bad(path, "ConjI: premises do not match the conjuncts")
    elif rule is RuleId.CONJ_E:
        if bad := arity(1):
            return bad
        p = prem[0].conclusion
        if not isinstance(p.goal, And):
            return _bad(path, "ConjE: premise is not a conjunction")
        if not same_context(prem[0]) or p.k != k or goal not in (p.goal.left, p.goal.right):
            return _bad(path, "ConjE: conclusion is not a conjunct of the premise")
    elif rule is RuleId.FT_I:
        if bad := arity(1):
            return bad
        if not (isinstance(goal, Nec) and isinstance(goal.action, ASym)):
            return _bad(path, "FTI: goal is not a single-symbol necessity")
        f = goal.action.name
        if f not in sig.unitaries and f not in sig.measurements:
            return _bad(path, f"FTI: unknown operation symbol {f!r}")
        p = prem[0].conclusion
        if not same_context(prem[0]) or p.k != TApp(f, k) or p.goal != goal.body:
            return _bad(path, "FTI: premise is not the body at the advanced term")
    elif rule is RuleId.FT_E:
        if bad := arity(1):
            return bad
        p = prem[0].conclusion
        if not (isinstance(p.goal, Nec) and isinstance(p.goal.action, ASym)):
            return _bad(path, "FTE: premise is not a single-symbol necessity")
        f = p.goal.action.name
        if f not in sig.unitaries and f not in sig.measurements:
            return _bad(path, f"FTE: unknown operation symbol {f!r}")
        if not same_context(prem[0]) or k != TApp(f, p.k) or goal != p.goal.body:
            return _bad(path, "FTE: conclusion is not the body at the advanced term")
    elif rule is RuleId.COMP_I:
        if bad := arity(1):
            return bad
        p = prem[0].conclusion
        if not (isinstance(p.goal, Nec) and isinstance(p.goal.action, AComp)):
            return _bad(path, "CompI: premise is not a composition necessity")
        a = p.goal.action
        if not same_context(prem[0]) or p.k != k or \
                goal != Nec(a.left, Nec(a.right, p.goal.body)):
            return _bad(path, "CompI: conclusion is not the nested form")
    elif rule is RuleId.COMP_E:
        if bad := arity(1):
            return bad
        if not (isinstance(goal, Nec) and isinstance(goal.action, AComp)):
            return _bad(path, "CompE: goal is not a composition necessity")
        a = goal.action
        p = prem[0].conclusion
        if not same_context(prem[0]) or p.k != k or \
                p.goal != Nec(a.left, Nec(a.right, goal.body)):
            return _bad(path, "CompE: premise is not the nested form")
    elif rule is RuleId.UNION_I:
        if bad := arity(2):
            return bad
        if not (isinstance(goal, Nec) and isinstance(goal.action, AUnion)):
            return _bad(path, "UnionI: goal is not a union necessity")
        a = goal.action
        p1, p2 = prem[0].conclusion, prem[1].conclusion
        if not (same_context(prem[0]) and same_context(prem[1])
                and p1.k == k and p2.k == k
                and p1.goal == Nec(a.left, goal.body)
                and p2.goal == Nec(a.right, goal.body)):
            return _bad(path, "UnionI: premises do not match the branches")
    elif rule is RuleId.UNION_E:
        if bad := arity(1):
            return bad
        p = prem[0].conclusion
        if not (isinstance(p.goal, Nec) and isinstance(p.goal.action, AUnion)):
            return _bad(path, "UnionE: premise is not a union necessity")
        a = p.goal.action
        wanted = (Nec(a.left, p.goal.body), Nec(a.right, p.goal.body))
        if not same_context(prem[0]) or p.k != k or goal not in wanted:
            return _bad(path, "UnionE: conclusion is not one of the branches")
    elif rule is RuleId.STAR_E:
        if bad := arity(1):
            return bad
        p = prem[0].conclusion
        if not (isinstance(p.goal, Nec) and isinstance(p.goal.action, AStar)):
            return _bad(path, "StarE: premise is not a star necessity")
        n = t.certificate
        if not isinstance(n, int) or n < 0:
            return _bad(path, "StarE: certificate must be a natural number")
        if not same_context(prem[0]) or p.k != k or \
                goal != _star_power(p.goal.action.body, n, p.goal.body):
            return _bad(path, f"StarE: conclusion is not the {n}-fold unrolling")
    elif rule is RuleId.STAR_I_BOUNDED:
        if not (isinstance(goal, Nec) and isinstance(goal.action, AStar)):
            return _bad(path, "StarI: goal is not a star necessity")
        m = t.certificate
        if not isinstance(m, int) or m < 0 or len(prem) != m + 1:
            return _bad(path, "StarI: certificate does not match the premise count")
        body_action = goal.action.body
        for i, p in enumerate(prem):
            want = _star_power(body_action, i, goal.body)
            if not same_context(p) or p.conclusion.k != k or p.conclusion.goal != want:
                return _bad(path, f"StarI: premise {i} is not the {i}-fold unrolling")
        _, period, closed = _orbit(sig, body_action, eval_term(sig, k), budget)
        if not closed:
            return _bad(path, "StarI: successor orbit does not close within budget")
        if period > m:
            return _bad(path,
                        f"StarI: orbit closes after {period} rounds but only "
                        f"{m} are certified")
    elif rule is RuleId.MP:
        if bad := arity(2):
            return bad
        p1, p2 = prem[0].conclusion, prem[1].conclusion
        if not (isinstance(p1.goal, Imp) and p1.goal.right == goal
                and p1.goal.left == p2.goal
                and same_context(prem[0]) and same_context(prem[1])
                and p1.k == k and p2.k == k):
            return _bad(path, "MP: premises do not instantiate modus ponens")
        if not classify_in(sig, p1.goal.left).is_basic:
            return _bad(path, "MP: antecedent is not a basic sentence")
    elif rule is RuleId.MP_C:
        if bad := arity(2):
            return bad
        p1, p2 = prem[0].conclusion, prem[1].conclusion
        if not (isinstance(p1.goal, QImp) and p1.goal.right == goal
                and p1.goal.left == p2.goal
                and same_context(prem[0]) and same_context(prem[1])
                and p1.k == k and p2.k == k):
            return _bad(path, "MPc: premises do not instantiate quantum modus ponens")
        kind = classify_in(sig, p1.goal.left)
        if not (kind.is_basic and kind.is_closed):
            return _bad(path, "MPc: antecedent is not a closed basic sentence")
    elif rule is RuleId.IMP:
        if bad := arity(1):
            return bad
        if not isinstance(goal, Imp):
            return _bad(path, "Imp: goal is not an implication")
        if not classify_in(sig, goal.left).is_basic:
            return _bad(path, "Imp: antecedent is not a basic sentence")
        p = prem[0].conclusion
        if p.gamma != gamma + (At(k, goal.left),) or p.k != k or p.goal != goal.right:
            return _bad(path, "Imp: premise context is not the extended clause set")
    elif rule is RuleId.IMP_C:
        if bad := arity(1):
            return bad
        if not isinstance(goal, QImp):
            return _bad(path, "ImpC: goal is not a quantum implication")
        kind = classify_in(sig, goal.left)
        if not (kind.is_basic and kind.is_closed):
            return _bad(path, "ImpC: antecedent is not a closed basic sentence")
        p = prem[0].conclusion
        if p.gamma != gamma + (At(k, goal.left),) or p.k != k or p.goal != goal.right:
            return _bad(path, "ImpC: premise context is not the extended clause set")
    else:  # pragma: no cover - the enum is exhaustive
        return _bad(path, f"unknown rule {rule!r}")

    if rule is not RuleId.TRANSLATION:
        for i, p in enumerate(prem):
            sub = _check(sig, p, budget, path + (i,))
            if not sub.ok:
                return sub
    return CheckResult(True)


# --------------------------------------------------------------- the prover

@dataclass
class ProveResult:
    status: str  # "holds" | "fails" | "unknown"
    tree: ProofTree | None = None
    reason: str = ""

    @property
    def holds(self) -> bool:
        return self.status == "holds"


class _Counter:
    __slots__ = ("left",)

    def __init__(self, n: int):
        self.left = n

    def spend(self, n: int = 1) -> None:
        self.left -= n
        if self.left < 0:
            raise BudgetExceeded("prover node budget exhausted")


class _Saturation:
    """Forward elimination closure of a clause set over demand-driven terms.

    Facts are sequents (gamma |-^t s) keyed by (sentence, vector class);
    clauses themselves are available at every term via Monotonicity and
    are instantiated lazily at registered terms.
    """

    def __init__(self, sig: SignatureInstance, gamma: tuple[sx.Sentence, ...],
                 budget: SearchBudget, counter: _Counter):
        self.sig = sig
        self.gamma = gamma
        self.budget = budget
        self.counter = counter
        self.class_vecs: list[np.ndarray] = []
        self.class_terms: list[sx.Term] = []
        self.facts: dict[tuple[sx.Sentence, int], ProofTree] = {}
        self.universal: dict[sx.Sentence, object] = {}  # sentence -> builder(k)
        self.imps: list[tuple[sx.Sentence, object]] = []  # (imp, builder | tree)
        self.queue: list[tuple] = []
        self.fired: set[tuple[int, int]] = set()
        self.sites: list[int] = []  # class ids acting as instantiation sites
        self.span_dirty: set[str] = set()
        self.spans: dict[str, tuple] = {}  # r -> (basis rows, combos)
        self.incomplete = False
        for c in gamma:
            self._add_universal(c, self._mono_builder(c))

    # -- class table ------------------------------------------------------
    def intern(self, term: sx.Term) -> int:
        vec = eval_term(self.sig, term)
        for i, existing in enumerate(self.class_vecs):
            if hl.norm(vec - existing) <= self.sig.tol * max(1.0, hl.norm(existing)):
                return i
        self.class_vecs.append(vec)
        self.class_terms.append(term)
        return len(self.class_vecs) - 1

    def register_site(self, term: sx.Term) -> None:
        """Make a ground term (and its subterms) an instantiation site."""
        for sub in sx.subterms(term):
            cid = self.intern(sub)
            if cid not in self.sites:
                self.sites.append(cid)
                for s, builder in list(self.universal.items()):
                    self.queue.append(("inst", s, builder, self.class_terms[cid]))

    # -- fact bookkeeping ---------------------------------------------------
    def _mono_builder(self, c: sx.Sentence):
        def build(k: sx.Term) -> ProofTree:
            return ProofTree(Sequent(self.gamma, k, c), RuleId.MONOTONICITY)
        return build

    def _add_universal(self, s: sx.Sentence, builder) -> None:
        if s in self.universal:
            return
        self.universal[s] = builder
        if isinstance(s, (Imp, QImp)):
            self.imps.append((s, builder))
            return
        self.queue.append(("univ", s, builder))
        for cid in self.sites:
            self.queue.append(("inst", s, builder, self.class_terms[cid]))

    def add_fact(self, s: sx.Sentence, term: sx.Term, proof: ProofTree) -> None:
        cid = self.intern(term)
        key = (s, cid)
        if key in self.facts:
            return
        self.facts[key] = proof
        if isinstance(s, Prop) and s.name in self.sig.closed_props:
            self.span_dirty.add(s.name)
        if isinstance(s, (Imp, QImp)):
            self.imps.append((s, proof))
            return
        self.queue.append(("fact", s, term, proof))

    # -- elimination --------------------------------------------------------
    def drain(self) -> None:
        while self.queue:
            self.counter.spend()
            item = self.queue.pop()
            if item[0] == "univ":
                self._eliminate_universal(item[1], item[2])
            elif item[0] == "inst":
                self._instantiate(item[1], item[2], item[3])
            else:
                self._eliminate_fact(item[1], item[2], item[3])

    def _eliminate_universal(self, s: sx.Sentence, builder) -> None:
        gamma = self.gamma
        if isinstance(s, And):
            for side, part in (("left", s.left), ("right", s.right)):
                def build(k, _part=part, _s=s, _b=builder):
                    return ProofTree(Sequent(gamma, k, _part), RuleId.CONJ_E, (_b(k),))
                self._add_universal(part, build)
        elif isinstance(s, At):
            if sx.is_ground(s.term):
                premise = builder(s.term)
                self.add_fact(s.body, s.term, ProofTree(
                    Sequent(gamma, s.term, s.body), RuleId.RET_E, (premise,)))
        elif isinstance(s, Nec) and isinstance(s.action, AComp):
            a = s.action
            nested = Nec(a.left, Nec(a.right, s.body))

            def build(k, _n=nested, _b=builder):
                return ProofTree(Sequent(gamma, k, _n), RuleId.COMP_I, (_b(k),))
            self._add_universal(nested, build)
        elif isinstance(s, Nec) and isinstance(s.action, AUnion):
            a = s.action
            for part in (Nec(a.left, s.body), Nec(a.right, s.body)):
                def build(k, _p=part, _b=builder):
                    return ProofTree(Sequent(gamma, k, _p), RuleId.UNION_E, (_b(k),))
                self._add_universal(part, build)
        # single-symbol necessities, stores and star necessities only act
        # at concrete terms; they are expanded by _instantiate

    def _instantiate(self, s: sx.Sentence, builder, term: sx.Term) -> None:
        gamma = self.gamma
        if isinstance(s, Nec) and isinstance(s.action, ASym):
            advanced = TApp(s.action.name, term)
            proof = ProofTree(Sequent(gamma, advanced, s.body), RuleId.FT_E,
                              (builder(term),))
            self.add_fact(s.body, advanced, proof)
        elif isinstance(s, Store):
            inst = sx.substitute(s.body, s.var, term)
            proof = ProofTree(Sequent(gamma, term, inst), RuleId.STORE_E,
                              (builder(term),))
            self.add_fact(inst, term, proof)
        elif isinstance(s, Nec) and isinstance(s.action, AStar):
            self._unroll_star(s, builder, term)

    def _unroll_star(self, s: sx.Sentence, builder, term: sx.Term) -> None:
        before = len(self.facts)
        quiet = 0
        for n in range(self.budget.star.max_iterations + 1):
            self.counter.spend()
            inst = _star_power(s.action.body, n, s.body)
            proof = ProofTree(Sequent(self.gamma, term, inst), RuleId.STAR_E,
                              (builder(term),), certificate=n)
            self.add_fact(inst, term, proof)
            self.drain()
            if len(self.facts) == before:
                quiet += 1
                if quiet >= 2:
                    return
            else:
                quiet = 0
                before = len(self.facts)
        self.incomplete = True

    def _eliminate_fact(self, s: sx.Sentence, term: sx.Term, proof: ProofTree) -> None:
        gamma = self.gamma
        if isinstance(s, And):
            for part in (s.left, s.right):
                self.add_fact(part, term, ProofTree(
                    Sequent(gamma, term, part), RuleId.CONJ_E, (proof,)))
        elif isinstance(s, At):
            if sx.is_ground(s.term):
                self.add_fact(s.body, s.term, ProofTree(
                    Sequent(gamma, s.term, s.body), RuleId.RET_E, (proof,)))
        elif isinstance(s, Store):
            inst = sx.substitute(s.body, s.var, term)
            self.add_fact(inst, term, ProofTree(
                Sequent(gamma, term, inst), RuleId.STORE_E, (proof,)))
        elif isinstance(s, Nec):
            a = s.action
            if isinstance(a, ASym):
                advanced = TApp(a.name, term)
                self.add_fact(s.body, advanced, ProofTree(
                    Sequent(gamma, advanced, s.body), RuleId.FT_E, (proof,)))
            elif isinstance(a, AComp):
                nested = Nec(a.left, Nec(a.right, s.body))
                self.add_fact(nested, term, ProofTree(
                    Sequent(gamma, term, nested), RuleId.COMP_I, (proof,)))
            elif isinstance(a, AUnion):
                for part in (Nec(a.left, s.body), Nec(a.right, s.body)):
                    self.add_fact(part, term, ProofTree(
                        Sequent(gamma, term, part), RuleId.UNION_E, (proof,)))
            elif isinstance(a, AStar):
                self._unroll_star(s, lambda k, _p=proof: _adapt_eq(
                    self, _p, k), term)

    # -- spans for closed propositions ---------------------------------------
    def span_of(self, r: str):
        """Orthonormal basis of the provable span plus combination data."""
        if r in self.span_dirty or r not in self.spans:
            self.span_dirty.discard(r)
            entries = [(cid, proof) for (s, cid), proof in self.facts.items()
                       if isinstance(s, Prop) and s.name == r]
            vecs = [self.class_vecs[cid] for cid, _ in entries]
            if vecs:
                basis = hl.orthonormalize(vecs, dim=self.sig.dim, tol=self.sig.tol)
            else:
                basis = hl.zero_subspace(self.sig.dim)
            self.spans[r] = (basis, entries)
        return self.spans[r]

    def availability(self, imp_index: int, k: sx.Term):
        """A proof of the implication at term k, or None."""
        s, origin = self.imps[imp_index]
        if callable(origin):
            return origin(k)
        tree: ProofTree = origin
        if tree.conclusion.k == k:
            return tree
        if diagram_eq(self.sig, tree.conclusion.k, k):
            return ProofTree(Sequent(self.gamma, k, s), RuleId.EQ, (tree,))
        return None


def _adapt_eq(sat: _Saturation, proof: ProofTree, k: sx.Term) -> ProofTree:
    if proof.conclusion.k == k:
        return proof
    return ProofTree(Sequent(sat.gamma, k, proof.conclusion.goal), RuleId.EQ, (proof,))


class _Prover:
    def __init__(self, sig: SignatureInstance, gamma: tuple[sx.Sentence, ...],
                 budget: SearchBudget):
        self.sig = sig
        self.budget = budget
        self.counter = _Counter(budget.max_nodes)
        self.saturations: dict[tuple[sx.Sentence, ...], _Saturation] = {}
        self.root_gamma = gamma
        self.star_exhausted = False

    def saturation(self, gamma: tuple[sx.Sentence, ...]) -> _Saturation:
        sat = self.saturations.get(gamma)
        if sat is None:
            sat = _Saturation(self.sig, gamma, self.budget, self.counter)
            for c in gamma:
                for t in sx.sentence_terms(c):
                    if sx.is_ground(t):
                        sat.register_site(t)
            sat.drain()
            self.saturations[gamma] = sat
        return sat

    def saturate_sites(self, gamma: tuple[sx.Sentence, ...]) -> None:
        """Fire implications at every registered site until nothing changes."""
        sat = self.saturation(gamma)
        sat.drain()
        changed = True
        while changed:
            changed = False
            for idx, (imp, _) in enumerate(list(sat.imps)):
                for cid in list(sat.sites):
                    if (idx, cid) in sat.fired:
                        continue
                    self.counter.spend()
                    k = sat.class_terms[cid]
                    avail = sat.availability(idx, k)
                    if avail is None:
                        continue
                    ante = self.prove(gamma, k, imp.left, allow_mp=False)
                    if ante is None:
                        continue
                    sat.fired.add((idx, cid))
                    rule = RuleId.MP if isinstance(imp, Imp) else RuleId.MP_C
                    node = ProofTree(Sequent(gamma, k, imp.right), rule,
                                     (avail, ante))
                    sat.add_fact(imp.right, k, node)
                    changed = True
            sat.drain()

    def prove(self, gamma: tuple[sx.Sentence, ...], k: sx.Term,
              goal: sx.Sentence, allow_mp: bool = True) -> ProofTree | None:
        self.counter.spend()
        sat = self.saturation(gamma)
        if goal in gamma:
            return ProofTree(Sequent(gamma, k, goal), RuleId.MONOTONICITY)
        if isinstance(goal, And):
            left = self.prove(gamma, k, goal.left, allow_mp)
            if left is None:
                return None
            right = self.prove(gamma, k, goal.right, allow_mp)
            if right is None:
                return None
            return ProofTree(Sequent(gamma, k, goal), RuleId.CONJ_I, (left, right))
        if isinstance(goal, At):
            if not sx.is_ground(goal.term):
                return None
            inner = self.prove(gamma, goal.term, goal.body, allow_mp)
            if inner is None:
                return None
            return ProofTree(Sequent(gamma, k, goal), RuleId.RET_I, (inner,))
        if isinstance(goal, Store):
            inst = sx.substitute(goal.body, goal.var, k)
            inner = self.prove(gamma, k, inst, allow_mp)
            if inner is None:
                return None
            return ProofTree(Sequent(gamma, k, goal), RuleId.STORE_I, (inner,))
        if isinstance(goal, Nec):
            return self._prove_nec(gamma, k, goal, allow_mp)
        if isinstance(goal, Imp):
            hyp = At(k, goal.left)
            extended = gamma + (hyp,)
            inner = self.prove(extended, k, goal.right, allow_mp)
            if inner is None:
                return None
            return ProofTree(Sequent(gamma, k, goal), RuleId.IMP, (inner,))
        if isinstance(goal, QImp):
            hyp = At(k, goal.left)
            extended = gamma + (hyp,)
            inner = self.prove(extended, k, goal.right, allow_mp)
            if inner is None:
                return None
            return ProofTree(Sequent(gamma, k, goal), RuleId.IMP_C, (inner,))
        if isinstance(goal, Prop):
            return self._prove_prop(gamma, sat, k, goal, allow_mp)
        return None

    def _prove_nec(self, gamma, k: sx.Term, goal: Nec, allow_mp: bool):
        a = goal.action
        if isinstance(a, ASym):
            if not sx.is_ground(k):
                return None
            inner = self.prove(gamma, TApp(a.name, k), goal.body, allow_mp)
            if inner is None:
                return None
            return ProofTree(Sequent(gamma, k, goal), RuleId.FT_I, (inner,))
        if isinstance(a, AComp):
            nested = Nec(a.left, Nec(a.right, goal.body))
            inner = self.prove(gamma, k, nested, allow_mp)
            if inner is None:
                return None
            return ProofTree(Sequent(gamma, k, goal), RuleId.COMP_E, (inner,))
        if isinstance(a, AUnion):
            left = self.prove(gamma, k, Nec(a.left, goal.body), allow_mp)
            if left is None:
                return None
            right = self.prove(gamma, k, Nec(a.right, goal.body), allow_mp)
            if right is None:
                return None
            return ProofTree(Sequent(gamma, k, goal), RuleId.UNION_I, (left, right))
        if isinstance(a, AStar):
            if not sx.is_ground(k):
                return None
            w = eval_term(self.sig, k)
            _, period, closed = _orbit(self.sig, a.body, w, self.budget.star)
            if not closed:
                self.star_exhausted = True
                return None
            premises = []
            for n in range(period + 1):
                sub = self.prove(gamma, k, _star_power(a.body, n, goal.body), allow_mp)
                if sub is None:
                    return None
                premises.append(sub)
            return ProofTree(Sequent(gamma, k, goal), RuleId.STAR_I_BOUNDED,
                             tuple(premises), certificate=period)
        return None

    def _prove_prop(self, gamma, sat: _Saturation, k: sx.Term, goal: Prop,
                    allow_mp: bool):
        if not sx.is_ground(k):
            return None
        if goal in sat.universal:
            return sat.universal[goal](k)
        sat.register_site(k)
        sat.drain()
        closed = goal.name in self.sig.closed_props
        if closed:
            tree = self._prove_by_span(gamma, sat, k, goal)
            if tree is not None:
                return tree
            if isinstance(k, TSmul):
                inner = self.prove(gamma, k.arg, goal, allow_mp)
                if inner is not None:
                    return ProofTree(Sequent(gamma, k, goal), RuleId.MULT, (inner,))
            if isinstance(k, TSum):
                left = self.prove(gamma, k.left, goal, allow_mp)
                right = left and self.prove(gamma, k.right, goal, allow_mp)
                if left is not None and right is not None:
                    return ProofTree(Sequent(gamma, k, goal), RuleId.ADD,
                                     (left, right))
            if diagram_eq(self.sig, k, Origin()):
                return ProofTree(Sequent(gamma, k, goal), RuleId.ORIGIN)
        if allow_mp:
            tree = self._prove_by_mp(gamma, sat, k, goal)
            if tree is not None:
                return tree
        return self._lookup_fact(sat, k, goal)

    def _lookup_fact(self, sat: _Saturation, k: sx.Term, goal: sx.Sentence):
        cid = sat.intern(k)
        proof = sat.facts.get((goal, cid))
        if proof is None:
            return None
        return _adapt_eq(sat, proof, k)

    def _prove_by_span(self, gamma, sat: _Saturation, k: sx.Term, goal: Prop):
        basis, entries = sat.span_of(goal.name)
        if basis.rank == 0 or not entries:
            return None
        target = eval_term(self.sig, k)
        if not hl.member(basis, target, self.sig.tol):
            return None
        fact_matrix = np.array([sat.class_vecs[cid] for cid, _ in entries])
        premises = []
        for row in basis.basis:
            coeffs, *_ = np.linalg.lstsq(fact_matrix.T, row, rcond=None)
            parts = []
            for c, (cid, fact) in zip(coeffs, entries):
                if abs(c) <= 1e-12:
                    continue
                base = _adapt_eq(sat, fact, sat.class_terms[cid])
                term = TSmul(complex(c), base.conclusion.k)
                parts.append(ProofTree(Sequent(gamma, term, goal), RuleId.MULT,
                                       (base,)))
            if not parts:
                return None
            combo = parts[0]
            for nxt in parts[1:]:
                term = TSum(combo.conclusion.k, nxt.conclusion.k)
                combo = ProofTree(Sequent(gamma, term, goal), RuleId.ADD,
                                  (combo, nxt))
            premises.append(combo)
        return ProofTree(Sequent(gamma, k, goal), RuleId.SPAN_CLOSURE,
                         tuple(premises))

    def _prove_by_mp(self, gamma, sat: _Saturation, k: sx.Term, goal: Prop):
        cid = sat.intern(k)
        progressed = False
        for idx, (imp, _) in enumerate(list(sat.imps)):
            if (idx, cid) in sat.fired:
                continue
            self.counter.spend()
            antecedent, consequent = imp.left, imp.right
            rule = RuleId.MP if isinstance(imp, Imp) else RuleId.MP_C
            avail = sat.availability(idx, k)
            if avail is None:
                continue
            ante = self.prove(gamma, k, antecedent, allow_mp=False)
            if ante is None:
                continue
            sat.fired.add((idx, cid))
            node = ProofTree(Sequent(gamma, k, consequent), rule, (avail, ante))
            sat.add_fact(consequent, k, node)
            progressed = True
        if progressed:
            sat.drain()
            return self._lookup_fact(sat, k, goal)
        return None


class ProofSession:
    """A reusable prover over one signature and clause set.

    Saturation state is shared between queries, which makes repeated
    queries (as in initial-model construction) far cheaper than calling
    :func:`prove` in a loop. A session owns mutable search state, so use
    one session per thread; kernel checking of the returned trees is pure.
    """

    def __init__(self, sig: SignatureInstance, gamma,
                 budget: SearchBudget = SearchBudget()):
        self.sig = sig
        self.gamma = tuple(sx.desugar(c) for c in gamma)
        for c in self.gamma:
            if not classify_in(sig, c).is_quantum_clause:
                raise ProofError(f"not a quantum clause: {sx.format_sentence(c)}")
        self.budget = budget
        self._prover = _Prover(sig, self.gamma, budget)

    def register_terms(self, terms) -> None:
        """Pre-instantiate the clause set at the given ground terms.

        Registering a query universe up front makes the fact base
        independent of later query order.
        """
        sat = self._prover.saturation(self.gamma)
        for t in terms:
            sat.register_site(t)
        self._prover.saturate_sites(self.gamma)

    def prop_fact_vectors(self, p: str) -> list[np.ndarray]:
        """Evaluated states of every derived fact for the proposition.

        Elimination walks through guards wherever they lead, so this can
        extend past the registered terms; every entry is backed by a
        kernel-checkable proof.
        """
        sat = self._prover.saturation(self.gamma)
        return [sat.class_vecs[cid] for (s, cid) in sat.facts
                if isinstance(s, Prop) and s.name == p]

    def prove(self, k: sx.Term, goal: sx.Sentence) -> ProveResult:
        goal = sx.desugar(goal)
        if not classify_in(self.sig, goal).is_quantum_clause:
            raise ProofError(f"not a quantum clause: {sx.format_sentence(goal)}")
        if not sx.is_ground(k):
            raise ProofError(f"goal term is not ground: {sx.format_term(k)}")
        prover = self._prover
        star_before = prover.star_exhausted
        prover.star_exhausted = False
        try:
            tree = prover.prove(self.gamma, k, goal)
        except BudgetExceeded as e:
            return ProveResult("unknown", reason=str(e))
        if tree is not None:
            prover.star_exhausted = prover.star_exhausted or star_before
            return ProveResult("holds", tree=tree)
        if prover.star_exhausted:
            return ProveResult("unknown",
                               reason="a star orbit did not close within budget")
        if any(sat.incomplete for sat in prover.saturations.values()):
            return ProveResult("unknown", reason="saturation budget exhausted")
        return ProveResult("fails", reason="no rule applies to the remaining goals")


def prove(sig: SignatureInstance, gamma, k: sx.Term, goal: sx.Sentence,
          budget: SearchBudget = SearchBudget()) -> ProveResult:
    """Backward-chaining proof search for quantum clauses.

    Both the clause set and the goal must be quantum clauses over the
    signature, and the term must be ground. Returns a kernel-checkable
    proof tree, a definite failure, or an honest "unknown" when a budget
    ran out before the search space was exhausted.
    """
    return ProofSession(sig, gamma, budget).prove(k, goal)


# --------------------------------------------------- proof-object utilities

def used_premises(t: ProofTree) -> tuple[sx.Sentence, ...]:
    """The clause-set members actually consumed by Monotonicity nodes."""
    out: list[sx.Sentence] = []

    def walk(node: ProofTree, added: frozenset[sx.Sentence]):
        if node.rule is RuleId.MONOTONICITY:
            goal = node.conclusion.goal
            if goal not in added and goal not in out:
                out.append(goal)
        if node.rule in (RuleId.IMP, RuleId.IMP_C):
            hyp = At(node.conclusion.k, node.conclusion.goal.left)
            for p in node.premises:
                walk(p, added | {hyp})
        else:
            for p in node.premises:
                walk(p, added)

    walk(t, frozenset())
    return tuple(out)


def restrict_premises(t: ProofTree, subset) -> ProofTree:
    """Rebuild the tree over a smaller root clause set."""
    subset = tuple(subset)

    def rebuild(node: ProofTree, gamma: tuple[sx.Sentence, ...]) -> ProofTree:
        seq = Sequent(gamma, node.conclusion.k, node.conclusion.goal)
        if node.rule in (RuleId.IMP, RuleId.IMP_C):
            hyp = At(node.conclusion.k, node.conclusion.goal.left)
            premises = tuple(rebuild(p, gamma + (hyp,)) for p in node.premises)
        else:
            premises = tuple(rebuild(p, gamma) for p in node.premises)
        return ProofTree(seq, node.rule, premises, node.certificate)

    return rebuild(t, subset)


def rename_proof(chi: Morphism, t: ProofTree) -> ProofTree:
    """Rename a whole derivation along an injective signature morphism."""
    from .signature import apply_morphism

    def go(node: ProofTree) -> ProofTree:
        seq = Sequent(tuple(apply_morphism(chi, g) for g in node.conclusion.gamma),
                      apply_morphism(chi, node.conclusion.k),
                      apply_morphism(chi, node.conclusion.goal))
        return ProofTree(seq, node.rule, tuple(go(p) for p in node.premises),
                         node.certificate)

    return go(t)
