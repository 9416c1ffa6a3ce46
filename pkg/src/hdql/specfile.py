"""The textual problem-file format and the proof-trace wire formats.

A problem file is a sequence of keyword sections::

    SPACE 8                       # space dimension, required first
    VECTORS                       # named states
      w0 = (0.6, 0, 0, 0.8)      # complex coordinates, a+bi literals
    UNITARY                       # gates: tensor expression or matrix
      u0 = CNOT (x) I2            # built-ins: H, X, Y, Z, CNOT, I<n>
      g  = [0, 1; 1, 0]           # row-major rows separated by ';'
    MEASURE                       # measurement symbols with their subspace
      q0 = { w0, (0, 1, 0, 0) }   # basis: vector names or literals
    PROPS
      p
      r closed
    AXIOMS                        # one sentence per line
      @(w0) p
    GOAL AT w0 PROVE [u0] p       # repeatable
    VALUATION                     # only needed by eval
      p = { w0 }
      r = span { w0 }

``#`` starts a comment; blank lines are ignored. Section keywords must
start a line. Proof traces serialize to a line-oriented indented tree, one
node per line (``rule | term | sentence`` with an optional certificate
suffix), or to a JSON mirror of the same fields; both round-trip exactly.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

import numpy as np

from . import hilbert as hl
from . import syntax as sx
from .calculus import ProofTree, RuleId, Sequent
from .errors import HdqlError, ParseError
from .hilbert import DEFAULT_TOL, Subspace
from .semantics import FiniteVectors, QuantumModel, Region
from .signature import SignatureInstance, validate

__all__ = [
    "LoadedSpec", "SpecLoadError", "load_spec", "load_spec_text",
    "valuation_model", "serialize_trace", "deserialize_trace",
    "trace_to_json", "trace_from_json",
]

_SECTIONS = ("SPACE", "VECTORS", "UNITARY", "MEASURE", "PROPS", "AXIOMS",
             "GOAL", "VALUATION")

_BUILTIN_GATES = {"H": hl.H, "X": hl.X, "Y": hl.Y, "Z": hl.Z, "CNOT": hl.CNOT}


class SpecLoadError(HdqlError):
    """Problem-file errors, each located by line number."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass(eq=False)
class LoadedSpec:
    sig: SignatureInstance
    axioms: list[sx.Sentence]
    goals: list[tuple[sx.Term, sx.Sentence]]
    valuation: dict[str, Region] | None = None
    source: str = ""


def _strip(line: str) -> str:
    if "#" in line:
        line = line[:line.index("#")]
    return line.strip()


def _split_top(text: str, sep: str) -> list[str]:
    """Split on a separator, ignoring separators inside brackets."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _parse_coords(text: str, where: str, errors: list[str]) -> np.ndarray | None:
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        errors.append(f"{where}: expected a parenthesized coordinate list")
        return None
    try:
        coords = [sx.parse_complex(c.strip())
                  for c in _split_top(text[1:-1], ",")]
    except (ParseError, HdqlError) as e:
        errors.append(f"{where}: {e}")
        return None
    return hl.vector(coords)


def _parse_matrix(text: str, where: str, errors: list[str]) -> np.ndarray | None:
    body = text.strip()[1:-1]
    rows = []
    try:
        for row in body.split(";"):
            rows.append([sx.parse_complex(c.strip()) for c in row.split(",")])
    except (ParseError, HdqlError) as e:
        errors.append(f"{where}: {e}")
        return None
    lengths = {len(r) for r in rows}
    if len(lengths) != 1 or len(rows) != lengths.pop():
        errors.append(f"{where}: matrix is not square")
        return None
    return np.array(rows, dtype=complex)


def _parse_gate_expr(text: str, where: str, errors: list[str]) -> np.ndarray | None:
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            errors.append(f"{where}: unterminated matrix literal")
            return None
        return _parse_matrix(text, where, errors)
    factors = [f.strip() for f in text.split("(x)")]
    out = None
    for f in factors:
        if f in _BUILTIN_GATES:
            m = _BUILTIN_GATES[f]
        elif re.fullmatch(r"I\d+", f):
            m = hl.identity(int(f[1:]))
        else:
            errors.append(f"{where}: unknown gate factor {f!r} "
                          "(built-ins: H, X, Y, Z, CNOT, I<n>)")
            return None
        out = m if out is None else hl.tensor_op(out, m)
    return out


def load_spec_text(text: str, tolerance: float = DEFAULT_TOL) -> LoadedSpec:
    """Parse and validate a problem file given as text.

    Raises SpecLoadError carrying every located problem at once.
    """
    errors: list[str] = []
    dim: int | None = None
    vectors: dict[str, np.ndarray] = {}
    unitaries: dict[str, np.ndarray] = {}
    measure_raw: dict[str, list] = {}
    props: dict[str, bool] = {}
    axiom_lines: list[tuple[int, str]] = []
    goal_lines: list[tuple[int, str]] = []
    valuation_lines: list[tuple[int, str]] = []

    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        head = line.split(None, 1)[0]
        if head in _SECTIONS:
            section = head
            rest = line[len(head):].strip()
            if head == "SPACE":
                try:
                    dim = int(rest)
                except ValueError:
                    errors.append(f"line {lineno}: SPACE needs an integer dimension")
            elif head == "GOAL":
                goal_lines.append((lineno, rest))
            elif rest:
                errors.append(f"line {lineno}: unexpected text after {head}")
            continue
        where = f"line {lineno}"
        if section is None:
            errors.append(f"{where}: content before any section "
                          "(missing SPACE header?)")
        elif section == "VECTORS":
            name, _, rhs = line.partition("=")
            v = _parse_coords(rhs, where, errors)
            if v is not None:
                vectors[name.strip()] = v
        elif section == "UNITARY":
            name, _, rhs = line.partition("=")
            m = _parse_gate_expr(rhs, where, errors)
            if m is not None:
                unitaries[name.strip()] = m
        elif section == "MEASURE":
            name, _, rhs = line.partition("=")
            rhs = rhs.strip()
            if not (rhs.startswith("{") and rhs.endswith("}")):
                errors.append(f"{where}: expected a braced basis list")
            else:
                items = [i.strip() for i in _split_top(rhs[1:-1], ",") if i.strip()]
                measure_raw[name.strip()] = [(lineno, i) for i in items]
        elif section == "PROPS":
            parts = line.split()
            if len(parts) == 1:
                props[parts[0]] = False
            elif len(parts) == 2 and parts[1] == "closed":
                props[parts[0]] = True
            else:
                errors.append(f"{where}: expected 'name' or 'name closed'")
        elif section == "AXIOMS":
            axiom_lines.append((lineno, line))
        elif section == "VALUATION":
            valuation_lines.append((lineno, line))
        else:
            errors.append(f"{where}: stray content in section {section}")

    if dim is None:
        errors.append("missing SPACE section with the space dimension")
        raise SpecLoadError(errors)

    def resolve_state(item: str, where: str) -> np.ndarray | None:
        if item.startswith("("):
            return _parse_coords(item, where, errors)
        v = vectors.get(item)
        if v is None:
            errors.append(f"{where}: unknown vector name {item!r}")
        return v

    measurements: dict[str, Subspace] = {}
    for name, items in measure_raw.items():
        basis = []
        for lineno, item in items:
            v = resolve_state(item, f"line {lineno}")
            if v is not None:
                basis.append(v)
        if basis:
            sub = hl.orthonormalize(basis, dim=dim, tol=tolerance)
            if sub.rank < len(basis):
                errors.append(
                    f"measurement {name}: basis has duplicate or linearly "
                    f"dependent vectors ({len(basis)} given, rank {sub.rank})")
            measurements[name] = sub
        else:
            measurements[name] = hl.zero_subspace(dim)

    sig = SignatureInstance(
        dim=dim, unitaries=unitaries, measurements=measurements,
        named_vectors=vectors,
        props=frozenset(props),
        closed_props=frozenset(p for p, c in props.items() if c),
        tol=tolerance)
    for violation in validate(sig):
        errors.append(f"validation: {violation}")

    def check_resolved(sentence: sx.Sentence, where: str) -> None:
        used_props, used_acts, used_names = sx.sentence_symbols(sentence)
        for p in sorted(used_props - set(props)):
            errors.append(f"{where}: undeclared proposition {p!r}")
        declared_acts = set(unitaries) | set(measurements)
        for a in sorted(used_acts - declared_acts):
            errors.append(f"{where}: undeclared operation symbol {a!r}")
        for n in sorted(used_names - set(vectors)):
            errors.append(f"{where}: undeclared vector name {n!r}")

    axioms: list[sx.Sentence] = []
    for lineno, line in axiom_lines:
        try:
            sentence = sx.parse_sentence(line)
        except ParseError as e:
            errors.append(f"line {lineno}: {e}")
            continue
        check_resolved(sentence, f"line {lineno}")
        axioms.append(sentence)

    goals: list[tuple[sx.Term, sx.Sentence]] = []
    for lineno, rest in goal_lines:
        m = re.fullmatch(r"AT\s+(.*?)\s+PROVE\s+(.*)", rest)
        if not m:
            errors.append(f"line {lineno}: GOAL must read 'GOAL AT <term> "
                          "PROVE <sentence>'")
            continue
        try:
            term = sx.parse_term(m.group(1))
            sentence = sx.parse_sentence(m.group(2))
        except ParseError as e:
            errors.append(f"line {lineno}: {e}")
            continue
        check_resolved(sx.At(term, sentence), f"line {lineno}")
        goals.append((term, sentence))

    valuation: dict[str, Region] | None = None
    if valuation_lines:
        valuation = {}
        for lineno, line in valuation_lines:
            where = f"line {lineno}"
            name, eq, rhs = line.partition("=")
            name, rhs = name.strip(), rhs.strip()
            if not eq or name not in props:
                errors.append(f"{where}: valuation of undeclared proposition")
                continue
            is_span = rhs.startswith("span")
            if is_span:
                rhs = rhs[4:].strip()
            if not (rhs.startswith("{") and rhs.endswith("}")):
                errors.append(f"{where}: expected a braced state list")
                continue
            states = [resolve_state(i.strip(), where)
                      for i in _split_top(rhs[1:-1], ",") if i.strip()]
            states = [s for s in states if s is not None]
            if is_span or props[name]:
                valuation[name] = hl.orthonormalize(states, dim=dim, tol=tolerance)
            else:
                valuation[name] = FiniteVectors(tuple(states))

    if errors:
        raise SpecLoadError(errors)
    return LoadedSpec(sig=sig, axioms=axioms, goals=goals,
                      valuation=valuation, source=text)


def load_spec(path: str, tolerance: float = DEFAULT_TOL) -> LoadedSpec:
    """Load a problem file from disk; see load_spec_text."""
    with open(path, "r", encoding="utf-8") as fh:
        return load_spec_text(fh.read(), tolerance=tolerance)


def valuation_model(spec: LoadedSpec) -> QuantumModel:
    if spec.valuation is None:
        raise HdqlError("the problem file has no VALUATION section")
    return QuantumModel(spec.sig, dict(spec.valuation))


# ----------------------------------------------------------- trace formats

def _node_line(node: ProofTree, depth: int) -> str:
    line = (f"{node.rule.value} | {sx.format_term(node.conclusion.k)} | "
            f"{sx.format_sentence(node.conclusion.goal)}")
    if isinstance(node.certificate, int):
        line += f" [n={node.certificate}]"
    return "  " * depth + line


def serialize_trace(gamma, tree: ProofTree) -> str:
    """Deterministic line-oriented form of a proof tree."""
    lines = ["HDQL-TRACE 1", f"gamma {len(tuple(gamma))}"]
    for c in gamma:
        lines.append("  " + sx.format_sentence(c))
    lines.append("proof")

    def walk(node: ProofTree, depth: int):
        lines.append(_node_line(node, depth))
        for p in node.premises:
            walk(p, depth + 1)

    walk(tree, 0)
    return "\n".join(lines) + "\n"


_RULES_BY_NAME = {r.value: r for r in RuleId}


def _child_gamma(rule: RuleId, conclusion: Sequent) -> tuple[sx.Sentence, ...]:
    if rule in (RuleId.IMP, RuleId.IMP_C):
        return conclusion.gamma + (sx.At(conclusion.k, conclusion.goal.left),)
    return conclusion.gamma


def deserialize_trace(text: str) -> tuple[tuple[sx.Sentence, ...], ProofTree]:
    """Rebuild (clause set, proof tree) from the line format."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "HDQL-TRACE 1":
        raise HdqlError("not a version-1 trace")
    m = re.fullmatch(r"gamma (\d+)", lines[1].strip())
    if not m:
        raise HdqlError("malformed trace: missing gamma header")
    n = int(m.group(1))
    gamma = tuple(sx.parse_sentence(lines[2 + i].strip()) for i in range(n))
    if lines[2 + n].strip() != "proof":
        raise HdqlError("malformed trace: missing proof marker")

    rows: list[tuple[int, str]] = []
    for raw in lines[3 + n:]:
        if not raw.strip():
            continue
        indent = (len(raw) - len(raw.lstrip(" "))) // 2
        rows.append((indent, raw.strip()))

    pos = 0

    def parse_node(depth: int, ctx: tuple[sx.Sentence, ...]) -> ProofTree:
        nonlocal pos
        indent, row = rows[pos]
        if indent != depth:
            raise HdqlError(f"malformed trace: bad indent at row {pos}")
        pos += 1
        fields = [f.strip() for f in row.split(" | ", 2)]
        if len(fields) != 3:
            raise HdqlError(f"malformed trace: bad node row {row!r}")
        rule = _RULES_BY_NAME.get(fields[0])
        if rule is None:
            raise HdqlError(f"malformed trace: unknown rule {fields[0]!r}")
        cert = None
        sentence_text = fields[2]
        m_cert = re.fullmatch(r"(.*) \[n=(\d+)\]", sentence_text)
        if m_cert:
            sentence_text, cert = m_cert.group(1), int(m_cert.group(2))
        conclusion = Sequent(ctx, sx.parse_term(fields[1]),
                             sx.parse_sentence(sentence_text))
        premises = []
        child_ctx = _child_gamma(rule, conclusion)
        while pos < len(rows) and rows[pos][0] == depth + 1:
            premises.append(parse_node(depth + 1, child_ctx))
        return ProofTree(conclusion, rule, tuple(premises), cert)

    tree = parse_node(0, gamma)
    if pos != len(rows):
        raise HdqlError("malformed trace: trailing rows")
    return gamma, tree


def trace_to_json(gamma, tree: ProofTree) -> str:
    """JSON mirror of the text trace."""
    def node(t: ProofTree):
        return {
            "rule": t.rule.value,
            "term": sx.format_term(t.conclusion.k),
            "goal": sx.format_sentence(t.conclusion.goal),
            "certificate": t.certificate if isinstance(t.certificate, int) else None,
            "premises": [node(p) for p in t.premises],
        }
    doc = {"version": 1,
           "gamma": [sx.format_sentence(c) for c in gamma],
           "proof": node(tree)}
    return json.dumps(doc, indent=1) + "\n"


def trace_from_json(text: str) -> tuple[tuple[sx.Sentence, ...], ProofTree]:
    doc = json.loads(text)
    if doc.get("version") != 1:
        raise HdqlError("not a version-1 JSON trace")
    gamma = tuple(sx.parse_sentence(c) for c in doc["gamma"])

    def node(obj, ctx) -> ProofTree:
        rule = _RULES_BY_NAME.get(obj["rule"])
        if rule is None:
            raise HdqlError(f"unknown rule {obj['rule']!r}")
        conclusion = Sequent(ctx, sx.parse_term(obj["term"]),
                             sx.parse_sentence(obj["goal"]))
        child_ctx = _child_gamma(rule, conclusion)
        premises = tuple(node(p, child_ctx) for p in obj["premises"])
        return ProofTree(conclusion, rule, premises, obj.get("certificate"))

    return gamma, node(doc["proof"], gamma)
