"""Verification toolkit for hybrid-dynamic quantum logic.

State spaces are finite-dimensional complex inner-product spaces; Kripke
frames move between states through unitary gates and projective
measurements. The package provides the sentence language and its
semantics, a Birkhoff-style sequent calculus with a small trusted kernel,
initial-model construction for quantum clause sets, and a batch front end
over a textual problem format.
"""

from .calculus import (CheckResult, ProofSession, ProofTree, ProveResult,
                       RuleId, SearchBudget, Sequent, check_proof, prove,
                       rename_proof, restrict_premises, used_premises)
from .errors import (BudgetExceeded, DimensionMismatch, HdqlError,
                     MorphismError, ParseError, PreconditionFailure,
                     ProofError, SemanticsError, SymbolError)
from .hilbert import DEFAULT_TOL, Subspace
from .initial_model import InitialModel, build_initial, check_minimality, holds
from .semantics import (FiniteVectors, QuantumModel, StarBudget,
                        closed_extension, global_sat, reduct, sat_at,
                        successors)
from .signature import (Morphism, SignatureInstance, Violation,
                        apply_morphism, diagram_eq, eval_term,
                        identity_morphism, validate)
from .specfile import (LoadedSpec, SpecLoadError, deserialize_trace,
                       load_spec, load_spec_text, serialize_trace,
                       trace_from_json, trace_to_json)
from .syntax import (Kind, classify, desugar, format_action, format_sentence,
                     format_term, parse, parse_action, parse_sentence,
                     parse_term, substitute)

__version__ = "0.1.0"
