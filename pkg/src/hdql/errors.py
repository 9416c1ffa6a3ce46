"""Exception hierarchy shared across the toolkit."""


class HdqlError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(HdqlError):
    """Operands live in spaces of different dimension."""


class ParseError(HdqlError):
    """Lexical or syntactic error in concrete syntax, with location."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class SymbolError(HdqlError):
    """Unresolved or ill-used symbol (unknown unitary, free variable, ...)."""


class MorphismError(HdqlError):
    """Renaming is not injective, not total, or not frame-preserving."""


class SemanticsError(HdqlError):
    """Sentence shape outside the decidable fragment of the evaluators."""


class BudgetExceeded(HdqlError):
    """Iteration or node budget ran out before the answer was determined."""


class ProofError(HdqlError):
    """Ill-formed proof object or non-clause input to the prover."""


class PreconditionFailure(HdqlError):
    """A caller-supplied model or argument violates a stated precondition."""
