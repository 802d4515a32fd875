"""
Exception hierarchy.

Verdicts (Illegal, Unknown, Unprovable, rule violations) are ordinary return values;
exceptions are reserved for malformed input and broken internal contracts.
"""

from typing import Optional


class GameproofError(ValueError):
    """Base class for every error raised by the library."""


class FormulaSyntaxError(GameproofError):
    """Text that is not in the formula/sequent grammar."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class ArityError(GameproofError):
    """A predicate or function letter used with inconsistent arities."""


class SubstitutionCollision(GameproofError):
    """A substituted variable would be captured by a binder."""


class InterpretationError(GameproofError):
    """An interpretation that is partial, malformed, or overflowing."""


class ProofFormatError(GameproofError):
    """A proof file that does not follow the step schema."""


class ScriptError(GameproofError):
    """A malformed environment script or table-solution file."""


class BudgetExceeded(GameproofError):
    """An enumeration or search ran past its configured budget."""


class ReplayDivergence(GameproofError):
    """Replaying an embedded machine did not reproduce its recorded move."""


class RecomputeInvariantError(GameproofError):
    """A bookkeeping bound of the recomputing mediator was violated."""


class CounterstrategyError(GameproofError):
    """The counterstrategy cannot proceed (provable input or undecided query)."""
