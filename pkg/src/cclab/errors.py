"""Exception hierarchy shared by every cclab module."""


class CclabError(Exception):
    """Base class for library errors."""


class DomainError(CclabError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class CutLocusProximity(DomainError):
    """A point pair is within the cut-locus safety margin (or past it)."""


class SingularCost(DomainError):
    """The cost is singular at the requested arguments (e.g. log cost on the diagonal)."""


class DegeneracyError(CclabError, ArithmeticError):
    """A linear system that should be non-degenerate is numerically singular."""


class ConvergenceError(CclabError, RuntimeError):
    """An iterative solver hit its iteration cap."""


class NotNullable(CclabError):
    """No scaling balances the two factors into an h-null pair."""


class DegeneracyWarning(UserWarning):
    """The mixed second-derivative matrix is close to singular."""
