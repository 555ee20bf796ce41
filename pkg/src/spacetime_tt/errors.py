"""
Error Hierarchy

Consistent error handling for the spacetime-tt solver library.
Provides specific exception types for different failure scenarios.

Non-convergence (Krylov, Newton, cross interpolation) is not an error:
it is reported through the corresponding result objects.
"""

from typing import List, Optional, Sequence


class SpacetimeTTError(Exception):
    """Base exception for all spacetime-tt errors."""
    pass


class ShapeMismatchError(SpacetimeTTError, ValueError):
    """Operand shapes do not conform.

    Args:
        expected: Shape (or mode sizes) the operation required
        actual: Shape that was supplied
        what: Short description of the operand
    """

    def __init__(self, expected: Sequence[int], actual: Sequence[int], what: str = "operand"):
        self.expected = tuple(expected)
        self.actual = tuple(actual)
        self.what = what
        super().__init__(f"Shape mismatch for {what}: expected {self.expected}, got {self.actual}")


class NonFiniteError(SpacetimeTTError, FloatingPointError):
    """NaN or Inf encountered in a field.

    Usually signals coefficient blow-up during a Newton step.

    Args:
        where: Name of the field or operation that produced the values
    """

    def __init__(self, where: str):
        self.where = where
        super().__init__(f"Non-finite values encountered in {where}")


class SizeCapExceeded(SpacetimeTTError):
    """Densification would exceed the configured element cap.

    Args:
        requested: Number of elements the dense result would hold
        cap: Configured maximum
    """

    def __init__(self, requested: int, cap: int):
        self.requested = requested
        self.cap = cap
        super().__init__(f"Dense result of {requested} elements exceeds cap of {cap}")


class RankDeficiencyError(SpacetimeTTError):
    """Matrix passed to maxvol does not have full column rank.

    Args:
        rank: Numerical rank that was detected
        columns: Number of columns of the matrix
    """

    def __init__(self, rank: int, columns: int):
        self.rank = rank
        self.columns = columns
        super().__init__(f"Matrix is rank deficient: numerical rank {rank} < {columns} columns")


class ProblemSpecError(SpacetimeTTError):
    """Problem definition is inconsistent.

    Raised for incompatible initial/boundary data or malformed domains.
    """
    pass


class ProblemNotFound(SpacetimeTTError, KeyError):
    """Experiment name not known to the problem registry.

    Args:
        name: The name that was looked up
        suggestions: Optional list of similar names to suggest
    """

    def __init__(self, name: str, suggestions: Optional[List[str]] = None):
        self.name = name
        self.suggestions = suggestions or []

        message = f"Experiment '{name}' not found"
        if suggestions:
            message += f". Did you mean: {', '.join(suggestions[:3])}?"
        super().__init__(message)

    def __str__(self) -> str:
        return self.args[0]


class ConfigError(SpacetimeTTError):
    """Experiment configuration is invalid.

    Args:
        message: Summary of the problem
        fields: Names of the offending configuration keys
    """

    def __init__(self, message: str, fields: Optional[List[str]] = None):
        self.fields = fields or []
        super().__init__(message)


class SchemaMismatchError(SpacetimeTTError):
    """Result CSV does not carry the expected column layout.

    Args:
        path: File that was read
        missing: Expected columns that are absent
        unexpected: Columns present that are not part of the schema
    """

    def __init__(self, path: str, missing: Sequence[str] = (), unexpected: Sequence[str] = ()):
        self.path = path
        self.missing = list(missing)
        self.unexpected = list(unexpected)
        parts = []
        if self.missing:
            parts.append(f"missing {', '.join(self.missing)}")
        if self.unexpected:
            parts.append(f"unexpected {', '.join(self.unexpected)}")
        detail = "; ".join(parts) or "column order differs"
        super().__init__(f"Result file {path} has an incompatible schema: {detail}")


class ValidationError(SpacetimeTTError):
    """Report or checkpoint validation errors.

    Raised when a stored run report or TT checkpoint fails schema or format checks.
    """
    pass
