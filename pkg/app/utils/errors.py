"""
Exception hierarchy shared by services and controllers.

Every error carries the process exit code the CLI reports for it:
1 for domain negatives, 2 for usage, parse and load problems.
"""
from typing import Any, Dict, Optional, Sequence


class BBCError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 2
    kind: str = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def to_dict(self) -> Dict[str, Any]:
        """Structured form used for JSON diagnostics."""
        return {"kind": self.kind, "message": self.message}


class ParseError(BBCError):
    """Syntax violation in a .bbc source, with a 1-based position."""

    kind = "parse"

    def __init__(self, message: str, line: int = 1, column: int = 1,
                 expected: Optional[Sequence[str]] = None):
        super().__init__(message)
        self.line = line
        self.column = column
        self.expected = sorted(set(expected or ()))

    def __str__(self) -> str:
        text = f"{self.line}:{self.column}: {self.message}"
        if self.expected:
            text += f" (expected one of: {', '.join(self.expected)})"
        return text

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data.update({"line": self.line, "column": self.column, "expected": self.expected})
        return data


class ProgramError(ParseError):
    """Semantic load error: the text parses but is not a valid program."""

    kind = "program"

    def __str__(self) -> str:
        return self.message


class SubstitutionError(BBCError):
    """Ill-sorted substitution (multiset where a first-order name is required)."""

    kind = "substitution"


class EvaluationError(BBCError):
    """Message evaluation failed (unresolved set variable, empty multiset)."""

    kind = "evaluation"


class ReductionError(BBCError):
    """The reduction engine met an unresolvable redex."""

    kind = "reduction"


class TypeCheckError(BBCError):
    """A network, process or message is ill-typed."""

    exit_code = 1
    kind = "type"

    def __init__(self, message: str, node: Optional[str] = None):
        super().__init__(message)
        self.node = node

    def __str__(self) -> str:
        if self.node:
            return f"{self.message} in `{self.node}`"
        return self.message

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["node"] = self.node
        return data


class SpecError(BBCError):
    """Invalid generator specification."""

    kind = "spec"
