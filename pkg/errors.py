"""
Shadowstein error hierarchy

Library code raises these exceptions; only the command-line entry point maps
them to exit codes. Input problems carry a locus so reports can point at the
offending line, vertex, edge or region.
"""

from typing import Optional


class ShadowsteinError(Exception):
    """Base class for every error raised by the package."""


class ShadowInputError(ShadowsteinError):
    """Malformed input text or an input that violates a documented precondition."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        locus: Optional[str] = None,
    ):
        self.line = line
        self.column = column
        self.locus = locus
        where = []
        if line is not None:
            where.append(f"line {line}")
            if column is not None:
                where.append(f"column {column}")
        if locus:
            where.append(locus)
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.message = message

    def to_dict(self) -> dict:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "line": self.line,
            "column": self.column,
            "locus": self.locus,
        }


class ValidationError(ShadowInputError):
    """
    A structurally well-formed shadow or front that fails validation.

    `code` is one of: slot, dangling, ids, passages, circuit, corner,
    branching, valence, vertex_model, disconnected, parity, non_standard,
    u_parity, front.
    """

    def __init__(self, code: str, message: str, locus: Optional[str] = None, **kwargs):
        self.code = code
        super().__init__(message, locus=locus, **kwargs)

    def to_dict(self) -> dict:
        data = super().to_dict()
        data["code"] = self.code
        return data


class CochainError(ShadowsteinError):
    """Degree or scale misuse in cochain arithmetic and class queries."""


class MoveError(ShadowsteinError):
    """A move whose precondition fails or whose result does not validate."""


class SolverError(ShadowsteinError):
    """A malformed feasibility problem."""


class EnumerationLimitError(ShadowsteinError):
    """Class enumeration would exceed the configured product-of-ranges guard."""


class InternalModelError(ShadowsteinError):
    """A hard internal assertion failed, such as a non-integral Euler index."""
