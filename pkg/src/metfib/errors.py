"""Exception types shared by the validators and file readers."""

from __future__ import annotations


class ValidationError(Exception):
    """An axiom failed; ``kind`` names the axiom and ``witness`` holds the offending data."""

    def __init__(self, kind: str, message: str, witness: tuple = ()) -> None:
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.witness = tuple(witness)

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


class ParseError(Exception):
    def __init__(self, message: str, line: int | None = None, source: str | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.line = line
        self.source = source

    def __str__(self) -> str:
        where = self.source or "<input>"
        if self.line is not None:
            where = f"{where}:{self.line}"
        return f"{where}: {self.message}"
