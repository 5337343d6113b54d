"""Error type shared by every stage of the toolkit."""

from __future__ import annotations


class SygusError(Exception):
    """A rejection with a stable diagnostic code.

    ``code`` is one of the ``E-*`` strings listed in :mod:`sygus.diagnostics`;
    ``span`` points at the offending source text when it is known.
    """

    def __init__(self, code: str, message: str, span=None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.span = span

    def __str__(self):
        where = f"{self.span} " if self.span is not None else ""
        return f"{self.code} {where}{self.message}"
