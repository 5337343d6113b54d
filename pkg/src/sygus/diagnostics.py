"""Diagnostics: one record per rejection, printable as a line or as JSON.

Stable codes used across the toolkit:

=================  =====================================================
E-PARSE            unreadable S-expression text
E-SYNTAX           malformed command shape
E-BINDER           binder inside a term that must be binder-free
E-ARITY            wrong number of arguments
E-RESERVED         reserved word used as a symbol
E-UNKNOWN-CMD      unknown command head
E-ORDER            command-ordering violation
E-DUP-SYMBOL       symbol declared twice
E-UNBOUND          unknown symbol
E-SORT             ill-sorted term or ill-formed sort
E-LOGIC            unknown logic name
E-LOGIC-TERM       term not allowed by the input logic
E-LOGIC-GRAMMAR    grammar not allowed by the output logic
E-LOGIC-SPECIAL    PBE, Inv or CHC whole-file restriction violated
E-FEATURE          unknown feature
E-FEATURE-GATED    command or term requires a disabled feature
E-GRAMMAR-DECL     grammar predeclaration and listing disagree
E-GRAMMAR-SORT     grammar rule of the wrong sort
E-UNSUPPORTED      construct outside the supported fragment
E-DESUGAR          sugar command with ill-formed arguments
E-OPT              ill-formed objective
E-RESPONSE         malformed or mismatched solver response
E-VALUE            malformed value
E-VALUE-SORT       value of the wrong sort
E-ORACLE-*         oracle invocation failures
=================  =====================================================
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import SygusError
from .reader import Span


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # error | warning
    code: str
    span: Span | None
    message: str

    @staticmethod
    def from_error(err: SygusError, span: Span | None = None) -> "Diagnostic":
        sev = "warning" if err.code.startswith("W-") else "error"
        return Diagnostic(sev, err.code, err.span if err.span is not None else span, err.message)

    @property
    def where(self) -> str:
        if self.span is None:
            return "0:0"
        return f"{self.span.line}:{self.span.column}"

    def line(self) -> str:
        return f"{self.severity} {self.code} {self.where} {self.message}"

    def as_dict(self) -> dict:
        d = {"severity": self.severity, "code": self.code, "message": self.message}
        if self.span is not None:
            d["line"] = self.span.line
            d["column"] = self.span.column
        return d

    def json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def errors_only(diags) -> list[Diagnostic]:
    return [d for d in diags if d.severity == "error"]
