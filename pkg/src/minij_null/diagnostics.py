"""Diagnostic records shared by every checking phase."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Optional

from .frontend.lexer import Span


class Code(str, enum.Enum):
    DEREF_NULLABLE = "DEREF_NULLABLE"
    ASSIGN_NULLABLE = "ASSIGN_NULLABLE"
    PARAM_NULLABLE = "PARAM_NULLABLE"
    RETURN_NULLABLE = "RETURN_NULLABLE"
    OVERRIDE_RETURN = "OVERRIDE_RETURN"
    OVERRIDE_PARAM = "OVERRIDE_PARAM"
    FIELD_NO_INIT = "FIELD_NO_INIT"
    USE_BEFORE_INIT = "USE_BEFORE_INIT"
    CONFLICTING_ANNOT = "CONFLICTING_ANNOT"
    RESOLUTION = "RESOLUTION"
    INTERNAL = "INTERNAL"

    def __str__(self) -> str:
        return self.value


@dataclass
class Diagnostic:
    code: Code
    file: str
    span: Span
    message: str
    suppressed: bool = False
    suppression_reason: Optional[str] = None  # "annotation" | "assertion-model"
    # enclosing declarations, outermost first (ClassDecl, then MethodDecl/FieldDecl)
    scope: tuple[Any, ...] = field(default=(), compare=False, repr=False)

    @property
    def line(self) -> int:
        return self.span.line

    def sort_key(self) -> tuple:
        return (self.file, self.span.line, self.span.col, self.code.value, self.suppressed, self.message)

    def render(self) -> str:
        level = "note" if self.suppressed else "error"
        text = f"{self.file}:{self.span.line}:{self.span.col}: {level}[{self.code}] {self.message}"
        if self.suppressed:
            text += f" (suppressed: {self.suppression_reason})"
        return text

    def to_json(self) -> dict:
        return {
            "file": self.file,
            "line": self.span.line,
            "col": self.span.col,
            "code": self.code.value,
            "message": self.message,
            "suppressed": self.suppressed,
            "suppression_reason": self.suppression_reason,
        }


def dedupe_sorted(diags: list[Diagnostic]) -> list[Diagnostic]:
    """Sort deterministically and keep one diagnostic per (file, span, code)."""
    seen: set[tuple] = set()
    out: list[Diagnostic] = []
    for d in sorted(diags, key=Diagnostic.sort_key):
        key = (d.file, d.span.start, d.span.end, d.code)
        if key in seen:
            continue
        seen.add(key)
        out.append(d)
    return out
