"""Override compatibility: covariant returns, contravariant parameters."""

from __future__ import annotations

from typing import Optional

from ..diagnostics import Code, Diagnostic
from ..frontend.lexer import Span
from .nullness import Nullness
from .program import DeclaredSignature, MethodInfo

_NOWHERE = Span(0, 0, 0, 0)


def check_override(sub: DeclaredSignature, sup: DeclaredSignature,
                   site: Optional[MethodInfo] = None) -> list[Diagnostic]:
    """Diagnostics for ``sub`` overriding ``sup``; ``site`` supplies spans and scope."""
    path = site.owner.file.path if site is not None else "<signature>"
    scope = (site.owner.decl, site.decl) if site is not None else ()
    name_span = site.span if site is not None else _NOWHERE
    if len(sub.param_nullness) != len(sup.param_nullness):
        return [Diagnostic(Code.RESOLUTION, path, name_span,
                           f"{sub.name} overrides {sup.owner}.{sup.name} with a different arity", scope=scope)]
    out = []
    if sup.return_nullness is Nullness.NONNULL and sub.return_nullness is Nullness.NULLABLE:
        out.append(Diagnostic(
            Code.OVERRIDE_RETURN, path, name_span,
            f"method {sub.name} returns @Nullable but overrides {sup.owner}.{sup.name} whose return is @NonNull",
            scope=scope))
    for i, (a, b) in enumerate(zip(sub.param_nullness, sup.param_nullness)):
        if b is Nullness.NULLABLE and a is Nullness.NONNULL:
            span = site.params[i].span if site is not None and site.params[i].span is not None else name_span
            pname = site.params[i].name if site is not None else f"#{i}"
            out.append(Diagnostic(
                Code.OVERRIDE_PARAM, path, span,
                f"parameter {pname} is @NonNull but the overridden {sup.owner}.{sup.name} accepts @Nullable",
                scope=scope))
    return out
