"""Expected-diagnostics harness driven by ``//!`` comments in corpus files.

Markers, written as line comments on the line a diagnostic is reported at:

``//!ERROR:CODE[,CODE...]``
    the codes expected on this line in every mode.
``//!PESSIMISTIC:CODE[,CODE...]``
    extra codes expected only when pessimistic mode is on.
``//!NOERROR``
    no unsuppressed diagnostic may land on this line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .config import Settings
from .diagnostics import Code
from .driver import RunResult, analyze, collect_sources
from .frontend.lexer import LexError, TokenKind, lex

_MARKER = re.compile(r"//!\s*(ERROR|PESSIMISTIC|NOERROR)\b\s*(?::\s*([A-Za-z_,\s]*))?")
_CODES = {c.value for c in Code}


class HarnessError(Exception):
    """A corpus file carries a malformed or unknown marker."""


@dataclass
class Expectations:
    errors: set[tuple[int, str]] = field(default_factory=set)
    pessimistic: set[tuple[int, str]] = field(default_factory=set)
    noerror: set[int] = field(default_factory=set)

    def expected(self, pessimistic: bool) -> set[tuple[int, str]]:
        return self.errors | self.pessimistic if pessimistic else set(self.errors)

    def clean_lines(self, pessimistic: bool) -> set[int]:
        if not pessimistic:
            return set(self.noerror)
        return self.noerror - {line for line, _ in self.pessimistic}


def _add_marker(out: Expectations, path: str, line: int, kind: str, codes: str) -> None:
    if kind == "NOERROR":
        if codes:
            raise HarnessError(f"{path}:{line}: NOERROR takes no codes")
        out.noerror.add(line)
        return
    names = [c.strip() for c in codes.split(",") if c.strip()]
    if not names:
        raise HarnessError(f"{path}:{line}: {kind} marker without codes")
    for name in names:
        if name not in _CODES:
            raise HarnessError(f"{path}:{line}: unknown diagnostic code {name!r}")
        (out.errors if kind == "ERROR" else out.pessimistic).add((line, name))


def read_expectations(path: str, text: str) -> Expectations:
    try:
        tokens = lex(text, trivia=True)
    except LexError as exc:
        raise HarnessError(f"{path}: {exc}") from None
    out = Expectations()
    for tok in tokens:
        if tok.kind is not TokenKind.COMMENT or "//!" not in tok.text:
            continue
        line = tok.span.line
        chunks = tok.text.split("//!")[1:]
        for chunk in chunks:
            m = _MARKER.match("//!" + chunk.rstrip())
            if m is None or m.end() != len("//!" + chunk.rstrip()):
                raise HarnessError(f"{path}:{line}: malformed marker {('//!' + chunk).strip()!r}")
            _add_marker(out, path, line, m.group(1), (m.group(2) or "").strip())
    return out


@dataclass
class FileOutcome:
    path: str
    missing: set[tuple[int, str]]
    unexpected: set[tuple[int, str]]
    noerror_hits: set[tuple[int, str]]

    @property
    def passed(self) -> bool:
        return not (self.missing or self.unexpected or self.noerror_hits)

    def describe(self) -> str:
        if self.passed:
            return f"PASS {self.path}"
        parts = []
        for label, items in (("missing", self.missing), ("unexpected", self.unexpected),
                             ("flagged NOERROR line", self.noerror_hits)):
            for line, code in sorted(items):
                parts.append(f"  {label}: line {line} {code}")
        return "\n".join([f"FAIL {self.path}", *parts])


@dataclass
class ExpectResult:
    files: list[FileOutcome]
    run: RunResult
    pessimistic: bool

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.files) and not self.run.syntax_errors

    def render(self) -> str:
        lines = [f.describe() for f in self.files]
        for path, e in self.run.syntax_errors:
            lines.append(f"FAIL {path}\n  syntax error at {e.span.line}:{e.span.col}: {e.message}")
        n_ok = sum(f.passed for f in self.files)
        mode = "pessimistic" if self.pessimistic else "optimistic"
        lines.append(f"{n_ok}/{len(self.files)} files passed ({mode} mode)")
        return "\n".join(lines) + "\n"


def run_expect(directory: str | Path, settings: Settings, pessimistic: Optional[bool] = None) -> ExpectResult:
    """Analyze ``directory`` as one program and compare against its markers."""
    sources = collect_sources([directory])
    if pessimistic is None:
        pessimistic = settings.boundary.pessimistic_mode
    settings = settings.with_boundary(pessimistic_mode=pessimistic)
    expectations = {path: read_expectations(path, text) for path, text in sources}
    run = analyze(sources, settings)
    actual: dict[str, set[tuple[int, str]]] = {path: set() for path, _ in sources}
    for d in run.unsuppressed:
        actual.setdefault(d.file, set()).add((d.line, d.code.value))
    outcomes = []
    for path, _ in sources:
        exp = expectations[path]
        want = exp.expected(pessimistic)
        got = actual[path]
        clean = exp.clean_lines(pessimistic)
        outcomes.append(FileOutcome(
            path,
            missing=want - got,
            unexpected=got - want,
            noerror_hits={(line, code) for line, code in got if line in clean},
        ))
    return ExpectResult(outcomes, run, pessimistic)
