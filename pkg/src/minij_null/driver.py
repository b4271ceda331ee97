"""Phase orchestration: parse, build the program, infer, check, report."""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .boundary import Boundary, ModelSet
from .checks import apply_suppressions, check_class_bodies, check_overrides
from .config import Settings
from .dataflow.analysis import DataflowEngine
from .diagnostics import Code, Diagnostic, dedupe_sorted
from .frontend import ast as A
from .frontend.parser import SyntaxIssue, parse_source
from .handlers import HandlerChain
from .initcheck import check_class_init
from .semantics.program import ProgramTable, build_program

STD_PATH = "<std>/std.mj"


def std_source() -> str:
    return resources.files("minij_null.data").joinpath("std.mj").read_text(encoding="utf-8")


def collect_sources(paths: Sequence[str | Path]) -> list[tuple[str, str]]:
    """``(path, text)`` for every ``.mj`` file under ``paths``, sorted by path."""
    files: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            files += sorted(q for q in p.rglob("*.mj") if q.is_file())
        elif p.is_file():
            files.append(p)
        else:
            raise FileNotFoundError(f"no such file or directory: {p}")
    seen: set[str] = set()
    out = []
    for f in sorted(files, key=lambda q: q.as_posix()):
        key = f.as_posix()
        if key in seen:
            continue
        seen.add(key)
        out.append((key, f.read_text(encoding="utf-8")))
    return out


@dataclass
class RunReport:
    files: int = 0
    methods_analyzed: int = 0
    dataflow_computations: int = 0
    diagnostics_by_code: dict[str, int] = field(default_factory=dict)
    suppressed: int = 0
    assertion_suppressions: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    parse_seconds: float = 0.0
    total_seconds: float = 0.0

    @property
    def unsuppressed(self) -> int:
        return sum(self.diagnostics_by_code.values())

    def to_json(self, timings: bool = False) -> dict:
        out = {
            "files": self.files,
            "methods_analyzed": self.methods_analyzed,
            "dataflow_computations": self.dataflow_computations,
            "diagnostics_by_code": dict(sorted(self.diagnostics_by_code.items())),
            "unsuppressed": self.unsuppressed,
            "suppressed": self.suppressed,
            "assertion_suppressions": self.assertion_suppressions,
            "warnings": self.warnings,
        }
        if timings:
            out["parse_seconds"] = round(self.parse_seconds, 6)
            out["total_seconds"] = round(self.total_seconds, 6)
        return out

    def summary(self) -> str:
        codes = ", ".join(f"{k}: {v}" for k, v in sorted(self.diagnostics_by_code.items()))
        head = f"{self.unsuppressed} error{'s' if self.unsuppressed != 1 else ''}"
        if codes:
            head += f" ({codes})"
        return (f"{head}; {self.suppressed} suppressed; {self.files} files; "
                f"{self.methods_analyzed} methods analyzed; {self.dataflow_computations} dataflow computations")


@dataclass
class RunResult:
    diagnostics: list[Diagnostic]
    report: RunReport
    syntax_errors: list[tuple[str, SyntaxIssue]] = field(default_factory=list)
    table: Optional[ProgramTable] = None
    engine: Optional[DataflowEngine] = None

    @property
    def unsuppressed(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if not d.suppressed]

    @property
    def exit_code(self) -> int:
        if self.syntax_errors or any(d.code is Code.INTERNAL for d in self.unsuppressed):
            return 2
        return 1 if self.unsuppressed else 0


def parse_all(sources: Sequence[tuple[str, str]]) -> tuple[list[A.SourceFile], list[tuple[str, SyntaxIssue]]]:
    files: list[A.SourceFile] = []
    errors: list[tuple[str, SyntaxIssue]] = []
    for path, text in [(STD_PATH, std_source()), *sources]:
        r = parse_source(text, path)
        errors += [(path, e) for e in r.errors]
        if r.file is not None and not r.errors:
            files.append(r.file)
    return files, errors


def analyze(sources: Sequence[tuple[str, str]], settings: Settings) -> RunResult:
    """Run every phase over ``sources`` (the std prelude is added automatically)."""
    t0 = time.perf_counter()
    report = RunReport(files=len(sources))
    files, syntax = parse_all(sources)
    report.parse_seconds = time.perf_counter() - t0
    if syntax:
        report.total_seconds = time.perf_counter() - t0
        return RunResult([], report, syntax)

    table = build_program(files)
    models = ModelSet.load(settings.library_model_files)
    boundary = Boundary(table, settings.boundary, models)
    handlers = HandlerChain.default(boundary, settings.stream_types) if settings.handlers_enabled \
        else HandlerChain([])
    engine = DataflowEngine(table, boundary, handlers)

    diags: list[Diagnostic] = []
    for d in table.diagnostics:
        owner = d.scope[0] if d.scope else None
        cls = table.classes.get(_qualified(owner, table)) if owner is not None else None
        if d.code is Code.CONFLICTING_ANNOT and cls is not None and not cls.annotated:
            continue
        diags.append(d)
    clean_resolution = not any(d.code is Code.RESOLUTION for d in diags)
    for cls in table.sorted_classes():
        if not cls.annotated:
            continue
        report.methods_analyzed += len(cls.procedures())
        diags += check_overrides(cls, boundary)
        init_diags, skip = check_class_init(cls, engine)
        diags += init_diags
        diags += check_class_bodies(cls, engine, skip)
    if not clean_resolution:
        report.warnings.append("resolution errors present; results may be incomplete")

    apply_suppressions(diags, table, report.warnings)
    sites = []
    for call, callee, path in engine.assertion_sites.values():
        sites.append({"file": path, "line": call.span.line, "col": call.span.col, "method": callee.qname})
        diags.append(_assertion_diagnostic(call, callee, path, boundary))
    report.assertion_suppressions = sorted(sites, key=lambda s: (s["file"], s["line"], s["col"]))
    diags = dedupe_sorted(diags)
    report.warnings += handlers.warnings
    report.dataflow_computations = engine.computations
    counts = Counter(d.code.value for d in diags if not d.suppressed)
    report.diagnostics_by_code = dict(sorted(counts.items()))
    report.suppressed = sum(1 for d in diags if d.suppressed)
    report.total_seconds = time.perf_counter() - t0
    return RunResult(diags, report, [], table, engine)


def _qualified(decl: object, table: ProgramTable) -> str:
    for qn, c in table.classes.items():
        if c.decl is decl:
            return qn
    return ""


def _assertion_diagnostic(call: A.MethodCall, callee, path: str, boundary: Boundary) -> Diagnostic:
    """A retained, suppressed record of a possibly-null value passed to an assertion method."""
    b = boundary.behavior(callee)
    arg = call.args[b.arg] if b is not None and b.arg is not None and b.arg < len(call.args) else call
    return Diagnostic(
        Code.PARAM_NULLABLE, path, arg.span,
        f"possibly-null value passed to assertion method {callee.owner.name}.{callee.name}; "
        "treated as non-null afterwards",
        suppressed=True, suppression_reason="assertion-model")


def check_paths(paths: Sequence[str | Path], settings: Settings) -> RunResult:
    return analyze(collect_sources(paths), settings)


def render_text(result: RunResult, show_suppressed: bool = False) -> str:
    lines = []
    for path, e in result.syntax_errors:
        lines.append(f"{path}:{e.span.line}:{e.span.col}: error[SYNTAX] {e.message}")
    for d in result.diagnostics:
        if d.suppressed and not show_suppressed:
            continue
        lines.append(d.render())
    lines.append(result.report.summary())
    return "\n".join(lines) + "\n"


def render_json(result: RunResult, show_suppressed: bool = True, timings: bool = False) -> dict:
    diags = [d.to_json() for d in result.diagnostics if show_suppressed or not d.suppressed]
    syntax = [{"file": p, "line": e.span.line, "col": e.span.col, "code": "SYNTAX", "message": e.message}
              for p, e in result.syntax_errors]
    return {"diagnostics": syntax + diags, "report": result.report.to_json(timings)}
