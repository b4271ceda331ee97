"""Command-line entry point: ``minij-null check|expect|diff|bench``."""

from __future__ import annotations

import argparse
import gc
import json
import statistics
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional, Sequence

from . import __version__
from .boundary import ConfigError
from .config import Overrides, Settings, resolve_settings, settings_from_dict
from .diagnostics import Code
from .driver import RunResult, analyze, collect_sources, parse_all, render_json, render_text
from .harness import HarnessError, run_expect

EXIT_OK, EXIT_DIAGNOSTICS, EXIT_ERROR = 0, 1, 2


@contextmanager
def gc_paused() -> Iterator[None]:
    """Suspend cyclic garbage collection; ASTs and graphs are allocated in bulk and kept."""
    was = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was:
            gc.enable()


def core_backend() -> str:
    from .dataflow import analysis

    return "compiled" if not analysis.__file__.endswith(".py") else "interpreted"


def _bool_flag(p: argparse.ArgumentParser, name: str, dest: str, help: str) -> None:
    p.add_argument(f"--{name}", dest=dest, action=argparse.BooleanOptionalAction, default=None, help=help)


def _add_config_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration (overrides the config file)")
    g.add_argument("--config", metavar="F", help="JSON config file")
    g.add_argument("--annotated-packages", metavar="REGEX")
    g.add_argument("--unannotated-subpackages", metavar="REGEX")
    g.add_argument("--unannotated-class", dest="unannotated_classes", action="append", metavar="QNAME")
    _bool_flag(g, "treat-generated-as-unannotated", "treat_generated_as_unannotated", "")
    _bool_flag(g, "acknowledge-restrictive", "acknowledge_restrictive", "honor stricter annotations in unannotated code")
    _bool_flag(g, "jarinfer", "jarinfer_enabled", "infer non-null parameters of unannotated methods")
    _bool_flag(g, "pessimistic", "pessimistic_mode", "invert the optimistic call-site defaults")
    g.add_argument("--library-models", dest="library_model_files", action="append", default=[], metavar="F")
    g.add_argument("--stream-type", dest="stream_types", action="append", metavar="QNAME")


def _settings(args: argparse.Namespace, paths: Sequence[str]) -> Settings:
    if args.annotated_packages and not args.config:
        try:
            base = resolve_settings(None, paths)
        except ConfigError:
            base = settings_from_dict({"annotatedPackages": args.annotated_packages})
    else:
        base = resolve_settings(args.config, paths)
    ov = Overrides(
        annotated_packages=args.annotated_packages,
        unannotated_subpackages=args.unannotated_subpackages,
        unannotated_classes=args.unannotated_classes,
        treat_generated_as_unannotated=args.treat_generated_as_unannotated,
        acknowledge_restrictive=args.acknowledge_restrictive,
        jarinfer_enabled=args.jarinfer_enabled,
        pessimistic_mode=args.pessimistic_mode,
        library_model_files=[str(Path(f).resolve()) for f in args.library_model_files],
        stream_types=args.stream_types,
    )
    return ov.apply(base)


def _run(paths: Sequence[str], settings: Settings) -> RunResult:
    with gc_paused():
        return analyze(collect_sources(paths), settings)


def _dump(result: RunResult, name: str, out) -> bool:
    if result.table is None or result.engine is None:
        return False
    found = False
    for cls in result.table.sorted_classes():
        for m in cls.procedures():
            if name in (m.qname, f"{cls.name}.{m.name}", m.name):
                found = True
                res = result.engine.result_for(m)
                out.write(res.dump(f"== {m.qname}/{len(m.params)} =="))
    return found


def cmd_check(args: argparse.Namespace, out, err) -> int:
    settings = _settings(args, args.paths)
    result = _run(args.paths, settings)
    if args.format == "json":
        doc = render_json(result, show_suppressed=True, timings=args.timings)
        out.write(json.dumps(doc, indent=2, sort_keys=False) + "\n")
    else:
        out.write(render_text(result, args.show_suppressed))
        if args.timings:
            r = result.report
            out.write(f"parse {r.parse_seconds:.3f}s; total {r.total_seconds:.3f}s\n")
    for w in result.report.warnings:
        err.write(f"warning: {w}\n")
    if args.dump_dataflow:
        if not _dump(result, args.dump_dataflow, out):
            err.write(f"error: no analyzed method named {args.dump_dataflow!r}\n")
            return EXIT_ERROR
    return result.exit_code


def cmd_expect(args: argparse.Namespace, out, err) -> int:
    settings = _settings(args, [args.dir])
    with gc_paused():
        res = run_expect(args.dir, settings, True if args.pessimistic_mode else None)
    out.write(res.render())
    if any(d.code is Code.INTERNAL for d in res.run.unsuppressed):
        return EXIT_ERROR
    return EXIT_OK if res.passed else EXIT_DIAGNOSTICS


def diff_counts(paths: Sequence[str], settings: Settings) -> dict:
    sources = collect_sources(paths)
    with gc_paused():
        opt = analyze(sources, settings.with_boundary(pessimistic_mode=False))
        pes = analyze(sources, settings.with_boundary(pessimistic_mode=True))
    codes = sorted(set(opt.report.diagnostics_by_code) | set(pes.report.diagnostics_by_code))
    rows = {c: (opt.report.diagnostics_by_code.get(c, 0), pes.report.diagnostics_by_code.get(c, 0)) for c in codes}
    return {
        "optimistic": opt.report.unsuppressed,
        "pessimistic": pes.report.unsuppressed,
        "delta": pes.report.unsuppressed - opt.report.unsuppressed,
        "by_code": {c: {"optimistic": a, "pessimistic": b, "delta": b - a} for c, (a, b) in rows.items()},
        "monotone": pes.report.unsuppressed >= opt.report.unsuppressed,
        "syntax_errors": bool(opt.syntax_errors),
    }


def cmd_diff(args: argparse.Namespace, out, err) -> int:
    settings = _settings(args, args.paths)
    d = diff_counts(args.paths, settings)
    if d["syntax_errors"]:
        err.write("error: syntax errors; run check for details\n")
        return EXIT_ERROR
    if args.format == "json":
        out.write(json.dumps(d, indent=2) + "\n")
    else:
        out.write(f"{'code':<18}{'optimistic':>12}{'pessimistic':>13}{'delta':>8}\n")
        for c, row in d["by_code"].items():
            out.write(f"{c:<18}{row['optimistic']:>12}{row['pessimistic']:>13}{row['delta']:>+8}\n")
        out.write(f"{'total':<18}{d['optimistic']:>12}{d['pessimistic']:>13}{d['delta']:>+8}\n")
    if not d["monotone"]:
        err.write("error: pessimistic mode reported fewer diagnostics than optimistic mode\n")
        return EXIT_DIAGNOSTICS
    return EXIT_OK


def bench(sources: list[tuple[str, str]], settings: Settings, reps: int) -> dict:
    """Median wall time of parse-only and full check, plus the caching ratio."""
    parse_times, full_times = [], []
    result: Optional[RunResult] = None
    for _ in range(reps):
        with gc_paused():
            t = time.perf_counter()
            parse_all(sources)
            parse_times.append(time.perf_counter() - t)
        gc.collect()
        with gc_paused():
            t = time.perf_counter()
            result = analyze(sources, settings)
            full_times.append(time.perf_counter() - t)
        gc.collect()
    assert result is not None
    r = result.report
    loc = sum(1 for _, text in sources for line in text.splitlines() if line.strip())
    p, f = statistics.median(parse_times), statistics.median(full_times)
    return {
        "files": r.files,
        "loc": loc,
        "repetitions": reps,
        "backend": core_backend(),
        "parse_median_s": round(p, 4),
        "check_median_s": round(f, 4),
        "overhead_ratio": round(f / p, 3) if p > 0 else 0.0,
        "methods_analyzed": r.methods_analyzed,
        "dataflow_computations": r.dataflow_computations,
        "dataflow_ratio": round(r.dataflow_computations / r.methods_analyzed, 4) if r.methods_analyzed else 0.0,
        "unsuppressed": r.unsuppressed,
    }


def cmd_bench(args: argparse.Namespace, out, err) -> int:
    if args.reps < 3:
        err.write("error: --reps must be at least 3\n")
        return EXIT_ERROR
    if args.synthetic:
        from .synth import SYNTH_CONFIG, generate

        sources = generate(args.synthetic)
        settings = settings_from_dict(SYNTH_CONFIG)
    else:
        if not args.paths:
            err.write("error: give paths or --synthetic LOC\n")
            return EXIT_ERROR
        settings = _settings(args, args.paths)
        sources = collect_sources(args.paths)
    b = bench(sources, settings, args.reps)
    if args.format == "json":
        out.write(json.dumps(b, indent=2) + "\n")
    else:
        out.write(f"{b['files']} files, {b['loc']} lines, {b['repetitions']} repetitions, {b['backend']} core\n")
        out.write(f"parse-only median {b['parse_median_s']:.3f}s; full check median {b['check_median_s']:.3f}s; "
                  f"ratio {b['overhead_ratio']:.2f}x\n")
        out.write(f"dataflow computations {b['dataflow_computations']} / methods {b['methods_analyzed']} "
                  f"= {b['dataflow_ratio']:.3f}\n")
    if b["dataflow_ratio"] > 1.0:
        err.write("error: a method was analyzed more than once\n")
        return EXIT_DIAGNOSTICS
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="minij-null", description="Null-safety checker for MiniJ.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="check files or directories")
    c.add_argument("paths", nargs="+")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.add_argument("--show-suppressed", action="store_true")
    c.add_argument("--dump-dataflow", metavar="M", help="print per-node stores of method M")
    c.add_argument("--timings", action="store_true")
    _add_config_args(c)

    e = sub.add_parser("expect", help="run the //! expectation harness over a corpus directory")
    e.add_argument("dir")
    _add_config_args(e)

    d = sub.add_parser("diff", help="compare optimistic and pessimistic diagnostic counts")
    d.add_argument("paths", nargs="+")
    d.add_argument("--format", choices=("text", "json"), default="text")
    _add_config_args(d)

    b = sub.add_parser("bench", help="time parse-only against a full check")
    b.add_argument("paths", nargs="*")
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--synthetic", type=int, metavar="LOC", help="benchmark a generated corpus of about LOC lines")
    b.add_argument("--format", choices=("text", "json"), default="text")
    _add_config_args(b)
    return p


_COMMANDS = {"check": cmd_check, "expect": cmd_expect, "diff": cmd_diff, "bench": cmd_bench}


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args, out, err)
    except (ConfigError, HarnessError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_ERROR
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
