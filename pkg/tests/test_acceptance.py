"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (the lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import io
import itertools
import json
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from minij_null.cli import bench, core_backend, diff_counts, main  # noqa: E402
from minij_null.config import load_settings, settings_from_dict  # noqa: E402
from minij_null.driver import analyze, collect_sources  # noqa: E402
from minij_null.harness import run_expect  # noqa: E402
from minij_null.semantics.nullness import JOIN, MEET, Nullness  # noqa: E402
from minij_null.synth import SYNTH_CONFIG, generate  # noqa: E402

from conftest import ACCEPTANCE, CORPUS  # noqa: E402
from oracles import check_dataflow_oracle, check_init_oracle  # noqa: E402

# tolerances
CORPUS_SECONDS = 5.0
ORACLE_METHODS = 200
ORACLE_MAX_NODES = 12
MONOTONE_CASES = 1000
INIT_CLASSES = 200
DATAFLOW_RATIO = 1.0
SYNTH_LOC = 50_000
BENCH_REPS = 5
OVERHEAD_RATIO = 2.0
CHECK_SECONDS = 10.0

SETTINGS = load_settings(CORPUS / "minij-null.json")
BOUNDARY_SUBSET = [CORPUS / "paper" / "boundary.mj", CORPUS / "paper" / "boundary_lib.mj",
                   CORPUS / "extra" / "boundary_stages.mj", CORPUS / "extra" / "lib"]


def _codes(run, rel: str) -> list[tuple[int, str]]:
    path = (CORPUS / rel).as_posix()
    return sorted((d.line, d.code.value) for d in run.unsuppressed if d.file == path)


def criterion_1():
    t0 = time.perf_counter()
    opt = run_expect(CORPUS, SETTINGS, False)
    pes = run_expect(CORPUS, SETTINGS, True)
    elapsed = time.perf_counter() - t0
    o, p = opt.run, pes.run
    log = _codes(o, "paper/overview_log.mj")
    named = {
        "log(null)": (8, "PARAM_NULLABLE") in log,
        "guarded log": not [x for x in log if 12 <= x[0] <= 21],
        "override": _codes(o, "paper/override.mj") == [(9, "OVERRIDE_RETURN"), (10, "OVERRIDE_PARAM")],
        "init example": _codes(o, "paper/init_example.mj") == [(7, "FIELD_NO_INIT"), (10, "USE_BEFORE_INIT")],
        "purity": _codes(o, "paper/purity.mj") == [],
        "boundary": _codes(o, "paper/boundary.mj") == [] and _codes(p, "paper/boundary.mj") != [],
        "contract trio": _codes(o, "paper/contracts.mj") == [(33, "DEREF_NULLABLE")],
        "streams": _codes(o, "paper/streams.mj") == [],
        "broken chain": [c for _, c in _codes(o, "paper/broken_chain.mj")] == ["DEREF_NULLABLE"],
    }
    ok = opt.passed and pes.passed and all(named.values()) and elapsed < CORPUS_SECONDS
    files = sum(f.passed for f in opt.files)
    bad = [k for k, v in named.items() if not v]
    return ok, (f"{files}/{len(opt.files)} files exact (optimistic), "
                f"{sum(f.passed for f in pes.files)}/{len(pes.files)} (pessimistic); "
                f"named examples {'ok' if not bad else 'failing: ' + ', '.join(bad)}; "
                f"{elapsed:.2f}s for both modes (limit {CORPUS_SECONDS}s)")


def criterion_2():
    from test_boundary import DECISIONS, boundary

    table, b = boundary()
    wrong = []
    for outcome, qname, name, partition, provenance, nullness in DECISIONS:
        [m] = table.classes[qname].methods[name]
        reason, res = b.explain_param(m, 0)
        if (reason, res.provenance, res.nullness) != (partition, provenance, nullness):
            wrong.append(outcome)
    return not wrong and len(DECISIONS) == 8, f"{len(DECISIONS) - len(wrong)}/8 decision outcomes recorded exactly"


def criterion_3():
    checked, points, mismatches = check_dataflow_oracle(count=ORACLE_METHODS, max_nodes=ORACLE_MAX_NODES)
    ok = checked >= ORACLE_METHODS and not mismatches
    return ok, f"{checked} acyclic methods (<= {ORACLE_MAX_NODES} nodes), {points} points, {len(mismatches)} mismatches"


def criterion_4():
    from minij_null.dataflow.analysis import _Ctx
    from test_lattice_monotonicity import CLS, ENGINE, FIELDS, NODES, PATHS, RES, REACHABLE_VALUES, _store

    ALL = list(Nullness)
    law_failures = 0
    for a, b in itertools.product(ALL, ALL):
        laws = [
            JOIN[a][b] is JOIN[b][a], MEET[a][b] is MEET[b][a],
            JOIN[a][MEET[a][b]] is a, MEET[a][JOIN[a][b]] is a,
            (JOIN[a][b] is b) == a.leq(b),
        ]
        law_failures += sum(not x for x in laws)
    rng = random.Random(4)
    defaults = RES.defaults
    cases, violations = 0, 0
    while cases < MONOTONE_CASES + 200:
        hi = {p: rng.choice(REACHABLE_VALUES) for p in PATHS}
        lo = {p: rng.choice([u for u in REACHABLE_VALUES if u.leq(v)]) for p, v in hi.items()}
        hi_def = {f for f in FIELDS if hi[f] is Nullness.NONNULL and rng.random() < 0.5}
        lo_def = hi_def | {f for f in FIELDS if lo[f] is Nullness.NONNULL and rng.random() < 0.5}
        s1, s2 = _store(lo, lo_def, defaults), _store(hi, hi_def, defaults)
        n = rng.choice(NODES)
        ctx = _Ctx(ENGINE, defaults, [], CLS)
        for label in {lab for _, lab in n.succs}:
            o1, o2 = ENGINE.transfer(n, s1, label, ctx), ENGINE.transfer(n, s2, label, ctx)
            if o1 is not None and (o2 is None or not o1.leq(o2, defaults)):
                violations += 1
        cases += 1
    ok = law_failures == 0 and violations == 0
    return ok, f"16 join/meet pairs, {law_failures} law failures; {cases} transfer cases, {violations} violations"


def criterion_5():
    checked, fields, mismatches = check_init_oracle(count=INIT_CLASSES)
    r = analyze(collect_sources([CORPUS]), SETTINGS)
    gaps = {name: _codes(r, f"extra/{name}") for name in ("unsound_early_return.mj", "unsound_helper_read.mj")}
    ok = checked >= INIT_CLASSES and not mismatches and all(v == [] for v in gaps.values())
    return ok, (f"{checked} classes, {fields} fields, {len(mismatches)} mismatches; "
                f"unsoundness files silent: {all(v == [] for v in gaps.values())}")


def criterion_6():
    r = analyze(collect_sources([CORPUS]), SETTINGS)
    b = bench(collect_sources([CORPUS]), SETTINGS, 3)
    ok = r.report.dataflow_computations == r.report.methods_analyzed and b["dataflow_ratio"] <= DATAFLOW_RATIO
    return ok, (f"{r.report.dataflow_computations} computations for {r.report.methods_analyzed} methods; "
                f"bench ratio {b['dataflow_ratio']}")


def criterion_7():
    full = diff_counts([str(CORPUS)], SETTINGS)
    sub = diff_counts([str(p) for p in BOUNDARY_SUBSET], SETTINGS)
    ok = full["pessimistic"] >= full["optimistic"] and sub["pessimistic"] > sub["optimistic"]
    return ok, (f"corpus {full['optimistic']} -> {full['pessimistic']}; "
                f"boundary subset {sub['optimistic']} -> {sub['pessimistic']}")


def criterion_8():
    sources = generate(SYNTH_LOC)
    b = bench(sources, settings_from_dict(SYNTH_CONFIG), BENCH_REPS)
    ok = b["loc"] >= SYNTH_LOC and b["overhead_ratio"] <= OVERHEAD_RATIO and b["check_median_s"] <= CHECK_SECONDS
    return ok, (f"{b['loc']} lines, {BENCH_REPS} reps, {b['backend']} core: parse {b['parse_median_s']:.2f}s, "
                f"check {b['check_median_s']:.2f}s, ratio {b['overhead_ratio']:.2f} "
                f"(limits {OVERHEAD_RATIO}x, {CHECK_SECONDS}s)")


def _cli(*argv: str) -> str:
    out = io.StringIO()
    main(list(argv), out, io.StringIO())
    return out.getvalue()


def criterion_9():
    same = []
    for fmt in ("text", "json"):
        for mode in ("--no-pessimistic", "--pessimistic"):
            a = _cli("check", "--format", fmt, "--show-suppressed", mode, str(CORPUS))
            b = _cli("check", "--format", fmt, "--show-suppressed", mode, str(CORPUS))
            same.append(a.encode() == b.encode())
    json.loads(_cli("check", "--format", "json", str(CORPUS)))
    return all(same), f"{sum(same)}/4 output pairs byte-identical (text/json x both modes)"


CRITERIA = {
    1: ("reference corpus", criterion_1),
    2: ("boundary pipeline coverage", criterion_2),
    3: ("dataflow oracle", criterion_3),
    4: ("lattice and monotonicity", criterion_4),
    5: ("initialization oracle", criterion_5),
    6: ("caching discipline", criterion_6),
    7: ("mode monotonicity", criterion_7),
    8: ("performance", criterion_8),
    9: ("determinism", criterion_9),
}


def evaluate(n: int) -> tuple[bool, str]:
    title, fn = CRITERIA[n]
    ok, detail = fn()
    line = f"{'PASS' if ok else 'FAIL'} criterion {n} ({title}): {detail}"
    ACCEPTANCE[n] = line
    print(line)
    return ok, line


def test_criterion_1():
    ok, line = evaluate(1)
    assert ok, line


def test_criterion_2():
    ok, line = evaluate(2)
    assert ok, line


def test_criterion_3():
    ok, line = evaluate(3)
    assert ok, line


def test_criterion_4():
    ok, line = evaluate(4)
    assert ok, line


def test_criterion_5():
    ok, line = evaluate(5)
    assert ok, line


def test_criterion_6():
    ok, line = evaluate(6)
    assert ok, line


def test_criterion_7():
    ok, line = evaluate(7)
    assert ok, line


def test_criterion_8():
    ok, line = evaluate(8)
    assert ok, line


def test_criterion_9():
    ok, line = evaluate(9)
    assert ok, line


if __name__ == "__main__":
    print(f"core: {core_backend()}")
    results = [evaluate(n)[0] for n in CRITERIA]
    sys.exit(0 if all(results) else 1)
