from __future__ import annotations

import random

from minij_null.boundary import Boundary, BoundaryConfig, ModelSet
from minij_null.checks import BodyChecker
from minij_null.config import settings_from_dict
from minij_null.dataflow import cfg as C
from minij_null.dataflow.analysis import DataflowEngine
from minij_null.dataflow.paths import AccessPath, Defaults, NullnessStore
from minij_null.diagnostics import Code
from minij_null.driver import analyze, collect_sources
from minij_null.semantics.nullness import Nullness

from conftest import CORPUS, codes, run
from oracles import generate_methods, render_method

N, NN, NA = Nullness.NULL, Nullness.NONNULL, Nullness.NULLABLE


def method_result(r, name: str, cls: str = "t.A"):
    [m] = r.table.classes[cls].methods[name]
    return r.engine.result_for(m)


def kinds_of(res) -> list[str]:
    return [n.kind for n in res.cfg.nodes]


# -- CFG shapes -----------------------------------------------------------------

def test_straight_line_has_k_plus_two_nodes():
    for k in range(0, 6):
        body = "\n".join(f"Object x{i} = null;" for i in range(k))
        r = run(f"package t;\nclass A {{ void m() {{\n{body}\n}} }}\n")
        res = method_result(r, "m")
        assert len(res.cfg.nodes) == k + 2
        assert kinds_of(res) == [C.ENTRY] + [C.LOCAL] * k + [C.EXIT]


def test_if_else_is_a_diamond():
    r = run("""
        package t;
        class A { void m(boolean c) { Object x; if (c) { x = null; } else { x = new Object(); } x.hashCode(); } }
    """)
    res = method_result(r, "m")
    cond = next(n for n in res.cfg.nodes if n.kind == C.COND)
    assert sorted(lab for _, lab in cond.succs) == ["f", "t"]
    t_node = next(s for s, lab in cond.succs if lab == "t")
    f_node = next(s for s, lab in cond.succs if lab == "f")
    [(jt, _)] = t_node.succs
    [(jf, _)] = f_node.succs
    assert jt is jf and jt.kind == C.EXPR and len(jt.preds) == 2


def test_ternary_is_hoisted_into_temps():
    r = run("""
        package t;
        class A { void m(boolean c, @Nullable Object p) { Object x = c ? p : new Object(); } }
    """)
    res = method_result(r, "m")
    assert kinds_of(res).count(C.TEMP) == 2
    assert len(res.cfg.temps) == 1
    local = next(n for n in res.cfg.nodes if n.kind == C.LOCAL)
    assert len(local.preds) == 2


def test_node_ids_are_topological_for_acyclic_code():
    rng = random.Random(11)
    for m in generate_methods(rng, 20):
        lines = ["package t;", "class R {", "@Nullable Object f;", "@Nullable Object get() { return this.f; }"]
        lines += render_method(m, len(lines) + 1)
        lines.append("}")
        r = run("\n".join(lines), path="t/R.mj")
        res = method_result(r, m.name, "t.R")
        for a, b, _ in res.cfg.edges():
            assert a.id < b.id


# -- transfer examples ----------------------------------------------------------

def test_branches_join_to_nullable():
    r = run("""
        package t;
        class A { void m(boolean c) { Object x; if (c) { x = null; } else { x = new Object(); } x.hashCode(); } }
    """)
    assert codes(r) == [(3, "DEREF_NULLABLE")]
    res = method_result(r, "m")
    use = next(n for n in res.cfg.nodes if n.kind == C.EXPR)
    assert res.store_before(use).get(AccessPath("x"), res.defaults) is NA


def test_getter_refinement_and_setter_purity():
    r = run("""
        package t;
        class A {
            @Nullable Object foo;
            @Nullable Object getFoo() { return this.foo; }
            void setFoo(@Nullable Object v) { this.foo = v; }
            void m(A a) {
                if (a.getFoo() != null) { a.getFoo().hashCode(); }
                if (a.foo != null) { a.setFoo(null); a.foo.hashCode(); }
            }
        }
    """)
    assert codes(r) == []


def test_refinement_only_touches_the_tested_path():
    r = run("""
        package t;
        class A { void m(@Nullable Object p, @Nullable Object q) { if (p != null) { p.hashCode(); q.hashCode(); } } }
    """)
    assert codes(r) == [(3, "DEREF_NULLABLE")]
    res = method_result(r, "m")
    [cond] = [n for n in res.cfg.nodes if n.kind == C.COND]
    t_store = res.out[cond.id]["t"]
    assert t_store.get(AccessPath("p"), res.defaults) is NN
    assert t_store.get(AccessPath("q"), res.defaults) is NA
    assert res.out[cond.id]["f"].get(AccessPath("p"), res.defaults) is N


def test_write_kills_facts_about_extensions():
    r = run("""
        package t;
        class Node { @Nullable Node next; @Nullable Object v; }
        class A {
            void m(Node n, Node other) {
                if (n.next != null && n.next.v != null) {
                    n.next = other;
                    n.next.v.hashCode();
                }
            }
        }
    """)
    assert codes(r) == [(8, "DEREF_NULLABLE")]
    res = method_result(r, "m")
    assign = next(n for n in res.cfg.nodes if n.kind == C.ASSIGN)
    before, after = res.store_before(assign), res.store_after(assign)
    ext = AccessPath("n", ("next", "v"))
    assert before.get(ext, res.defaults) is NN
    assert not after.has(ext)
    assert after.get(AccessPath("n", ("next",)), res.defaults) is NN


def test_kill_set_law_on_random_stores():
    rng = random.Random(5)
    links = ["f", "g", "h()"]
    d = Defaults()
    for _ in range(300):
        facts = {}
        for _ in range(rng.randint(0, 8)):
            p = AccessPath(rng.choice(["x", "y"]), tuple(rng.choice(links) for _ in range(rng.randint(0, 3))))
            facts[p] = rng.choice([N, NN])
        s = NullnessStore(facts)
        target = AccessPath(rng.choice(["x", "y"]), tuple(rng.choice(links) for _ in range(rng.randint(0, 2))))
        v = rng.choice([N, NN, NA])
        t = s.set(target, v, d, kill=True)
        assert t.get(target, d) is v
        for p in facts:
            if p.extends(target):
                assert not t.has(p)
            elif p != target:
                assert t.get(p, d) is facts[p]


def test_null_test_sets_rather_than_prunes():
    # a null test overwrites the tested path on each branch; it never marks a branch dead
    r = run("""
        package t;
        class A { void m() { Object x = null; if (x != null) { x.hashCode(); } } }
    """)
    assert codes(r) == []
    res = method_result(r, "m")
    expr = next(n for n in res.cfg.nodes if n.kind == C.EXPR)
    assert res.store_before(expr).get(AccessPath("x"), res.defaults) is NN


def test_constant_false_condition_is_unreachable():
    r = run("""
        package t;
        class A { void m() { Object x = null; if (false) { x.hashCode(); } } }
    """)
    assert codes(r) == []
    res = method_result(r, "m")
    expr = next(n for n in res.cfg.nodes if n.kind == C.EXPR)
    assert res.store_before(expr) is None


def test_while_loop_fixpoint_matches_unrolling():
    r = run("""
        package t;
        class A {
            void m(boolean c) {
                Object a = new Object();
                Object b = new Object();
                while (c) { a = b; b = null; }
                a.hashCode();
            }
        }
    """)
    # unrollings: 0 -> a NN; 1 -> a NN (b was NN); 2 -> a Null; so the join is Nullable
    assert codes(r) == [(8, "DEREF_NULLABLE")]
    res = method_result(r, "m")
    use = next(n for n in res.cfg.nodes if n.kind == C.EXPR)
    st = res.store_before(use)
    assert st.get(AccessPath("a"), res.defaults) is NA
    assert st.get(AccessPath("b"), res.defaults) is NA


def test_while_loop_with_stable_fact_stays_precise():
    r = run("""
        package t;
        class A {
            void m(boolean c) {
                Object a = new Object();
                while (c) { a = new Object(); }
                a.hashCode();
            }
        }
    """)
    assert codes(r) == []


# -- join soundness ------------------------------------------------------------

def corpus_run():
    data = {"annotatedPackages": r"paper\..*|extra\..*", "unannotatedSubPackages": r"paper\.lib|extra\.lib",
            "unannotatedClasses": ["extra.boundary.Blacklisted"], "treatGeneratedAsUnannotated": True,
            "acknowledgeRestrictiveAnnotations": True, "jarInferEnabled": True,
            "libraryModelFiles": [str(CORPUS / "models.json")]}
    return analyze(collect_sources([CORPUS]), settings_from_dict(data))


def test_fixpoint_stores_dominate_predecessor_outputs():
    r = corpus_run()
    checked = 0
    for cls in r.table.sorted_classes():
        if not cls.annotated:
            continue
        for m in cls.procedures():
            if m.body is None:
                continue
            for res in r.engine.result_for(m).all_results():
                for n in res.cfg.nodes:
                    if n is res.cfg.entry:
                        continue
                    st = res.before[n.id]
                    for p, lab in n.preds:
                        o = res.out[p.id].get(lab)
                        if o is None:
                            continue
                        assert st is not None and o.leq(st, res.defaults), (m.qname, n)
                        checked += 1
    assert checked > 100


# -- caching ---------------------------------------------------------------------

INIT_EXAMPLE = (CORPUS / "paper" / "init_example.mj").read_text()


def fresh_engine(text: str, path: str = "paper/init/InitExample.mj"):
    from minij_null.driver import parse_all
    from minij_null.semantics.program import build_program

    files, errors = parse_all([(path, text)])
    assert not errors
    table = build_program(files)
    boundary = Boundary(table, BoundaryConfig(annotated_packages=r"paper\..*"), ModelSet.load())
    return table, DataflowEngine(table, boundary)


def test_result_is_computed_once_per_method():
    table, engine = fresh_engine(INIT_EXAMPLE)
    [ctor] = table.classes["paper.init.InitExample"].ctors
    assert engine.computations == 0
    a = engine.result_for(ctor)
    b = engine.result_for(ctor)
    assert a is b and engine.computations == 1
    assert engine.is_cached(ctor)


def test_unrequested_method_is_never_analyzed():
    table, engine = fresh_engine(INIT_EXAMPLE)
    [cond] = table.classes["paper.init.InitExample"].methods["cond"]
    assert not engine.is_cached(cond) and engine.computations == 0


def test_full_run_analyzes_each_method_once():
    r = corpus_run()
    assert r.report.dataflow_computations == r.report.methods_analyzed > 0
    r2 = run(INIT_EXAMPLE, path="paper/init/InitExample.mj", annotatedPackages=r"paper\..*")
    assert r2.report.dataflow_computations == r2.report.methods_analyzed == 4


# -- determinism, dumps, iteration bound --------------------------------------------

def test_dump_format_and_determinism():
    r = run("""
        package t;
        class A { void m(@Nullable Object p) { if (p != null) { p.hashCode(); } } }
    """)
    text = method_result(r, "m").dump("== m ==")
    again = run("""
        package t;
        class A { void m(@Nullable Object p) { if (p != null) { p.hashCode(); } } }
    """)
    assert text == method_result(again, "m").dump("== m ==")
    lines = text.splitlines()
    assert lines[0] == "== m =="
    assert lines[1] == "n0 ENTRY L0: "
    assert "n2 EXPR L3: p=NonNull" in lines
    assert lines[-1].startswith("n3 EXIT")


def test_iteration_bound_reports_internal():
    table, _ = fresh_engine("""package t;
class A {
  void m(boolean c) {
    Object a = null;
    while (c) { a = new Object(); }
  }
}
""", path="t/A.mj")
    boundary = Boundary(table, BoundaryConfig(annotated_packages="t"), ModelSet.load())
    engine = DataflowEngine(table, boundary, max_visits=3)
    [m] = table.classes["t.A"].methods["m"]
    res = engine.result_for(m)
    assert res.aborted
    diags = BodyChecker(engine).check_result(res, "t/A.mj", ())
    assert [d.code for d in diags] == [Code.INTERNAL]
