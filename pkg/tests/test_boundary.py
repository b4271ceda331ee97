from __future__ import annotations

import json
import textwrap

import pytest

from minij_null.boundary import (
    CALL_SITE, OVERRIDE_SUPER, Boundary, BoundaryConfig, ConfigError, ModelSet, classify, package_matches,
    parse_models,
)
from minij_null.dataflow.jarinfer import mini_jarinfer
from minij_null.driver import collect_sources, parse_all
from minij_null.frontend import ast as A
from minij_null.semantics.nullness import Nullness
from minij_null.semantics.program import build_program

from conftest import CORPUS, codes, run

NN, NA = Nullness.NONNULL, Nullness.NULLABLE

LOCAL = ("extra/boundary/Local.mj", """package extra.boundary;
class Local { void take(Object o) { } }
""")
OUTSIDE = ("other/Outside.mj", "package other;\nclass Outside { void take(Object o) { } }\n")

CONFIG = dict(
    annotated_packages=r"extra\..*",
    unannotated_subpackages=r"extra\.lib",
    unannotated_classes=("extra.boundary.Blacklisted",),
    treat_generated_as_unannotated=True,
    acknowledge_restrictive=True,
    jarinfer_enabled=True,
)


def boundary(**changes):
    sources = collect_sources([CORPUS / "extra" / "boundary_stages.mj", CORPUS / "extra" / "lib"])
    files, errors = parse_all(sources + [LOCAL, OUTSIDE])
    assert not errors
    table = build_program(files)
    conf = dict(CONFIG)
    conf.update(changes)
    models = ModelSet.load([CORPUS / "models.json"])
    return table, Boundary(table, BoundaryConfig(**conf), models)


def method(table, qname: str, name: str):
    [m] = table.classes[qname].methods[name]
    return m


# one row per decision outcome: class, method, partition reason, provenance, nullness at the call site
DECISIONS = [
    ("annotated default", "extra.boundary.Local", "take", "annotated", "nnel-default", NN),
    ("subpackage exclusion", "extra.lib.Plain", "take", "unannotated-subpackage", "optimistic-default", NA),
    ("class blacklist", "extra.boundary.Blacklisted", "take", "unannotated-class", "optimistic-default", NA),
    ("generated flag", "extra.boundary.Generated", "take", "generated", "optimistic-default", NA),
    ("model", "extra.lib.Modeled", "take", "unannotated-subpackage", "model", NN),
    ("restrictive", "extra.lib.Restrictive", "take", "unannotated-subpackage", "restrictive", NN),
    ("jarinfer", "extra.lib.Inferred", "use", "unannotated-subpackage", "jarinfer", NN),
    ("optimistic default", "extra.lib.Inferred", "maybe", "unannotated-subpackage", "optimistic-default", NA),
]


@pytest.mark.parametrize("outcome,qname,name,partition,provenance,nullness", DECISIONS, ids=[r[0] for r in DECISIONS])
def test_decision_outcomes(outcome, qname, name, partition, provenance, nullness):
    table, b = boundary()
    m = method(table, qname, name)
    reason, res = b.explain_param(m, 0, CALL_SITE)
    assert reason == partition
    assert res.provenance == provenance
    assert res.nullness is nullness


def test_outside_annotated_packages():
    table, b = boundary()
    m = method(table, "other.Outside", "take")
    reason, res = b.explain_param(m, 0)
    assert (reason, res.provenance, res.nullness) == ("not-in-annotated-packages", "optimistic-default", NA)


def test_classification_order():
    conf = BoundaryConfig(annotated_packages=r"a\..*", unannotated_subpackages=r"a\.lib",
                          unannotated_classes=("a.lib.X", "a.b.Y"), treat_generated_as_unannotated=True)
    gen = [A.Annotation("Generated")]
    assert classify("z.X", gen, conf) == (False, "not-in-annotated-packages")
    assert classify("a.lib.X", gen, conf) == (False, "unannotated-subpackage")
    assert classify("a.b.Y", gen, conf) == (False, "unannotated-class")
    assert classify("a.b.Z", gen, conf) == (False, "generated")
    assert classify("a.b.Z", [], conf) == (True, "annotated")
    off = BoundaryConfig(annotated_packages=r"a\..*")
    assert classify("a.b.Z", gen, off) == (True, "annotated")


def test_package_prefix_matching():
    assert package_matches(r"com\.uber", "com.uber.rides")
    assert package_matches(r"com\.uber\..*", "com.uber.rides")
    assert not package_matches(r"com\.uber", "com.ubertest")
    assert not package_matches("", "anything")


def test_invalid_regex_is_config_error():
    with pytest.raises(ConfigError):
        BoundaryConfig(annotated_packages="(")
    with pytest.raises(ConfigError):
        BoundaryConfig(annotated_packages="")


def test_override_super_context_flips_defaults():
    table, b = boundary()
    m = method(table, "extra.lib.Plain", "get")
    assert b.resolve_return(m, CALL_SITE).nullness is NN
    assert b.resolve_return(m, OVERRIDE_SUPER).nullness is NA
    take = method(table, "extra.lib.Plain", "take")
    assert b.resolve_param(take, 0, OVERRIDE_SUPER).nullness is NN


def test_restrictive_only_when_acknowledged():
    table, b = boundary(acknowledge_restrictive=False)
    m = method(table, "extra.lib.Restrictive", "take")
    assert b.param(m, 0).provenance == "optimistic-default"
    assert b.ret(method(table, "extra.lib.Restrictive", "get")).nullness is NN
    table, b = boundary()
    assert b.ret(method(table, "extra.lib.Restrictive", "get")).provenance == "restrictive"
    # a more permissive annotation is not restrictive in the call-site direction
    lax = method(table, "extra.lib.Restrictive", "lax")
    assert b.param(lax, 0).provenance != "restrictive"
    assert b.ret(lax).provenance != "restrictive"


def test_pessimistic_defaults():
    table, b = boundary(pessimistic_mode=True)
    plain = table.classes["extra.lib.Plain"]
    assert b.param(method(table, "extra.lib.Plain", "take"), 0).provenance == "pessimistic-default"
    assert b.param_nullness(method(table, "extra.lib.Plain", "take"), 0) is NN
    assert b.return_nullness(method(table, "extra.lib.Plain", "get")) is NA
    # models and restrictive annotations still come first
    assert b.param(method(table, "extra.lib.Modeled", "take"), 0).provenance == "model"
    assert b.param(method(table, "extra.lib.Restrictive", "lax"), 0).nullness is NN
    assert plain.partition == "unannotated-subpackage"
    gen = table.classes["extra.boundary.Generated"]
    assert b.field_read(gen.fields["field"]).nullness is NA
    assert b.field_write(gen.fields["field"]).nullness is NN


def test_optimistic_field_access():
    table, b = boundary()
    f = table.classes["extra.boundary.Generated"].fields["field"]
    assert b.field_read(f).nullness is NN and b.field_write(f).nullness is NA


def test_map_get_is_modeled_nullable():
    r = run("""
        package t;
        class A {
            void m(Map<String, Object> map) {
                map.get("k").hashCode();
                Object v = map.get("k");
                if (v != null) { v.hashCode(); }
            }
        }
    """)
    assert codes(r) == [(5, "DEREF_NULLABLE")]


# -- mini JarInfer --------------------------------------------------------------

def jarinfer_of(text: str) -> dict:
    files, errors = parse_all([("lib/L.mj", textwrap.dedent(text))])
    assert not errors
    table = build_program(files)
    Boundary(table, BoundaryConfig(annotated_packages=r"t"))
    inferred = mini_jarinfer([c for c in table.sorted_classes() if c.qname.startswith("lib.")])
    return {(k[0][1], k[1]): v for k, v in inferred.items()}


def test_jarinfer_examples():
    got = jarinfer_of("""
        package lib;
        class L {
            void always(Object a, Object b) { a.hashCode(); if (b != null) { b.hashCode(); } }
            void both(boolean c, Object a) { if (c) { a.hashCode(); } else { a.toString(); } }
            void killed(Object a) { a = new Object(); a.hashCode(); }
            void late(Object a) { Object x = a; a.hashCode(); }
            void inLambda(Object a) { Runnable r = () -> a.hashCode(); }
            void spin(Object a) { while (true) { } }
            void throwsFirst(Object a, boolean c) { if (c) { throw new Error("x"); } a.hashCode(); }
        }
    """)
    assert got == {("always", 0): NN, ("both", 1): NN, ("late", 0): NN, ("throwsFirst", 0): NN}


def test_jarinfer_disabled_means_optimistic():
    table, b = boundary(jarinfer_enabled=False)
    assert b.param(method(table, "extra.lib.Inferred", "use"), 0).provenance == "optimistic-default"


# -- library model files ---------------------------------------------------------

def test_model_parsing():
    [m] = parse_models(json.dumps([{"class": "a.B", "method": "m", "arity": 2,
                                    "params": {"1": "Nullable"}, "return": "NonNull"}]))
    assert m.key == ("a.B", "m", 2) and m.params == {1: NA} and m.ret is NN


@pytest.mark.parametrize("entry,msg", [
    ({"class": "a.B", "method": "m"}, "missing"),
    ({"class": "a.B", "method": "m", "arity": 1, "params": {"3": "NonNull"}}, "out of range"),
    ({"class": "a.B", "method": "m", "arity": 1, "return": "Null"}, "only say"),
    ({"class": "a.B", "method": "m", "arity": 1, "return": "maybe"}, "unknown nullness"),
    ({"class": "a.B", "method": "m", "arity": 1, "extra": 1}, "unknown keys"),
    ({"class": "a.B", "method": "m", "arity": 1, "behavior": {"kind": "assert-nonnull", "arg": 4}}, "arg index"),
    ({"class": "a.B", "method": "m", "arity": 1, "behavior": {"kind": "teleport"}}, "unknown behavior"),
])
def test_model_errors(entry, msg):
    with pytest.raises(ConfigError) as exc:
        parse_models(json.dumps([entry]))
    assert msg in str(exc.value)


def test_model_merge_and_conflicts():
    a = {"class": "a.B", "method": "m", "arity": 2, "params": {"0": "NonNull"}}
    b = {"class": "a.B", "method": "m", "arity": 2, "params": {"1": "Nullable"}, "return": "Nullable"}
    ms = ModelSet(parse_models(json.dumps([a, b])))
    merged = ms.get(("a.B", "m", 2))
    assert merged.params == {0: NN, 1: NA} and merged.ret is NA
    with pytest.raises(ConfigError):
        ModelSet(parse_models(json.dumps([a, a])))


def test_malformed_model_file(tmp_path):
    p = tmp_path / "m.json"
    p.write_text("{nope")
    with pytest.raises(ConfigError):
        ModelSet.load([p])
    with pytest.raises(ConfigError):
        ModelSet.load([tmp_path / "missing.json"])
