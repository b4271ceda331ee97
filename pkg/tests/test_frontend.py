from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minij_null.frontend import ast as A
from minij_null.frontend import printer
from minij_null.frontend.lexer import LexError, TokenKind, lex
from minij_null.frontend.parser import parse_source
from minij_null.semantics.program import build_program

from conftest import CORPUS

_TWO_CHAR = {"->", "==", "!=", "<=", ">=", "&&", "||"}
_ONE_CHAR = set(";,.(){}[]@=<>!+-*?:")


def reference_token_count(text: str) -> int:
    """Character-at-a-time token count, kept independent of the lexer's regex."""
    i, n, count = 0, len(text), 0
    while i < n:
        c = text[i]
        if c in " \t\r\n\f":
            i += 1
        elif text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
        elif text.startswith("/*", i):
            i = text.index("*/", i + 2) + 2
        elif c == '"':
            i += 1
            while text[i] != '"':
                i += 2 if text[i] == "\\" else 1
            i += 1
            count += 1
        elif c.isalpha() or c in "_$":
            while i < n and (text[i].isalnum() or text[i] in "_$"):
                i += 1
            count += 1
        elif c.isdigit():
            while i < n and text[i].isdigit():
                i += 1
            count += 1
        elif text[i:i + 2] in _TWO_CHAR:
            i += 2
            count += 1
        elif c in _ONE_CHAR:
            i += 1
            count += 1
        else:
            raise AssertionError(f"unexpected {c!r}")
    return count


def kinds(text: str) -> list[tuple[str, str]]:
    return [(t.kind.value, t.text) for t in lex(text)]


def test_lex_annotated_field():
    assert kinds("@Nullable Object f;") == [
        ("At", "@"), ("Ident", "Nullable"), ("Ident", "Object"), ("Ident", "f"), ("Semi", ";"),
    ]


def test_lex_empty_input():
    assert lex("") == []


def test_lex_init_example_token_count_matches_reference_scan():
    text = (CORPUS / "paper" / "init_example.mj").read_text()
    assert len(lex(text)) == reference_token_count(text)


def test_lex_hand_counted_line():
    # this . g . toString ( ) ;  -> 8 tokens
    assert len(lex("this.g.toString();")) == 8


def test_lex_spans_cover_lexemes():
    text = 'package a;\nclass B { String s = "x\\"y"; }\n'
    for t in lex(text):
        assert text[t.span.start:t.span.end] == t.text
        assert t.span.start <= t.span.end


def test_lex_comments_kept_as_trivia():
    toks = lex("x; // hi\n/* block */ y;", trivia=True)
    comments = [t.text for t in toks if t.kind is TokenKind.COMMENT]
    assert comments == ["// hi", "/* block */"]
    assert all(t.kind is not TokenKind.COMMENT for t in lex("x; // hi"))


def test_lex_line_numbers_after_block_comment():
    toks = lex("/* a\nb\n*/ x")
    assert toks[0].span.line == 3


@pytest.mark.parametrize("text,msg", [
    ('"abc', "unterminated string"),
    ("/* never closed", "unterminated block comment"),
    ("#", "unexpected character"),
])
def test_lex_errors_carry_spans(text, msg):
    with pytest.raises(LexError) as exc:
        lex(text)
    assert msg in exc.value.message
    assert 0 <= exc.value.span.start <= len(text)


def parse_ok(text: str) -> A.SourceFile:
    r = parse_source(text, "t.mj")
    assert r.errors == [], r.errors
    return r.file


def test_parse_call_with_null_argument():
    f = parse_ok("package p; class C { void foo() { log(null); } void log(Object x) {} }")
    foo = f.declarations[0].methods[0]
    assert foo.name == "foo"
    [stmt] = foo.body.stmts
    assert isinstance(stmt, A.ExprStmt)
    assert isinstance(stmt.expr, A.MethodCall)
    assert stmt.expr.name == "log" and stmt.expr.target is None
    assert [type(a) for a in stmt.expr.args] == [A.NullLit]


def test_parse_empty_class():
    c = parse_ok("package p; class A {}").declarations[0]
    assert c.name == "A" and c.kind == "class"
    assert c.fields == c.methods == c.constructors == c.init_blocks == c.static_init_blocks == []


def test_generic_argument_annotations_preserved_then_flagged_ignored():
    f = parse_ok("""package p;
class Pair<T, U> { T first; U second; }
class Use { Pair<@Nullable String, String> p; }
""")
    pair, use = f.declarations
    assert pair.type_params == ["T", "U"]
    t = use.fields[0].type
    assert t.name == "Pair" and [a.name for a in t.args] == ["String", "String"]
    [ann] = t.args[0].annotations
    assert ann.name == "Nullable" and not ann.ignored
    assert use.fields[0].annotations == []
    build_program([f])
    assert ann.ignored


def test_parse_statement_forms():
    f = parse_ok("""package p;
class C {
  Object m(boolean c, Object o) {
    Object x = c ? o : null;
    x = o;
    if (!c && x != null || c) { x.toString(); } else { return null; }
    while (c) { c = false; }
    Runnable r = () -> { return; };
    Function<Object, Object> g = (a) -> a;
    int[] arr = new int[3];
    throw new Error("no");
  }
}
""")
    stmts = f.declarations[0].methods[0].body.stmts
    assert [type(s).__name__ for s in stmts] == [
        "LocalDecl", "Assign", "If", "While", "LocalDecl", "LocalDecl", "LocalDecl", "Throw"]
    assert isinstance(stmts[0].init, A.Conditional)
    assert isinstance(stmts[4].init, A.Lambda) and isinstance(stmts[4].init.body, A.Block)
    assert isinstance(stmts[5].init, A.Lambda) and stmts[5].init.params == ["a"]


def test_parse_annotations_with_arguments():
    f = parse_ok("""package p;
@Generated class C {
  @Contract("null -> false") static boolean ok(@Nullable Object o) { return o != null; }
  @SuppressWarnings("NullAway") void m() {}
}
""")
    c = f.declarations[0]
    assert [a.name for a in c.annotations] == ["Generated"]
    ok = c.methods[0]
    assert ok.annotations[0].arg == "null -> false"
    assert ok.params[0].annotations[0].name == "Nullable"
    assert "static" in ok.modifiers


def test_parse_recovers_and_reports_multiple_errors():
    text = "package p; class C { void m() { x = ; y = ; } }"
    r = parse_source(text, "t.mj")
    assert len(r.errors) >= 2
    for e in r.errors:
        assert 0 <= e.span.start <= len(text)


def test_parse_error_lists_expected_tokens():
    r = parse_source("package p; class C { void m( }", "t.mj")
    assert r.errors
    assert "expected" in r.errors[0].message


def test_parse_missing_package_is_an_error():
    assert parse_source("class C {}", "t.mj").errors


def corpus_files() -> list[Path]:
    return sorted(CORPUS.rglob("*.mj"))


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_round_trip_corpus(path):
    text = path.read_text()
    tree = parse_ok(text)
    again = parse_ok(printer.source_file(tree))
    assert again == tree


def test_parse_is_deterministic():
    text = (CORPUS / "paper" / "init_example.mj").read_text()
    assert parse_ok(text) == parse_ok(text)


_idents = st.sampled_from(["a", "b", "c"])


def _exprs():
    leaf = st.one_of(
        _idents.map(lambda n: n),
        st.just("null"), st.just("this"), st.just("\"s\""), st.integers(0, 9).map(str),
    )
    return st.recursive(leaf, lambda inner: st.one_of(
        st.tuples(inner, st.sampled_from(["==", "!=", "&&", "||"]), inner).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(inner, inner, inner).map(lambda t: f"({t[0]} ? {t[1]} : {t[2]})"),
        inner.map(lambda e: f"!{e}"),
        inner.map(lambda e: f"{e}.f"),
        st.tuples(inner, st.lists(inner, max_size=2)).map(lambda t: f"{t[0]}.m({', '.join(t[1])})"),
    ), max_leaves=8)


@settings(max_examples=150, deadline=None)
@given(_exprs())
def test_round_trip_random_expressions(e):
    text = f"package p; class C {{ void m() {{ x = {e}; }} }}"
    tree = parse_ok(text)
    assert parse_ok(printer.source_file(tree)) == tree
