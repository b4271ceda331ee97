"""Deterministic generator of large, well-typed MiniJ corpora for benchmarking."""

from __future__ import annotations

import random
from pathlib import Path

SYNTH_CONFIG = {"annotatedPackages": r"synth\..*", "unannotatedSubPackages": r"synth\.lib"}


def _lib_file() -> str:
    return """package synth.lib;

class Store {
    Object load(Object key) { return key; }
    void save(Object key, Object value) { }
    static Object fresh() { return new Object(); }
}
"""


class _ClassWriter:
    def __init__(self, rng: random.Random, name: str, peer: str | None):
        self.rng = rng
        self.name = name
        self.peer = peer
        self.lines: list[str] = []

    def emit(self, text: str, depth: int) -> None:
        self.lines.append("    " * depth + text)

    def method(self, idx: int) -> None:
        r = self.rng
        kind = r.randrange(6)
        emit = self.emit
        if kind == 0:
            emit(f"Object guarded{idx}(@Nullable Object p, boolean c) {{", 1)
            emit("Object x = p;", 2)
            emit("if (x == null) {", 2)
            emit("x = new Object();", 3)
            emit("}", 2)
            emit("while (c) {", 2)
            emit("String s = x.toString();", 3)
            emit("c = s.equals(x);", 3)
            emit("}", 2)
            emit("return x;", 2)
            emit("}", 1)
        elif kind == 1:
            emit(f"@Nullable Object pick{idx}(boolean c) {{", 1)
            emit("Object a = c ? this.opt : this.req;", 2)
            emit("if (a != null && c) {", 2)
            emit("return a.toString();", 3)
            emit("}", 2)
            emit("return this.opt;", 2)
            emit("}", 1)
        elif kind == 2:
            emit(f"void chain{idx}({self.name} other) {{", 1)
            emit("if (other.opt != null) {", 2)
            emit("other.opt.hashCode();", 3)
            emit("this.opt = other.opt;", 3)
            emit("}", 2)
            emit("if (this.opt == null || other.peer() == null) {", 2)
            emit("return;", 3)
            emit("}", 2)
            emit("this.opt.toString();", 2)
            emit("}", 1)
        elif kind == 3:
            emit(f"Object lib{idx}(@Nullable Object k) {{", 1)
            emit("synth.lib.Store st = new synth.lib.Store();", 2)
            emit("st.save(k, synth.lib.Store.fresh());", 2)
            emit("Object v = st.load(k);", 2)
            emit("if (Objects.isNull(k)) {", 2)
            emit("return v;", 3)
            emit("}", 2)
            emit("return k;", 2)
            emit("}", 1)
        elif kind == 4:
            emit(f"boolean test{idx}(Observable<{self.name}> o) {{", 1)
            emit("o.filter(v -> v.opt != null).map(v -> v.opt.toString());", 2)
            emit("Predicate<Object> p = v -> v != null;", 2)
            emit("return p.test(this.req);", 2)
            emit("}", 1)
        else:
            target = self.peer or self.name
            emit(f"Object call{idx}({target} t, @Nullable Object n) {{", 1)
            emit("Object y = n != null ? n : this.req;", 2)
            emit("if (n != null) {", 2)
            emit("y = t.toString();", 3)
            emit("} else {", 2)
            emit("y = Preconditions.checkNotNull(this.opt);", 3)
            emit("}", 2)
            emit("return y;", 2)
            emit("}", 1)

    def build(self, n_methods: int) -> list[str]:
        e = self.emit
        e(f"class {self.name} {{", 0)
        e("@Nullable Object opt;", 1)
        e("Object req;", 1)
        e("Object late;", 1)
        e(f"{self.name}(Object r) {{", 1)
        e("this.req = r;", 2)
        e("setUp();", 2)
        e("}", 1)
        e("private void setUp() {", 1)
        e("this.late = new Object();", 2)
        e("}", 1)
        e("@Nullable Object peer() {", 1)
        e("return this.opt;", 2)
        e("}", 1)
        for i in range(n_methods):
            self.method(i)
        e("}", 0)
        return self.lines


def generate(target_loc: int = 50_000, seed: int = 7, classes_per_file: int = 4,
             methods_per_class: int = 12) -> list[tuple[str, str]]:
    """``(path, text)`` pairs totalling at least ``target_loc`` non-blank lines."""
    rng = random.Random(seed)
    files = [("synth/lib/Store.mj", _lib_file())]
    loc = sum(1 for line in files[0][1].splitlines() if line.strip())
    f = 0
    while loc < target_loc:
        pkg = f"synth.p{f // 20}"
        lines = [f"package {pkg};", ""]
        names = [f"C{f}x{k}" for k in range(classes_per_file)]
        for k, name in enumerate(names):
            peer = names[k - 1] if k else None
            lines += _ClassWriter(rng, name, peer).build(methods_per_class)
            lines.append("")
        text = "\n".join(lines)
        files.append((f"synth/p{f // 20}/F{f}.mj", text))
        loc += sum(1 for line in lines if line.strip())
        f += 1
    return files


def count_loc(sources: list[tuple[str, str]]) -> int:
    return sum(1 for _, text in sources for line in text.splitlines() if line.strip())


def write_corpus(directory: str | Path, target_loc: int = 50_000, seed: int = 7) -> list[Path]:
    import json

    root = Path(directory)
    out = []
    for rel, text in generate(target_loc, seed):
        p = root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
        out.append(p)
    (root / "minij-null.json").write_text(json.dumps(SYNTH_CONFIG, indent=2) + "\n", encoding="utf-8")
    return out
