"""Pretty-printer producing MiniJ source that reparses to an equal tree."""

from __future__ import annotations

import json

from . import ast as A


def _quote(s: str) -> str:
    return json.dumps(s)


def annotation(a: A.Annotation) -> str:
    return f"@{a.name}" if a.arg is None else f"@{a.name}({_quote(a.arg)})"


def type_use(t: A.TypeUse) -> str:
    out = "".join(annotation(a) + " " for a in t.annotations) + t.name
    if t.args:
        out += "<" + ", ".join(type_use(x) for x in t.args) + ">"
    return out + "[]" * t.dims


def expr(e: A.Expr) -> str:
    if isinstance(e, A.Name):
        return e.id
    if isinstance(e, A.NullLit):
        return "null"
    if isinstance(e, A.This):
        return "this"
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.StringLit):
        return _quote(e.value)
    if isinstance(e, A.FieldAccess):
        return f"{_operand(e.target)}.{e.name}"
    if isinstance(e, A.MethodCall):
        args = ", ".join(expr(a) for a in e.args)
        if e.target is None:
            return f"{e.name}({args})"
        return f"{_operand(e.target)}.{e.name}({args})"
    if isinstance(e, A.New):
        return f"new {type_use(e.cls)}({', '.join(expr(a) for a in e.args)})"
    if isinstance(e, A.NewArray):
        return f"new {type_use(e.elem)}[{expr(e.size)}]"
    if isinstance(e, A.ArrayIndex):
        return f"{_operand(e.array)}[{expr(e.index)}]"
    if isinstance(e, A.Lambda):
        head = e.params[0] if len(e.params) == 1 else "(" + ", ".join(e.params) + ")"
        if isinstance(e.body, A.Block):
            return f"{head} -> {block(e.body, 0).strip()}"
        return f"{head} -> {expr(e.body)}"
    if isinstance(e, A.Conditional):
        return f"({expr(e.cond)} ? {expr(e.then)} : {expr(e.other)})"
    if isinstance(e, A.Binary):
        return f"({expr(e.left)} {e.op} {expr(e.right)})"
    if isinstance(e, A.Unary):
        return f"{e.op}{_operand(e.operand)}"
    raise TypeError(f"cannot print {type(e).__name__}")


def _operand(e: A.Expr) -> str:
    s = expr(e)
    if isinstance(e, (A.Lambda, A.Unary)):
        return f"({s})"
    return s


def stmt(s: A.Stmt, depth: int) -> str:
    pad = "    " * depth
    if isinstance(s, A.Block):
        return pad + block(s, depth).lstrip()
    if isinstance(s, A.LocalDecl):
        ann = "".join(annotation(a) + " " for a in s.annotations)
        init = "" if s.init is None else f" = {expr(s.init)}"
        return f"{pad}{ann}{type_use(s.type)} {s.name}{init};\n"
    if isinstance(s, A.Assign):
        return f"{pad}{expr(s.target)} = {expr(s.value)};\n"
    if isinstance(s, A.ExprStmt):
        return f"{pad}{expr(s.expr)};\n"
    if isinstance(s, A.If):
        out = f"{pad}if ({expr(s.cond)})\n{stmt(s.then, depth)}"
        if s.other is not None:
            out += f"{pad}else\n{stmt(s.other, depth)}"
        return out
    if isinstance(s, A.While):
        return f"{pad}while ({expr(s.cond)})\n{stmt(s.body, depth)}"
    if isinstance(s, A.Return):
        return f"{pad}return;\n" if s.value is None else f"{pad}return {expr(s.value)};\n"
    if isinstance(s, A.Throw):
        return f"{pad}throw {expr(s.value)};\n"
    if isinstance(s, A.Empty):
        return f"{pad};\n"
    raise TypeError(f"cannot print {type(s).__name__}")


def block(b: A.Block, depth: int) -> str:
    pad = "    " * depth
    inner = "".join(stmt(s, depth + 1) for s in b.stmts)
    return f"{pad}{{\n{inner}{pad}}}\n"


def _mods(annots: list[A.Annotation], mods: frozenset[str]) -> str:
    parts = [annotation(a) for a in annots] + sorted(mods)
    return "".join(p + " " for p in parts)


def method(m: A.MethodDecl, depth: int) -> str:
    pad = "    " * depth
    params = ", ".join(
        "".join(annotation(a) + " " for a in p.annotations) + f"{type_use(p.type)} {p.name}"
        for p in m.params
    )
    if m.is_ctor:
        head = f"{m.name}({params})"
    else:
        rt = "void" if m.return_type is None else type_use(m.return_type)
        head = f"{rt} {m.name}({params})"
    out = f"{pad}{_mods(m.annotations, m.modifiers)}{head}"
    if m.body is None:
        return out + ";\n"
    return out + "\n" + block(m.body, depth)


def class_decl(c: A.ClassDecl) -> str:
    head = f"{_mods(c.annotations, c.modifiers)}{c.kind} {c.name}"
    if c.type_params:
        head += "<" + ", ".join(c.type_params) + ">"
    if c.super_type is not None:
        head += f" extends {type_use(c.super_type)}"
    out = [head + " {\n"]
    for f in c.fields:
        decls = ", ".join(
            d.name if d.init is None else f"{d.name} = {expr(d.init)}" for d in f.declarators
        )
        out.append(f"    {_mods(f.annotations, f.modifiers)}{type_use(f.type)} {decls};\n")
    for b in c.static_init_blocks:
        out.append("    static " + block(b, 1).lstrip())
    for b in c.init_blocks:
        out.append(block(b, 1))
    for m in c.constructors:
        out.append(method(m, 1))
    for m in c.methods:
        out.append(method(m, 1))
    out.append("}\n")
    return "".join(out)


def source_file(f: A.SourceFile) -> str:
    return f"package {f.package_name};\n\n" + "\n".join(class_decl(c) for c in f.declarations)
