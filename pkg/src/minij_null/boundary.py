"""Annotated/unannotated code boundary.

Decides which classes are checked, and what nullness to assume for members of
classes that are not. Unannotated members go through, in order: library
models, restrictive annotations (when acknowledged), mini-JarInfer parameter
inference (when enabled), and finally the optimistic (or pessimistic) default.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .frontend import ast as A
from .semantics.nullness import Nullness
from .semantics.program import ClassFacts, FieldInfo, MethodInfo, ProgramTable

CALL_SITE = "call-site"
OVERRIDE_SUPER = "override-super"

NONNULL = Nullness.NONNULL
NULLABLE = Nullness.NULLABLE


class ConfigError(Exception):
    """Invalid configuration, model file, or regex."""


@dataclass(frozen=True)
class BoundaryConfig:
    annotated_packages: str
    unannotated_subpackages: str = ""
    unannotated_classes: tuple[str, ...] = ()
    treat_generated_as_unannotated: bool = False
    acknowledge_restrictive: bool = False
    jarinfer_enabled: bool = False
    pessimistic_mode: bool = False

    def __post_init__(self) -> None:
        if not self.annotated_packages:
            raise ConfigError("annotatedPackages is required")
        for name in ("annotated_packages", "unannotated_subpackages"):
            try:
                re.compile(getattr(self, name))
            except re.error as exc:
                raise ConfigError(f"invalid regex for {name}: {exc}") from None
        object.__setattr__(self, "unannotated_classes", tuple(self.unannotated_classes))


def package_matches(pattern: str, package: str) -> bool:
    """Whether the package, or any dotted prefix of it, fully matches ``pattern``."""
    if not pattern:
        return False
    rx = re.compile(pattern)
    parts = package.split(".")
    return any(rx.fullmatch(".".join(parts[:i])) for i in range(len(parts), 0, -1))


def classify(qname: str, annotations: Sequence[A.Annotation], config: BoundaryConfig) -> tuple[bool, str]:
    """``(annotated, reason)`` for a class; checks run in a fixed order."""
    package = qname.rpartition(".")[0]
    if not package_matches(config.annotated_packages, package):
        return False, "not-in-annotated-packages"
    if package_matches(config.unannotated_subpackages, package):
        return False, "unannotated-subpackage"
    if qname in config.unannotated_classes:
        return False, "unannotated-class"
    if config.treat_generated_as_unannotated and A.annotation(list(annotations), "Generated") is not None:
        return False, "generated"
    return True, "annotated"


def is_annotated(qname: str, annotations: Sequence[A.Annotation], config: BoundaryConfig) -> bool:
    return classify(qname, annotations, config)[0]


# -- library models ------------------------------------------------------------


@dataclass(frozen=True)
class Behavior:
    kind: str  # assert-nonnull | contract
    arg: Optional[int] = None
    value: Optional[str] = None


@dataclass
class LibraryModel:
    cls: str
    method: str
    arity: int
    params: dict[int, Nullness] = field(default_factory=dict)
    ret: Optional[Nullness] = None
    behavior: Optional[Behavior] = None

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.cls, self.method, self.arity)


def default_model_text() -> str:
    return resources.files("minij_null.data").joinpath("default_models.json").read_text(encoding="utf-8")


def _nullness(v: object, where: str) -> Nullness:
    if not isinstance(v, str):
        raise ConfigError(f"{where}: nullness must be a string")
    try:
        n = Nullness.parse(v)
    except ValueError:
        raise ConfigError(f"{where}: unknown nullness {v!r}") from None
    if n not in (NONNULL, NULLABLE):
        raise ConfigError(f"{where}: models may only say NonNull or Nullable")
    return n


def parse_models(text: str, source: str = "<models>") -> list[LibraryModel]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if not isinstance(data, list):
        raise ConfigError(f"{source}: expected a list of models")
    out = []
    for i, entry in enumerate(data):
        where = f"{source}[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where}: expected an object")
        unknown = set(entry) - {"class", "method", "arity", "params", "return", "behavior"}
        if unknown:
            raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
        try:
            cls, method, arity = entry["class"], entry["method"], entry["arity"]
        except KeyError as exc:
            raise ConfigError(f"{where}: missing {exc}") from None
        if not isinstance(arity, int) or arity < 0:
            raise ConfigError(f"{where}: arity must be a non-negative integer")
        params = {}
        for k, v in (entry.get("params") or {}).items():
            try:
                pos = int(k)
            except ValueError:
                raise ConfigError(f"{where}: bad parameter index {k!r}") from None
            if not 0 <= pos < arity:
                raise ConfigError(f"{where}: parameter index {pos} out of range")
            params[pos] = _nullness(v, where)
        ret = _nullness(entry["return"], where) if entry.get("return") is not None else None
        behavior = None
        b = entry.get("behavior")
        if b is not None:
            kind = b.get("kind") if isinstance(b, dict) else None
            if kind == "assert-nonnull":
                arg = b.get("arg")
                if not isinstance(arg, int) or not 0 <= arg < arity:
                    raise ConfigError(f"{where}: assert-nonnull needs a valid arg index")
                behavior = Behavior(kind, arg=arg)
            elif kind == "contract":
                if not isinstance(b.get("value"), str) or not b["value"]:
                    raise ConfigError(f"{where}: contract behavior needs a value")
                behavior = Behavior(kind, value=b["value"])
            else:
                raise ConfigError(f"{where}: unknown behavior {b!r}")
        out.append(LibraryModel(cls, method, arity, params, ret, behavior))
    return out


class ModelSet:
    """Models merged by method key; at most one entry per (key, position)."""

    def __init__(self, models: Iterable[LibraryModel] = ()):
        self.by_key: dict[tuple[str, str, int], LibraryModel] = {}
        for m in models:
            self.add(m)

    def add(self, m: LibraryModel) -> None:
        cur = self.by_key.get(m.key)
        if cur is None:
            self.by_key[m.key] = LibraryModel(m.cls, m.method, m.arity, dict(m.params), m.ret, m.behavior)
            return
        for pos, n in m.params.items():
            if pos in cur.params:
                raise ConfigError(f"duplicate model for {'.'.join(m.key[:2])} parameter {pos}")
            cur.params[pos] = n
        if m.ret is not None:
            if cur.ret is not None:
                raise ConfigError(f"duplicate return model for {'.'.join(m.key[:2])}")
            cur.ret = m.ret
        if m.behavior is not None:
            if cur.behavior is not None:
                raise ConfigError(f"duplicate behavior model for {'.'.join(m.key[:2])}")
            cur.behavior = m.behavior

    def get(self, key: tuple[str, str, int]) -> Optional[LibraryModel]:
        return self.by_key.get(key)

    @classmethod
    def load(cls, files: Sequence[str | Path] = (), include_defaults: bool = True) -> "ModelSet":
        models: list[LibraryModel] = []
        if include_defaults:
            models += parse_models(default_model_text(), "default_models.json")
        for f in files:
            try:
                text = Path(f).read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read model file {f}: {exc.strerror}") from None
            models += parse_models(text, str(f))
        return cls(models)


# -- resolution ----------------------------------------------------------------


@dataclass(frozen=True)
class Resolution:
    nullness: Optional[Nullness]
    provenance: str  # explicit | nnel-default | model | restrictive | jarinfer | optimistic-default | pessimistic-default


def explicit_nullness(annotations: Sequence[A.Annotation]) -> Optional[Nullness]:
    names = {a.name for a in annotations if not a.ignored}
    if "Nullable" in names and "NonNull" not in names:
        return NULLABLE
    if "NonNull" in names and "Nullable" not in names:
        return NONNULL
    return None


class Boundary:
    """Nullness of every member as seen from annotated code."""

    def __init__(self, table: ProgramTable, config: BoundaryConfig, models: Optional[ModelSet] = None):
        self.table = table
        self.config = config
        self.models = models if models is not None else ModelSet.load()
        for cls in table.classes.values():
            cls.annotated, cls.partition = classify(cls.qname, cls.annotations, config)
        self.jarinfer: dict[tuple[tuple[str, str, int], int], Nullness] = {}
        if config.jarinfer_enabled:
            from .dataflow.jarinfer import mini_jarinfer

            self.jarinfer = mini_jarinfer([c for c in table.sorted_classes() if not c.annotated])

    # pipeline stages for unannotated members

    def resolve_param(self, m: MethodInfo, i: int, context: str) -> Resolution:
        p = m.params[i]
        if not p.type.is_reference:
            return Resolution(None, "primitive")
        model = self.models.get(m.key)
        if model is not None and i in model.params:
            return Resolution(model.params[i], "model")
        if self.config.acknowledge_restrictive:
            ann = explicit_nullness(p.annotations)
            if (context == CALL_SITE and ann is NONNULL) or (context == OVERRIDE_SUPER and ann is NULLABLE):
                return Resolution(ann, "restrictive")
        if self.config.jarinfer_enabled and self.jarinfer.get((m.key, i)) is NONNULL:
            return Resolution(NONNULL, "jarinfer")
        if context == CALL_SITE:
            if self.config.pessimistic_mode:
                return Resolution(NONNULL, "pessimistic-default")
            return Resolution(NULLABLE, "optimistic-default")
        return Resolution(NONNULL, "optimistic-default")

    def resolve_return(self, m: MethodInfo, context: str) -> Resolution:
        if m.ret is None or not m.ret.is_reference:
            return Resolution(None, "primitive")
        model = self.models.get(m.key)
        if model is not None and model.ret is not None:
            return Resolution(model.ret, "model")
        if self.config.acknowledge_restrictive:
            ann = explicit_nullness(m.annotations + (m.decl.return_type.annotations if m.decl and m.decl.return_type else []))
            if (context == CALL_SITE and ann is NULLABLE) or (context == OVERRIDE_SUPER and ann is NONNULL):
                return Resolution(ann, "restrictive")
        if context == CALL_SITE:
            if self.config.pessimistic_mode:
                return Resolution(NULLABLE, "pessimistic-default")
            return Resolution(NONNULL, "optimistic-default")
        return Resolution(NULLABLE, "optimistic-default")

    # views used by the checker

    def param(self, m: MethodInfo, i: int, context: str = CALL_SITE) -> Resolution:
        if m.owner.annotated:
            p = m.params[i]
            return Resolution(p.nullness, p.origin or "primitive")
        return self.resolve_param(m, i, context)

    def ret(self, m: MethodInfo, context: str = CALL_SITE) -> Resolution:
        if m.owner.annotated:
            return Resolution(m.ret_nullness, m.ret_origin or "primitive")
        return self.resolve_return(m, context)

    def param_nullness(self, m: MethodInfo, i: int, context: str = CALL_SITE) -> Optional[Nullness]:
        return self.param(m, i, context).nullness

    def return_nullness(self, m: MethodInfo, context: str = CALL_SITE) -> Optional[Nullness]:
        return self.ret(m, context).nullness

    def field_read(self, f: FieldInfo) -> Resolution:
        if f.owner.annotated or f.nullness is None:
            return Resolution(f.nullness, f.origin or "primitive")
        if self.config.acknowledge_restrictive and explicit_nullness(f.annotations) is NULLABLE:
            return Resolution(NULLABLE, "restrictive")
        if self.config.pessimistic_mode:
            return Resolution(NULLABLE, "pessimistic-default")
        return Resolution(NONNULL, "optimistic-default")

    def field_write(self, f: FieldInfo) -> Resolution:
        if f.owner.annotated or f.nullness is None:
            return Resolution(f.nullness, f.origin or "primitive")
        if self.config.acknowledge_restrictive and explicit_nullness(f.annotations) is NONNULL:
            return Resolution(NONNULL, "restrictive")
        if self.config.pessimistic_mode:
            return Resolution(NONNULL, "pessimistic-default")
        return Resolution(NULLABLE, "optimistic-default")

    def behavior(self, m: MethodInfo) -> Optional[Behavior]:
        if m.owner.annotated:
            return None
        model = self.models.get(m.key)
        return model.behavior if model is not None else None

    def explain_param(self, m: MethodInfo, i: int, context: str = CALL_SITE) -> tuple[str, Resolution]:
        """Partition reason of the owner plus the resolution, for reporting."""
        return m.owner.partition, self.param(m, i, context)

    def explain_return(self, m: MethodInfo, context: str = CALL_SITE) -> tuple[str, Resolution]:
        return m.owner.partition, self.ret(m, context)


def classes_by_partition(table: ProgramTable) -> dict[str, list[ClassFacts]]:
    out: dict[str, list[ClassFacts]] = {}
    for c in table.sorted_classes():
        out.setdefault(c.partition, []).append(c)
    return out
