"""Run settings: JSON config files, discovery, and command-line overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Sequence

from .boundary import BoundaryConfig, ConfigError

CONFIG_NAME = "minij-null.json"
ENV_VAR = "MINIJ_NULL_CONFIG"

_KEYS = {
    "annotatedPackages": "annotated_packages",
    "unannotatedSubPackages": "unannotated_subpackages",
    "unannotatedClasses": "unannotated_classes",
    "treatGeneratedAsUnannotated": "treat_generated_as_unannotated",
    "acknowledgeRestrictiveAnnotations": "acknowledge_restrictive",
    "jarInferEnabled": "jarinfer_enabled",
    "pessimisticMode": "pessimistic_mode",
}
_EXTRA_KEYS = {"libraryModelFiles", "streamTypes"}


@dataclass(frozen=True)
class Settings:
    boundary: BoundaryConfig
    library_model_files: tuple[str, ...] = ()
    stream_types: tuple[str, ...] = ("std.Observable",)
    handlers_enabled: bool = True
    source: Optional[str] = None

    def with_boundary(self, **changes: Any) -> "Settings":
        return replace(self, boundary=replace(self.boundary, **changes))


def settings_from_dict(data: Any, base_dir: Optional[Path] = None, source: Optional[str] = None) -> Settings:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - set(_KEYS) - _EXTRA_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "annotatedPackages" not in data:
        raise ConfigError("config is missing annotatedPackages")
    kw: dict[str, Any] = {}
    for key, attr in _KEYS.items():
        if key not in data:
            continue
        v = data[key]
        if attr == "unannotated_classes":
            if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
                raise ConfigError(f"{key} must be a list of class names")
            v = tuple(v)
        elif attr in ("annotated_packages", "unannotated_subpackages"):
            if not isinstance(v, str):
                raise ConfigError(f"{key} must be a regex string")
        elif not isinstance(v, bool):
            raise ConfigError(f"{key} must be true or false")
        kw[attr] = v
    models = data.get("libraryModelFiles", [])
    if not isinstance(models, list) or not all(isinstance(x, str) for x in models):
        raise ConfigError("libraryModelFiles must be a list of paths")
    if base_dir is not None:
        models = [str((base_dir / m).resolve()) if not os.path.isabs(m) else m for m in models]
    streams = data.get("streamTypes", ["std.Observable"])
    if not isinstance(streams, list) or not all(isinstance(x, str) for x in streams):
        raise ConfigError("streamTypes must be a list of class names")
    return Settings(BoundaryConfig(**kw), tuple(models), tuple(streams), source=source)


def load_settings(path: str | Path) -> Settings:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON: {exc}") from None
    return settings_from_dict(data, p.parent, str(p))


def discover_config(paths: Sequence[str | Path]) -> Optional[Path]:
    """Nearest ``minij-null.json`` at or above the first input path."""
    for raw in paths:
        p = Path(raw).resolve()
        start = p if p.is_dir() else p.parent
        for d in (start, *start.parents):
            cand = d / CONFIG_NAME
            if cand.is_file():
                return cand
    return None


def resolve_settings(explicit: Optional[str], paths: Sequence[str | Path]) -> Settings:
    """``--config``, then the environment variable, then discovery."""
    if explicit:
        return load_settings(explicit)
    env = os.environ.get(ENV_VAR)
    if env:
        return load_settings(env)
    found = discover_config(paths)
    if found is None:
        raise ConfigError(f"no configuration: pass --config, set {ENV_VAR}, or add {CONFIG_NAME}")
    return load_settings(found)


@dataclass
class Overrides:
    """Command-line values that take precedence over the config file."""

    annotated_packages: Optional[str] = None
    unannotated_subpackages: Optional[str] = None
    unannotated_classes: Optional[list[str]] = None
    treat_generated_as_unannotated: Optional[bool] = None
    acknowledge_restrictive: Optional[bool] = None
    jarinfer_enabled: Optional[bool] = None
    pessimistic_mode: Optional[bool] = None
    library_model_files: list[str] = field(default_factory=list)
    stream_types: Optional[list[str]] = None

    def apply(self, s: Settings) -> Settings:
        changes = {k: v for k, v in vars(self).items()
                   if v is not None and k not in ("library_model_files", "stream_types")}
        if "unannotated_classes" in changes:
            changes["unannotated_classes"] = tuple(changes["unannotated_classes"])
        if changes:
            s = s.with_boundary(**changes)
        if self.library_model_files:
            s = replace(s, library_model_files=s.library_model_files + tuple(self.library_model_files))
        if self.stream_types is not None:
            s = replace(s, stream_types=tuple(self.stream_types))
        return s
