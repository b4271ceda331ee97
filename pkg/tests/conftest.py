from __future__ import annotations

import textwrap
from pathlib import Path

import pytest

from minij_null.config import settings_from_dict
from minij_null.driver import analyze

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"


def settings(**cfg):
    data = {"annotatedPackages": "t"}
    data.update(cfg)
    return settings_from_dict(data)


def run(text: str, path: str = "t/A.mj", extra=(), **cfg):
    """Analyze one source (plus optional ``(path, text)`` extras) under package ``t``."""
    sources = [(path, textwrap.dedent(text))] + list(extra)
    return analyze(sources, settings(**cfg))


def codes(result, suppressed: bool = False) -> list[tuple[int, str]]:
    return sorted((d.line, d.code.value) for d in result.diagnostics if suppressed or not d.suppressed)


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS


# criterion number -> PASS/FAIL line, filled by test_acceptance
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
