from functools import lru_cache
from pathlib import Path

import pytest

from thinp.pcgroup import Group

CORPUS = Path(__file__).resolve().parents[1] / "src" / "thinp" / "corpus"
NAMES = sorted(p.stem for p in CORPUS.glob("*.pc"))
SMALL = [n for n in NAMES if Group.from_file(CORPUS / f"{n}.pc").order <= 3**5]

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@lru_cache(maxsize=None)
def load(name: str) -> Group:
    return Group.from_file(CORPUS / f"{name}.pc")


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, note = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {note}")
