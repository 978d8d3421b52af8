import functools

import pytest

from cubic_shapes import enumeration as en
from cubic_shapes import lseries

ACCEPTANCE_LINES: dict = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)


@functools.lru_cache(maxsize=None)
def classes_upto(X: int) -> tuple:
    """Enumeration shared across test modules; the largest request is computed once."""
    return tuple(en.enumerate_classes(X))


@functools.lru_cache(maxsize=None)
def shape_table(X: int) -> lseries.ShapeTable:
    return lseries.ShapeTable(list(classes_upto(X)), X, assume_canonical=True)


@pytest.fixture
def tmp_cache(tmp_path, monkeypatch):
    d = tmp_path / "cache"
    monkeypatch.setenv("CUBIC_SHAPES_CACHE", str(d))
    return d


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
