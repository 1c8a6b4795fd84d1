import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ngramatch.corpus import CatalogueRecord, Corpus  # noqa: E402


@pytest.fixture
def toy_corpus():
    return Corpus([
        CatalogueRecord("b001", "Algorithms Unlocked", "Thomas Cormen"),
        CatalogueRecord("b002", "The Art of Computer Programming", "Donald Knuth"),
        CatalogueRecord("b003", "Structure and Interpretation", "Abelson Sussman"),
        CatalogueRecord("x001", "Turtles All the Way Down", "John Green", True),
    ])


@pytest.fixture
def toy_corpus_path(tmp_path, toy_corpus):
    from ngramatch.corpus import write_corpus

    path = tmp_path / "corpus.tsv"
    write_corpus(toy_corpus, path)
    return path


_CRITERIA: dict[int, tuple[bool, str]] = {}


class _Criterion:
    def __init__(self, number):
        self.number = number
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        passed = exc_type is None
        detail = self.detail if passed or not exc else f"{self.detail} {type(exc).__name__}: {exc}".strip()
        _CRITERIA[self.number] = (passed, " ".join(detail.split()))
        print(f"criterion {self.number}: {'PASS' if passed else 'FAIL'} {detail}")
        return False


@pytest.fixture
def criterion():
    """Context manager recording one acceptance criterion's outcome."""
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
