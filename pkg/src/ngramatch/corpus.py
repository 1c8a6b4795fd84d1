"""Catalogue records, query ground truth, and their TSV formats.

Corpus TSV: ``doc_id \\t title \\t author \\t distractor(0|1)``, one record
per line. Lines starting with ``#`` and blank lines are kept verbatim so
that a load/write round trip reproduces the input.

Query TSV: ``query_id \\t ground_truth_doc_id \\t payload``. A payload of
the form ``@relative/path`` refers to a token file (resolved against the
query file's directory); anything else is inline text.
"""

from __future__ import annotations

import io
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from ngramatch.errors import FormatError

PATH_PREFIX = "@"


def _valid_id(token: str) -> bool:
    return bool(token) and not any(c.isspace() for c in token)


@dataclass(frozen=True)
class CatalogueRecord:
    doc_id: str
    title: str = ""
    author: str = ""
    distractor: bool = False

    @property
    def annotation(self) -> str:
        """Title and author joined into the single matchable document."""
        if self.title and self.author:
            return f"{self.title} {self.author}"
        return self.title or self.author

    @property
    def indexable(self) -> bool:
        return bool(self.title or self.author)


@dataclass
class Corpus:
    """Ordered, read-only collection of catalogue records."""

    records: list[CatalogueRecord]
    # (records_before, raw_line) for comment/blank lines, used by write_corpus
    extra_lines: list[tuple[int, str]] = field(default_factory=list)

    def __post_init__(self):
        self._by_id: dict[str, CatalogueRecord] = {}
        for rec in self.records:
            if not _valid_id(rec.doc_id):
                raise ValueError(f"invalid doc_id {rec.doc_id!r}")
            if rec.doc_id in self._by_id:
                raise ValueError(f"duplicate doc_id {rec.doc_id!r}")
            self._by_id[rec.doc_id] = rec

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[CatalogueRecord]:
        return iter(self.records)

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self._by_id

    def __getitem__(self, doc_id: str) -> CatalogueRecord:
        return self._by_id[doc_id]

    @property
    def doc_ids(self) -> list[str]:
        return [r.doc_id for r in self.records]

    def counts(self) -> tuple[int, int]:
        """Return ``(non_distractors, distractors)``."""
        n_dist = sum(1 for r in self.records if r.distractor)
        return len(self.records) - n_dist, n_dist

    def indexable(self) -> list[CatalogueRecord]:
        return [r for r in self.records if r.indexable]

    def extend(self, other: Corpus | Iterable[CatalogueRecord]) -> Corpus:
        """Return a new corpus with ``other``'s records appended."""
        extra = other.records if isinstance(other, Corpus) else list(other)
        return Corpus(list(self.records) + list(extra), list(self.extra_lines))


def parse_corpus(text: str, path=None) -> Corpus:
    records: list[CatalogueRecord] = []
    extra: list[tuple[int, str]] = []
    seen: dict[str, int] = {}
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            extra.append((len(records), line))
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise FormatError(f"expected 4 tab-separated columns, got {len(cols)}", path, lineno)
        doc_id, title, author, flag = cols
        if not _valid_id(doc_id):
            raise FormatError(f"invalid doc_id {doc_id!r}", path, lineno)
        if flag not in ("0", "1"):
            raise FormatError(f"distractor flag must be 0 or 1, got {flag!r}", path, lineno)
        if doc_id in seen:
            raise FormatError(
                f"duplicate doc_id {doc_id!r} (first seen on line {seen[doc_id]})", path, lineno
            )
        seen[doc_id] = lineno
        records.append(CatalogueRecord(doc_id, title, author, flag == "1"))
    if not records:
        raise FormatError("corpus contains no records", path)
    return Corpus(records, extra)


def load_corpus(path) -> Corpus:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"not valid UTF-8 ({exc.reason})", path) from None
    return parse_corpus(text, path)


def format_corpus(corpus: Corpus, header: Sequence[str] = ()) -> str:
    out = io.StringIO()
    for line in header:
        out.write(f"# {line}\n" if not line.startswith("#") else f"{line}\n")
    extra = list(corpus.extra_lines)
    pos = 0
    for i, rec in enumerate(corpus.records):
        while pos < len(extra) and extra[pos][0] <= i:
            out.write(extra[pos][1] + "\n")
            pos += 1
        for value in (rec.title, rec.author):
            if "\t" in value or "\n" in value:
                raise ValueError(f"record {rec.doc_id!r} contains a tab or newline")
        out.write(f"{rec.doc_id}\t{rec.title}\t{rec.author}\t{int(rec.distractor)}\n")
    for _, line in extra[pos:]:
        out.write(line + "\n")
    return out.getvalue()


def write_corpus(corpus: Corpus, path, header: Sequence[str] = ()) -> None:
    Path(path).write_text(format_corpus(corpus, header), encoding="utf-8")


def default_dictionary() -> list[str]:
    """Bundled list of common English words used by the synthetic generator."""
    text = resources.files("ngramatch").joinpath("data/words.txt").read_text(encoding="utf-8")
    return text.split()


def synth_corpus(
    num_docs: int,
    words_per_title: tuple[int, int] = (2, 8),
    dictionary: Sequence[str] | None = None,
    seed: int = 0,
    *,
    words_per_author: tuple[int, int] = (0, 0),
    distractor: bool = False,
    id_prefix: str = "d",
) -> Corpus:
    """Generate ``num_docs`` records whose titles are random dictionary words.

    Ids are zero-padded so lexicographic order matches generation order.
    """
    if num_docs < 1:
        raise ValueError("num_docs must be >= 1")
    if dictionary is None:
        dictionary = default_dictionary()
    dictionary = list(dictionary)
    if not dictionary:
        raise ValueError("dictionary is empty")
    lo, hi = words_per_title
    if not 1 <= lo <= hi:
        raise ValueError(f"bad words_per_title range {words_per_title}")
    alo, ahi = words_per_author
    if not 0 <= alo <= ahi:
        raise ValueError(f"bad words_per_author range {words_per_author}")

    rng = random.Random(seed)
    width = len(str(num_docs - 1))
    records = []
    for i in range(num_docs):
        title = " ".join(rng.choice(dictionary) for _ in range(rng.randint(lo, hi)))
        author = " ".join(
            rng.choice(dictionary).capitalize() for _ in range(rng.randint(alo, ahi))
        )
        records.append(CatalogueRecord(f"{id_prefix}{i:0{width}d}", title, author, distractor))
    return Corpus(records)


@dataclass(frozen=True)
class QueryEntry:
    query_id: str
    ground_truth: str
    payload: str
    is_path: bool = False


@dataclass
class QuerySet:
    entries: list[QueryEntry]
    base_dir: Path = field(default_factory=Path)

    def __post_init__(self):
        self._by_id: dict[str, QueryEntry] = {}
        for e in self.entries:
            if not _valid_id(e.query_id):
                raise ValueError(f"invalid query_id {e.query_id!r}")
            if e.query_id in self._by_id:
                raise ValueError(f"duplicate query_id {e.query_id!r}")
            self._by_id[e.query_id] = e

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[QueryEntry]:
        return iter(self.entries)

    def __getitem__(self, query_id: str) -> QueryEntry:
        return self._by_id[query_id]

    def __contains__(self, query_id: object) -> bool:
        return query_id in self._by_id

    @property
    def query_ids(self) -> list[str]:
        return [e.query_id for e in self.entries]

    def ground_truth(self) -> dict[str, str]:
        return {e.query_id: e.ground_truth for e in self.entries}

    def subset(self, query_ids: Iterable[str]) -> QuerySet:
        return QuerySet([self._by_id[q] for q in query_ids], self.base_dir)

    def validate(self, corpus: Corpus) -> None:
        for e in self.entries:
            if e.ground_truth not in corpus:
                raise FormatError(
                    f"query {e.query_id!r}: ground truth {e.ground_truth!r} is not in the corpus"
                )

    def text(self, entry: QueryEntry | str) -> str:
        """Return the raw text payload, reading the token file if needed."""
        if isinstance(entry, str):
            entry = self._by_id[entry]
        if not entry.is_path:
            return entry.payload
        return (self.base_dir / entry.payload).read_text(encoding="utf-8")


def parse_queries(text: str, path=None, base_dir=None) -> QuerySet:
    entries = []
    seen = set()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise FormatError(f"expected 3 tab-separated columns, got {len(cols)}", path, lineno)
        qid, gt, payload = cols
        if not _valid_id(qid) or not _valid_id(gt):
            raise FormatError("query_id and ground_truth_doc_id must be non-empty tokens", path, lineno)
        if qid in seen:
            raise FormatError(f"duplicate query_id {qid!r}", path, lineno)
        seen.add(qid)
        if payload.startswith(PATH_PREFIX):
            entries.append(QueryEntry(qid, gt, payload[len(PATH_PREFIX):], True))
        else:
            entries.append(QueryEntry(qid, gt, payload))
    return QuerySet(entries, Path(base_dir) if base_dir is not None else Path())


def load_queries(path, corpus: Corpus | None = None) -> QuerySet:
    path = Path(path)
    qs = parse_queries(path.read_text(encoding="utf-8"), path, path.parent)
    if corpus is not None:
        qs.validate(corpus)
    return qs


def format_queries(queries: QuerySet, header: Sequence[str] = ()) -> str:
    out = io.StringIO()
    for line in header:
        out.write(f"# {line}\n")
    for e in queries:
        payload = PATH_PREFIX + e.payload if e.is_path else e.payload
        if "\t" in payload or "\n" in payload:
            raise ValueError(f"query {e.query_id!r}: payload contains a tab or newline")
        if not e.is_path and payload.startswith(PATH_PREFIX):
            raise ValueError(f"query {e.query_id!r}: inline payload may not start with {PATH_PREFIX!r}")
        out.write(f"{e.query_id}\t{e.ground_truth}\t{payload}\n")
    return out.getvalue()


def write_queries(queries: QuerySet, path, header: Sequence[str] = ()) -> None:
    Path(path).write_text(format_queries(queries, header), encoding="utf-8")
