"""Rankings and top-K reranking with an expensive score source.

Ranking file format (UTF-8)::

    # optional comment lines
    query_id<TAB>rank<TAB>doc_id<TAB>score

with ranks starting at 1 and contiguous per query. A query whose ranking
is empty is recorded as a single ``query_id<TAB>0<TAB><TAB>`` row.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ngramatch.errors import FormatError
from ngramatch.scores import ScoreChannel

HEADER = "query_id\trank\tdoc_id\tscore"
FALLBACKS = ("keep", "zero")


@dataclass
class Ranking:
    query_id: str
    entries: list[tuple[str, float]] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for doc_id, score in self.entries:
            if doc_id in seen:
                raise ValueError(f"ranking for {self.query_id!r} lists {doc_id!r} twice")
            if not math.isfinite(score):
                raise ValueError(f"ranking for {self.query_id!r} has a non-finite score for {doc_id!r}")
            seen.add(doc_id)

    @classmethod
    def from_scores(cls, query_id: str, scores: Mapping[str, float]) -> Ranking:
        """Sort by descending score, ties by ascending doc_id."""
        return cls(query_id, sorted(scores.items(), key=lambda kv: (-kv[1], kv[0])))

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def doc_ids(self) -> list[str]:
        return [d for d, _ in self.entries]

    def position(self, doc_id: str) -> int | None:
        """1-based rank of ``doc_id``, or None if absent."""
        for i, (d, _) in enumerate(self.entries, start=1):
            if d == doc_id:
                return i
        return None

    def head(self, k: int) -> Ranking:
        return Ranking(self.query_id, self.entries[:k])


def rerank_topk(r: Ranking, expensive: ScoreChannel, k: int, fallback: str = "keep") -> Ranking:
    """Re-sort the first ``k`` entries of ``r`` by the expensive channel.

    Entries the channel does not score either keep their prior relative
    order below all scored entries (``"keep"``) or are treated as scoring
    0 (``"zero"``). Entries past ``k`` are returned untouched. Reranked
    entries carry their expensive score; unscored "keep" entries keep
    their prior score.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if fallback not in FALLBACKS:
        raise ValueError(f"fallback must be one of {FALLBACKS}, got {fallback!r}")
    if k == 0:
        return Ranking(r.query_id, list(r.entries))
    block, rest = r.entries[:k], r.entries[k:]
    row = expensive.row(r.query_id)
    if fallback == "zero":
        rescored = [(d, row.get(d, 0.0)) for d, _ in block]
        new_block = sorted(rescored, key=lambda e: (-e[1], e[0]))
    else:
        scored = sorted(((d, row[d]) for d, _ in block if d in row), key=lambda e: (-e[1], e[0]))
        new_block = scored + [(d, s) for d, s in block if d not in row]
    return Ranking(r.query_id, new_block + list(rest))


def format_rankings(rankings: Iterable[Ranking], header: Sequence[str] = ()) -> str:
    out = io.StringIO()
    for line in header:
        out.write(f"# {line}\n")
    out.write(HEADER + "\n")
    for r in rankings:
        if not r.entries:
            out.write(f"{r.query_id}\t0\t\t\n")
        for i, (d, s) in enumerate(r.entries, start=1):
            out.write(f"{r.query_id}\t{i}\t{d}\t{s!r}\n")
    return out.getvalue()


def write_rankings(rankings: Iterable[Ranking], path, header: Sequence[str] = ()) -> None:
    Path(path).write_text(format_rankings(rankings, header), encoding="utf-8")


def parse_rankings(text: str, path=None) -> dict[str, Ranking]:
    rows: dict[str, list[tuple[str, float]]] = {}
    seen_header = False
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line or line.startswith("#"):
            continue
        if not seen_header:
            if line != HEADER:
                raise FormatError(f"expected header {HEADER!r}", path, lineno)
            seen_header = True
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise FormatError(f"expected 4 tab-separated columns, got {len(cols)}", path, lineno)
        qid, raw_rank, did, raw_score = cols
        if raw_rank == "0" and not did and not raw_score:
            if qid in rows:
                raise FormatError(f"empty-ranking marker for {qid!r} after entries", path, lineno)
            rows[qid] = []
            continue
        try:
            pos = int(raw_rank)
            score = float(raw_score)
        except ValueError:
            raise FormatError("bad rank or score", path, lineno) from None
        entries = rows.setdefault(qid, [])
        if pos != len(entries) + 1:
            raise FormatError(f"rank {pos} out of sequence for query {qid!r}", path, lineno)
        entries.append((did, score))
    if not seen_header:
        raise FormatError(f"missing header {HEADER!r}", path)
    try:
        return {q: Ranking(q, e) for q, e in rows.items()}
    except ValueError as exc:
        raise FormatError(str(exc), path) from None


def read_rankings(path) -> dict[str, Ranking]:
    path = Path(path)
    return parse_rankings(path.read_text(encoding="utf-8"), path)
