"""Score channels: sparse per-(query, document) similarity tables.

File format (UTF-8)::

    # optional comment lines
    query_id<TAB>doc_id<TAB>score
    q1<TAB>b001<TAB>0.8125
    ...

Pairs absent from the file take the channel default (0).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from ngramatch.errors import FormatError

HEADER = "query_id\tdoc_id\tscore"


@dataclass
class ScoreChannel:
    name: str
    scores: dict[str, dict[str, float]] = field(default_factory=dict)
    default: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.default):
            raise ValueError(f"channel {self.name!r}: default must be finite")
        for qid, row in self.scores.items():
            for did, s in row.items():
                if not math.isfinite(s):
                    raise ValueError(f"channel {self.name!r}: non-finite score for ({qid}, {did})")

    @classmethod
    def from_triples(cls, name: str, triples: Iterable[tuple[str, str, float]], default: float = 0.0):
        scores: dict[str, dict[str, float]] = {}
        for qid, did, s in triples:
            scores.setdefault(qid, {})[did] = float(s)
        return cls(name, scores, default)

    def __contains__(self, query_id: object) -> bool:
        return query_id in self.scores

    def __len__(self) -> int:
        return sum(len(row) for row in self.scores.values())

    @property
    def query_ids(self) -> list[str]:
        return list(self.scores)

    def set_query(self, query_id: str, row: Mapping[str, float]) -> None:
        row = {d: float(s) for d, s in row.items()}
        for d, s in row.items():
            if not math.isfinite(s):
                raise ValueError(f"channel {self.name!r}: non-finite score for ({query_id}, {d})")
        self.scores[query_id] = row

    def row(self, query_id: str) -> dict[str, float]:
        return self.scores.get(query_id, {})

    def get(self, query_id: str, doc_id: str) -> float:
        return self.scores.get(query_id, {}).get(doc_id, self.default)

    def items(self) -> Iterator[tuple[str, str, float]]:
        for qid, row in self.scores.items():
            for did, s in row.items():
                yield qid, did, s

    def truncated(self, top: int) -> ScoreChannel:
        """Keep the ``top`` best-scoring docs per query (ties by doc_id)."""
        out = {}
        for qid, row in self.scores.items():
            best = sorted(row.items(), key=lambda kv: (-kv[1], kv[0]))[:top]
            out[qid] = dict(best)
        return ScoreChannel(self.name, out, self.default)


def format_channel(channel: ScoreChannel, header: Sequence[str] = ()) -> str:
    out = io.StringIO()
    for line in header:
        out.write(f"# {line}\n")
    out.write(HEADER + "\n")
    for qid, did, s in channel.items():
        out.write(f"{qid}\t{did}\t{s!r}\n")
    return out.getvalue()


def write_channel(channel: ScoreChannel, path, header: Sequence[str] = ()) -> None:
    Path(path).write_text(format_channel(channel, header), encoding="utf-8")


def parse_channel(text: str, name: str, path=None) -> ScoreChannel:
    scores: dict[str, dict[str, float]] = {}
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
        if len(cols) != 3:
            raise FormatError(f"expected 3 tab-separated columns, got {len(cols)}", path, lineno)
        qid, did, raw = cols
        try:
            s = float(raw)
        except ValueError:
            raise FormatError(f"bad score {raw!r}", path, lineno) from None
        if not math.isfinite(s):
            raise FormatError(f"non-finite score {raw!r}", path, lineno)
        row = scores.setdefault(qid, {})
        if did in row:
            raise FormatError(f"duplicate pair ({qid}, {did})", path, lineno)
        row[did] = s
    if not seen_header:
        raise FormatError(f"missing header {HEADER!r}", path)
    return ScoreChannel(name, scores)


def read_channel(path, name: str | None = None) -> ScoreChannel:
    path = Path(path)
    return parse_channel(path.read_text(encoding="utf-8"), name or path.stem, path)
