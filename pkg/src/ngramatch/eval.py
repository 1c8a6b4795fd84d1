"""Retrieval rate as a function of retrieval-set size.

``rate(k)`` is the fraction of queries whose ground truth sits within the
first ``k`` entries of its ranking. Curves export to whitespace-separated
``.dat`` files with a ``retrieved`` column followed by one column per
curve.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from ngramatch.corpus import QuerySet
from ngramatch.errors import FormatError
from ngramatch.rerank import Ranking

K_COLUMN = "retrieved"


@dataclass
class Curve:
    points: list[tuple[int, float]]
    label: str = "rate"

    def __post_init__(self):
        if any(c.isspace() for c in self.label) or not self.label:
            raise ValueError(f"curve label must be a non-empty token, got {self.label!r}")
        prev_k, prev_r = 0, -1.0
        for k, r in self.points:
            if k <= prev_k:
                raise ValueError("curve k values must be >= 1 and strictly increasing")
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"rate {r} at k={k} outside [0, 1]")
            if r < prev_r:
                raise ValueError(f"rate decreases at k={k}")
            prev_k, prev_r = k, r

    @property
    def ks(self) -> list[int]:
        return [k for k, _ in self.points]

    @property
    def max_k(self) -> int:
        return self.points[-1][0] if self.points else 0

    def rate(self, k: int) -> float:
        """Rate at ``k``; between stored points the curve is a step function."""
        if not self.points or k < self.points[0][0] or k > self.max_k:
            raise ValueError(f"k={k} outside curve range")
        value = 0.0
        for pk, r in self.points:
            if pk > k:
                break
            value = r
        return value


def retrieval_curve(
    rankings: Mapping[str, Ranking], queries: QuerySet, max_k: int, label: str = "rate"
) -> Curve:
    if max_k < 1:
        raise ValueError("max_k must be >= 1")
    if not len(queries):
        raise ValueError("no queries")
    hits = [0] * (max_k + 1)
    for entry in queries:
        r = rankings.get(entry.query_id)
        if r is None:
            raise KeyError(f"no ranking for query {entry.query_id!r}")
        pos = r.position(entry.ground_truth)
        if pos is not None and pos <= max_k:
            hits[pos] += 1
    total = len(queries)
    points = []
    found = 0
    for k in range(1, max_k + 1):
        found += hits[k]
        points.append((k, found / total))
    return Curve(points, label)


@dataclass
class Table:
    ks: list[int]
    labels: list[str]
    values: list[list[float]]   # values[row][col], un-rounded
    best: list[list[bool]]      # flagged per-row maxima

    def to_tsv(self) -> str:
        """Machine output: raw values, plus the labels of each row's best."""
        out = io.StringIO()
        out.write("\t".join([K_COLUMN, *self.labels, "best"]) + "\n")
        for k, row, flags in zip(self.ks, self.values, self.best):
            winners = ",".join(lab for lab, f in zip(self.labels, flags) if f)
            out.write("\t".join([str(k), *(repr(v) for v in row), winners]) + "\n")
        return out.getvalue()

    def to_text(self) -> str:
        """Aligned display table: 2 decimals, best values marked with ``*``."""
        header = [K_COLUMN, *self.labels]
        rows = [
            [str(k), *(f"{v:.2f}" + ("*" if f else " ") for v, f in zip(vals, flags))]
            for k, vals, flags in zip(self.ks, self.values, self.best)
        ]
        widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
        lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() for r in [header, *rows]]
        return "\n".join(lines) + "\n"


def tabulate(curves: Sequence[Curve], ks: Sequence[int] = (1, 5, 10, 20)) -> Table:
    values = []
    best = []
    for k in ks:
        row = [c.rate(k) for c in curves]
        top = max(row) if row else 0.0
        values.append(row)
        best.append([v == top for v in row])
    return Table(list(ks), [c.label for c in curves], values, best)


def format_curves_dat(curves: Sequence[Curve]) -> str:
    if not curves:
        raise ValueError("no curves to export")
    ks = curves[0].ks
    for c in curves[1:]:
        if c.ks != ks:
            raise ValueError(f"curve {c.label!r} has a different k column")
    out = io.StringIO()
    out.write(" ".join([K_COLUMN, *(c.label for c in curves)]) + "\n")
    for i, k in enumerate(ks):
        out.write(" ".join([str(k), *(repr(c.points[i][1]) for c in curves)]) + "\n")
    return out.getvalue()


def export_curve_dat(curve: Curve | Sequence[Curve], path) -> None:
    curves = [curve] if isinstance(curve, Curve) else list(curve)
    text = format_curves_dat(curves)
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write curve file: {exc.strerror}", str(path)) from exc


def parse_curves_dat(text: str, path=None) -> list[Curve]:
    lines = [
        (lineno, ln)
        for lineno, ln in enumerate(text.split("\n"), start=1)
        if ln.strip() and not ln.startswith("#")
    ]
    if not lines:
        raise FormatError("empty curve file", path)
    header = lines[0][1].split()
    if len(header) < 2 or header[0] != K_COLUMN:
        raise FormatError(
            f"header must start with {K_COLUMN!r} and name at least one curve", path, lines[0][0]
        )
    cols: list[list[tuple[int, float]]] = [[] for _ in header[1:]]
    for lineno, line in lines[1:]:
        parts = line.split()
        if len(parts) != len(header):
            raise FormatError(f"expected {len(header)} columns", path, lineno)
        try:
            k = int(parts[0])
            for col, raw in zip(cols, parts[1:]):
                col.append((k, float(raw)))
        except ValueError:
            raise FormatError("bad number", path, lineno) from None
    try:
        return [Curve(pts, label) for pts, label in zip(cols, header[1:])]
    except ValueError as exc:
        raise FormatError(str(exc), path) from None


def read_curve_dat(path) -> list[Curve]:
    path = Path(path)
    return parse_curves_dat(path.read_text(encoding="utf-8"), path)
