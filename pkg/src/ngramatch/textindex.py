"""tf-idf inverted file index over character n-gram bags.

Document vectors are ``L2(L2(f) * idf)`` and query vectors are
``L2(L1(f) * idf)``; similarity is their inner product, which lies in
[0, 1] because every component is non-negative. Document weights are
precomputed into the postings, so answering a query is a sparse dot
product over the postings of the query's grams.

Postings are stored column-compressed: for gram ``j``, its documents are
``doc_index[indptr[j]:indptr[j+1]]`` (ascending) with matching
``weight`` entries.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ngramatch.corpus import Corpus, QuerySet
from ngramatch.errors import FormatError
from ngramatch.scores import ScoreChannel
from ngramatch.tokenizer import TokenBag, tokenize

SNAPSHOT_VERSION = 1


@dataclass
class IdfTable:
    weights: dict[str, float]
    num_docs: int

    def __getitem__(self, gram: str) -> float:
        return self.weights[gram]

    def __contains__(self, gram: object) -> bool:
        return gram in self.weights

    def __len__(self) -> int:
        return len(self.weights)


class WeightedIndex:
    """Immutable inverted index; safe for concurrent queries."""

    def __init__(
        self,
        n: int,
        doc_ids: list[str],
        grams: list[str],
        idf: np.ndarray,
        indptr: np.ndarray,
        doc_index: np.ndarray,
        weight: np.ndarray,
        unicode_letters: bool = False,
    ):
        self.n = n
        self.doc_ids = doc_ids
        self.grams = grams
        self.idf_values = idf
        self.indptr = indptr
        self.doc_index = doc_index
        self.weight = weight
        self.unicode_letters = unicode_letters
        self._column = {g: j for j, g in enumerate(grams)}
        self.idf = IdfTable(dict(zip(grams, idf.tolist())), len(doc_ids))
        self.indexed_docs = frozenset(doc_ids)

    @property
    def num_docs(self) -> int:
        return len(self.doc_ids)

    def postings(self, gram: str) -> list[tuple[str, float]]:
        j = self._column.get(gram)
        if j is None:
            return []
        lo, hi = self.indptr[j], self.indptr[j + 1]
        return [(self.doc_ids[i], float(w)) for i, w in zip(self.doc_index[lo:hi], self.weight[lo:hi])]

    def query_vector(self, bag: TokenBag, inner: str | None = "l1") -> dict[str, float]:
        """Final query weights over grams that have a positive idf.

        ``inner`` selects the pre-idf normalization (``"l1"``, ``"l2"`` or
        ``None``). It is a positive rescaling of the whole bag, so the final
        L2 step erases it; the scoring path uses ``None``, which keeps scores
        bit-identical when grams absent from the index are added to a query.
        """
        if bag.n != self.n:
            raise ValueError(f"query gram length {bag.n} does not match index gram length {self.n}")
        if not bag:
            return {}
        if inner == "l1":
            norm = float(sum(bag.grams.values()))
        elif inner == "l2":
            norm = math.sqrt(sum(c * c for c in bag.grams.values()))
        elif inner is None:
            norm = 1.0
        else:
            raise ValueError(f"unknown normalization {inner!r}")
        vec = {}
        for gram in sorted(bag.grams):
            j = self._column.get(gram)
            if j is None:
                continue
            v = bag.grams[gram] / norm * self.idf_values[j]
            if v > 0.0:
                vec[gram] = v
        total = math.sqrt(sum(v * v for v in vec.values()))
        if total == 0.0:
            return {}
        return {g: v / total for g, v in vec.items()}

    def score_vector(self, bag: TokenBag) -> np.ndarray:
        """Dense similarity of ``bag`` against every indexed document."""
        qvec = self.query_vector(bag, inner=None)
        if not qvec:
            return np.zeros(self.num_docs)
        idx_parts = []
        w_parts = []
        for gram, qw in qvec.items():
            j = self._column[gram]
            lo, hi = self.indptr[j], self.indptr[j + 1]
            idx_parts.append(self.doc_index[lo:hi])
            w_parts.append(self.weight[lo:hi] * qw)
        scores = np.bincount(
            np.concatenate(idx_parts), weights=np.concatenate(w_parts), minlength=self.num_docs
        )
        # rounding can push an exact self-match a hair above 1
        return np.minimum(scores, 1.0)

    def search(self, bag: TokenBag, top: int | None = None) -> list[tuple[str, float]]:
        """Matching docs sorted by descending score, ties by doc_id."""
        scores = self.score_vector(bag)
        hits = np.flatnonzero(scores > 0.0)
        # doc indices follow doc_id order, so a stable sort breaks ties by doc_id
        order = hits[np.argsort(-scores[hits], kind="stable")]
        if top is not None:
            order = order[:top]
        return [(self.doc_ids[i], float(scores[i])) for i in order]

    def save(self, path, header: Sequence[str] = ()) -> None:
        with open(path, "wb") as fh:
            np.savez(
                fh,
                header=np.array(list(header), dtype=str),
                version=np.array(SNAPSHOT_VERSION),
                n=np.array(self.n),
                unicode_letters=np.array(self.unicode_letters),
                doc_ids=np.array(self.doc_ids, dtype=str),
                grams=np.array(self.grams, dtype=str),
                idf=self.idf_values,
                indptr=self.indptr,
                doc_index=self.doc_index,
                weight=self.weight,
            )

    @classmethod
    def load(cls, path) -> WeightedIndex:
        try:
            z = np.load(path, allow_pickle=False)
        except FileNotFoundError:
            raise
        except Exception as exc:
            raise FormatError(f"not a valid index snapshot ({exc})", path) from None
        with z:
            try:
                version = int(z["version"])
                arrays = {k: z[k] for k in ("n", "unicode_letters", "doc_ids", "grams", "idf", "indptr", "doc_index", "weight")}
            except (KeyError, ValueError) as exc:
                raise FormatError(f"not a valid index snapshot ({exc})", path) from None
        if version != SNAPSHOT_VERSION:
            raise FormatError(f"unsupported index snapshot version {version}", path)
        return cls(
            int(arrays["n"]),
            arrays["doc_ids"].tolist(),
            arrays["grams"].tolist(),
            arrays["idf"],
            arrays["indptr"],
            arrays["doc_index"],
            arrays["weight"],
            bool(arrays["unicode_letters"]),
        )


def _document_bags(
    source: Corpus | Mapping[str, TokenBag], n: int, unicode_letters: bool
) -> dict[str, TokenBag]:
    if isinstance(source, Corpus):
        return {
            r.doc_id: tokenize(r.annotation, n, unicode_letters=unicode_letters)
            for r in source.indexable()
        }
    bags = dict(source)
    for doc_id, bag in bags.items():
        if bag.n != n:
            raise ValueError(f"document {doc_id!r} was tokenized with n={bag.n}, index uses n={n}")
    return bags


def build_index(
    source: Corpus | Mapping[str, TokenBag], n: int = 3, *, unicode_letters: bool = False
) -> WeightedIndex:
    """Build the weighted inverted index.

    ``source`` is a corpus (its indexable records are tokenized) or a
    mapping of doc_id to pre-tokenized bags. Documents whose bag is empty
    count towards the document total but get no postings.
    """
    bags = _document_bags(source, n, unicode_letters)
    if not bags:
        raise ValueError("no indexable documents")
    doc_ids = sorted(bags)
    num_docs = len(doc_ids)

    vocab: dict[str, int] = {}
    rows: list[int] = []
    cols: list[int] = []
    counts: list[int] = []
    for i, doc_id in enumerate(doc_ids):
        for gram, c in bags[doc_id].grams.items():
            j = vocab.setdefault(gram, len(vocab))
            rows.append(i)
            cols.append(j)
            counts.append(c)

    # relabel columns so grams are stored in sorted order
    grams = sorted(vocab)
    relabel = np.empty(len(vocab), dtype=np.int64)
    for new, g in enumerate(grams):
        relabel[vocab[g]] = new
    row = np.asarray(rows, dtype=np.int64)
    col = relabel[np.asarray(cols, dtype=np.int64)] if cols else np.zeros(0, dtype=np.int64)
    f = np.asarray(counts, dtype=np.float64)

    df = np.bincount(col, minlength=len(grams))
    idf = np.log(num_docs / df) if len(grams) else np.zeros(0)

    l2 = np.sqrt(np.bincount(row, weights=f * f, minlength=num_docs))
    v = f / l2[row] * idf[col] if len(f) else f
    norm = np.sqrt(np.bincount(row, weights=v * v, minlength=num_docs))
    keep = v > 0.0
    row, col, v = row[keep], col[keep], v[keep]
    w = v / norm[row]

    order = np.lexsort((row, col))
    row, col, w = row[order], col[order], w[order]
    indptr = np.zeros(len(grams) + 1, dtype=np.int64)
    np.cumsum(np.bincount(col, minlength=len(grams)), out=indptr[1:])
    return WeightedIndex(
        n, doc_ids, grams, idf, indptr, row.astype(np.int32), w, unicode_letters
    )


def query_scores(index: WeightedIndex, q: TokenBag) -> dict[str, float]:
    """Similarity of ``q`` to every document sharing a weighted gram with it.

    Documents not in the result score 0. An empty or fully unseen query
    yields an empty dict.
    """
    scores = index.score_vector(q)
    hits = np.flatnonzero(scores > 0.0)
    return {index.doc_ids[i]: float(scores[i]) for i in hits}


def sim_to_dist(s: float, tol: float = 1e-9) -> float:
    """Euclidean distance between unit vectors whose inner product is ``s``."""
    if not -tol <= s <= 1.0 + tol:
        raise ValueError(f"similarity {s} outside [0, 1]")
    return math.sqrt(max(0.0, 2.0 - 2.0 * s))


def text_channel(
    index: WeightedIndex,
    queries: QuerySet,
    name: str | None = None,
    *,
    top: int | None = None,
    threads: int = 1,
) -> ScoreChannel:
    """Score every query in ``queries`` against the index.

    Queries with no text evidence get an empty row. Results do not depend
    on ``threads``.
    """
    name = name or f"ocr-{index.n}"

    def one(entry):
        bag = tokenize(queries.text(entry), index.n, unicode_letters=index.unicode_letters)
        return entry.query_id, dict(index.search(bag, top))

    entries = list(queries)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, entries))
    else:
        results = [one(e) for e in entries]
    return ScoreChannel(name, dict(results))


def text_channel_from_bags(
    index: WeightedIndex, bags: Iterable[tuple[str, TokenBag]], name: str | None = None, top: int | None = None
) -> ScoreChannel:
    return ScoreChannel(name or f"ocr-{index.n}", {qid: dict(index.search(b, top)) for qid, b in bags})
