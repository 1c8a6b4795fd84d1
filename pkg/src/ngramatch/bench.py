"""Query latency measurement for the text index."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ngramatch.corpus import synth_corpus
from ngramatch.noise import NoiseConfig, synth_queries
from ngramatch.textindex import WeightedIndex, build_index
from ngramatch.tokenizer import TokenBag, tokenize

# moderate OCR-like damage for benchmark queries
BENCH_NOISE = NoiseConfig(sub_rate=0.1, word_drop_rate=0.1, spurious_singles=3, spurious_words=2)


@dataclass
class BenchResult:
    docs: int
    queries: int
    median_ms: float
    p99_ms: float
    latencies_ms: list[float]

    def to_tsv(self, header: Sequence[str] = ()) -> str:
        lines = [f"# {h}" for h in header]
        lines.append("docs\tqueries\tmedian_ms\tp99_ms")
        lines.append(f"{self.docs}\t{self.queries}\t{self.median_ms:.3f}\t{self.p99_ms:.3f}")
        return "\n".join(lines) + "\n"


def time_queries(index: WeightedIndex, bags: Sequence[TokenBag], warmup: int = 3) -> BenchResult:
    """Time scoring plus full ranking of each query bag."""
    for bag in bags[:warmup]:
        index.search(bag)
    lat = []
    for bag in bags:
        t0 = time.perf_counter()
        index.search(bag)
        lat.append((time.perf_counter() - t0) * 1000.0)
    arr = np.asarray(lat)
    return BenchResult(
        index.num_docs, len(bags), float(np.median(arr)), float(np.percentile(arr, 99)), lat
    )


def synthetic_bench(
    num_docs: int = 100_000,
    num_queries: int = 200,
    n: int = 3,
    words_per_title: tuple[int, int] = (3, 7),
    seed: int = 0,
    noise: NoiseConfig = BENCH_NOISE,
) -> tuple[WeightedIndex, BenchResult]:
    corpus = synth_corpus(num_docs, words_per_title, seed=seed)
    index = build_index(corpus, n)
    queries = synth_queries(corpus, num_queries, noise.with_seed(seed + 1), seed=seed + 2)
    bags = [tokenize(queries.text(e), n) for e in queries]
    return index, time_queries(index, bags)
