"""Seeded synthetic corruption standing in for an OCR front end.

Also generates synthetic query sets and synthetic score channels (a
"visual" channel with its own error mode, and an expensive rerank oracle)
for desk-scale experiments.
"""

from __future__ import annotations

import dataclasses
import random
import re
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ngramatch.corpus import Corpus, QueryEntry, QuerySet
from ngramatch.errors import FormatError
from ngramatch.scores import ScoreChannel

LETTERS = string.ascii_lowercase
_SPLIT_WS = re.compile(r"(\s+)")


@dataclass(frozen=True)
class NoiseConfig:
    sub_rate: float = 0.0
    del_rate: float = 0.0
    ins_rate: float = 0.0
    word_drop_rate: float = 0.0
    reversed_line_rate: float = 0.0
    spurious_singles: int = 0
    spurious_words: int = 0
    seed: int = 0

    def __post_init__(self):
        for name in ("sub_rate", "del_rate", "ins_rate", "word_drop_rate", "reversed_line_rate"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        for name in ("spurious_singles", "spurious_words"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def with_seed(self, seed: int) -> NoiseConfig:
        return dataclasses.replace(self, seed=seed)

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in dataclasses.fields(self))


def _field_types() -> dict[str, type]:
    return {f.name: (int if f.name in ("spurious_singles", "spurious_words", "seed") else float)
            for f in dataclasses.fields(NoiseConfig)}


def parse_noise_config(text: str, path=None, **overrides) -> NoiseConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    types = _field_types()
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError("expected 'key = value'", path, lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise FormatError(f"unknown noise parameter {key!r}", path, lineno)
        try:
            values[key] = types[key](raw)
        except ValueError:
            raise FormatError(f"bad value {raw!r} for {key}", path, lineno) from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return NoiseConfig(**values)
    except ValueError as exc:
        raise FormatError(str(exc), path) from None


def load_noise_config(path, **overrides) -> NoiseConfig:
    path = Path(path)
    return parse_noise_config(path.read_text(encoding="utf-8"), path, **overrides)


def corrupt(text: str, cfg: NoiseConfig) -> str:
    """Apply word drops, character edits, optional reversal, then junk tokens."""
    rng = random.Random(cfg.seed)

    parts = _SPLIT_WS.split(text)
    if cfg.word_drop_rate > 0.0:
        for i in range(0, len(parts), 2):
            if parts[i] and rng.random() < cfg.word_drop_rate:
                parts[i] = ""
    kept = "".join(parts)

    out = []
    edit = cfg.sub_rate > 0.0 or cfg.del_rate > 0.0 or cfg.ins_rate > 0.0
    for ch in kept if edit else ():
        if cfg.ins_rate > 0.0 and rng.random() < cfg.ins_rate:
            out.append(rng.choice(LETTERS))
        if cfg.del_rate > 0.0 and rng.random() < cfg.del_rate:
            continue
        if cfg.sub_rate > 0.0 and rng.random() < cfg.sub_rate:
            out.append(rng.choice(LETTERS))
        else:
            out.append(ch)
    result = "".join(out) if edit else kept

    if cfg.reversed_line_rate > 0.0 and rng.random() < cfg.reversed_line_rate:
        result = result[::-1]

    junk = [rng.choice(LETTERS) for _ in range(cfg.spurious_singles)]
    junk += [
        "".join(rng.choice(LETTERS) for _ in range(rng.randint(3, 8)))
        for _ in range(cfg.spurious_words)
    ]
    if junk:
        result = " ".join([result, *junk]) if result else " ".join(junk)
    return result


def corrupt_many(texts: Sequence[str], cfg: NoiseConfig) -> list[str]:
    """Corrupt each text with its own seed derived from ``cfg.seed``."""
    seeds = np.random.SeedSequence(cfg.seed).generate_state(len(texts), dtype=np.uint64)
    return [corrupt(t, cfg.with_seed(int(s))) for t, s in zip(texts, seeds)]


def synth_queries(
    corpus: Corpus,
    num_queries: int,
    cfg: NoiseConfig,
    seed: int = 0,
    *,
    include_distractors: bool = False,
    id_prefix: str = "q",
) -> QuerySet:
    """Pick ground-truth records and emit corrupted copies of their annotations.

    Ground truths are sampled without replacement when possible.
    """
    pool = [r for r in corpus if r.indexable and (include_distractors or not r.distractor)]
    if not pool:
        raise ValueError("no eligible ground-truth records")
    rng = random.Random(seed)
    if num_queries <= len(pool):
        picks = rng.sample(pool, num_queries)
    else:
        picks = [rng.choice(pool) for _ in range(num_queries)]
    texts = corrupt_many([r.annotation for r in picks], cfg)
    width = len(str(max(num_queries - 1, 0)))
    entries = [
        QueryEntry(f"{id_prefix}{i:0{width}d}", rec.doc_id, text)
        for i, (rec, text) in enumerate(zip(picks, texts))
    ]
    return QuerySet(entries)


def visual_channel(
    queries: QuerySet,
    doc_ids: Sequence[str],
    *,
    corrupt_fraction: float = 0.4,
    candidates: int = 100,
    clean_scale: float = 0.1,
    tail_scale: float = 0.5,
    seed: int = 0,
    name: str = "visual",
) -> ScoreChannel:
    """Synthetic channel whose mistakes are independent of the text channel.

    Each query scores its ground truth plus ``candidates - 1`` random other
    docs. Raw scores are ``1[doc is ground truth] + noise``; noise is small
    half-normal for clean queries and heavy-tailed (|Cauchy|) for the
    ``corrupt_fraction`` of queries that are corrupted. Raw scores ``x``
    are reported as the bounded similarity ``x / (1 + x)``, which keeps
    each query's order.
    """
    rng = np.random.default_rng(seed)
    docs = list(doc_ids)
    scores = {}
    for entry in queries:
        picked = rng.choice(len(docs), size=min(candidates, len(docs)), replace=False)
        others = [docs[i] for i in picked if docs[i] != entry.ground_truth][: candidates - 1]
        cand = [entry.ground_truth, *others]
        if rng.random() < corrupt_fraction:
            noise = tail_scale * np.abs(rng.standard_cauchy(len(cand)))
        else:
            noise = clean_scale * np.abs(rng.standard_normal(len(cand)))
        base = np.zeros(len(cand))
        base[0] = 1.0
        raw = base + noise
        vals = raw / (1.0 + raw)
        scores[entry.query_id] = {d: float(v) for d, v in zip(cand, vals)}
    return ScoreChannel(name, scores)


def expensive_oracle(
    queries: QuerySet,
    candidates: dict[str, Sequence[str]],
    *,
    success_rate: float = 0.85,
    noise_scale: float = 0.3,
    seed: int = 0,
    name: str = "expensive",
) -> ScoreChannel:
    """Noisy but top-heavy verification scores over given candidate lists.

    With probability ``success_rate`` the ground truth (when a candidate)
    scores 1 plus small noise; other candidates score uniform noise in
    ``[0, noise_scale]``. On failure the ground truth is left unscored,
    mimicking a localization step that found nothing.
    """
    rng = np.random.default_rng(seed)
    gt = queries.ground_truth()
    scores = {}
    for qid, cands in candidates.items():
        row = {}
        ok = rng.random() < success_rate
        for d in cands:
            if d == gt.get(qid):
                if ok:
                    row[d] = 1.0 + noise_scale * float(rng.random())
            else:
                row[d] = noise_scale * float(rng.random())
        scores[qid] = row
    return ScoreChannel(name, scores)
