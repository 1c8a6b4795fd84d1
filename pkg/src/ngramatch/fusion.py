"""Fusion of score channels: fixed linear weights or a learned pairwise
ranking SVM.

The learned model minimizes

    1/2 |w|^2 + C * sum_ij max(0, 1 - w . (phi(x_i, y_i) - phi(x_i, y_j)))

over training queries i and their non-matching candidates j, where phi
stacks one score per channel. The solver is full-batch subgradient descent
with step 1/t, shortened by halving whenever a step would not lower the
objective, so the objective never increases between epochs.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ngramatch.corpus import QuerySet
from ngramatch.errors import FormatError, NgramatchError
from ngramatch.rerank import Ranking
from ngramatch.scores import ScoreChannel

logger = logging.getLogger(__name__)

MODEL_FORMAT = "ngramatch-fusion-model"
MODEL_VERSION = 1
MAX_HALVINGS = 60


class TrainingError(NgramatchError):
    pass


@dataclass
class FusionModel:
    channel_names: list[str]
    weights: list[float]
    c_param: float = 1.0
    seed: int = 0
    # per-channel (min, max) learned on the training fold, or None
    scaling: list[tuple[float, float]] | None = None
    train_report: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.weights) != len(self.channel_names):
            raise ValueError("weights and channel_names differ in length")
        if self.c_param <= 0:
            raise ValueError("c_param must be > 0")

    def transform(self, X: np.ndarray) -> np.ndarray:
        if self.scaling is None:
            return X
        lo = np.array([a for a, _ in self.scaling])
        span = np.array([b - a for a, b in self.scaling])
        span[span == 0] = 1.0
        return (X - lo) / span

    def to_json(self, header: Sequence[str] = ()) -> str:
        doc = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "channel_names": self.channel_names,
            "weights": self.weights,
            "c_param": self.c_param,
            "seed": self.seed,
            "scaling": self.scaling,
            "train_report": self.train_report,
        }
        comments = "".join(f"# {line}\n" for line in header)
        return comments + json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str, path=None) -> FusionModel:
        body = "\n".join(ln for ln in text.split("\n") if not ln.startswith("#"))
        try:
            doc = json.loads(body)
            if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
                raise FormatError("not a fusion model file", path)
            scaling = doc.get("scaling")
            return cls(
                list(doc["channel_names"]),
                [float(w) for w in doc["weights"]],
                float(doc["c_param"]),
                int(doc.get("seed", 0)),
                [tuple(s) for s in scaling] if scaling is not None else None,
                dict(doc.get("train_report", {})),
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"invalid model file ({exc})", path) from None

    def save(self, path, header: Sequence[str] = ()) -> None:
        Path(path).write_text(self.to_json(header), encoding="utf-8")

    @classmethod
    def load(cls, path) -> FusionModel:
        path = Path(path)
        return cls.from_json(path.read_text(encoding="utf-8"), path)


def candidates(channels: Sequence[ScoreChannel], query_id: str) -> list[str]:
    """Union of the channels' supports for ``query_id``, sorted by doc_id."""
    docs: set[str] = set()
    for ch in channels:
        docs.update(ch.row(query_id))
    return sorted(docs)


def features(channels: Sequence[ScoreChannel], query_id: str, doc_ids: Sequence[str]) -> np.ndarray:
    """Feature matrix with one row per doc and one column per channel."""
    X = np.empty((len(doc_ids), len(channels)))
    for m, ch in enumerate(channels):
        row = ch.row(query_id)
        X[:, m] = [row.get(d, ch.default) for d in doc_ids]
    return X


def _check_names(channels: Sequence[ScoreChannel]) -> None:
    names = [ch.name for ch in channels]
    if len(set(names)) != len(names):
        raise ValueError(f"channel names must be unique, got {names}")


def combine_fixed(
    channels: Sequence[ScoreChannel], lambdas: Sequence[float], name: str = "combined"
) -> ScoreChannel:
    """Weighted sum of channels over the union of their supports."""
    if len(lambdas) != len(channels):
        raise ValueError(f"{len(lambdas)} lambdas given for {len(channels)} channels")
    query_ids: dict[str, None] = {}
    for ch in channels:
        query_ids.update(dict.fromkeys(ch.query_ids))
    out = {}
    for qid in query_ids:
        docs = candidates(channels, qid)
        totals = features(channels, qid, docs) @ np.asarray(lambdas, dtype=float) if docs else []
        out[qid] = {d: float(s) for d, s in zip(docs, totals)}
    return ScoreChannel(name, out)


def _weights_for(model_or_lambdas, channels: Sequence[ScoreChannel]):
    if isinstance(model_or_lambdas, FusionModel):
        names = [ch.name for ch in channels]
        if names != model_or_lambdas.channel_names:
            raise ValueError(
                f"model expects channels {model_or_lambdas.channel_names}, got {names}"
            )
        return np.asarray(model_or_lambdas.weights, dtype=float), model_or_lambdas.transform
    w = np.asarray(list(model_or_lambdas), dtype=float)
    if len(w) != len(channels):
        raise ValueError(f"{len(w)} weights given for {len(channels)} channels")
    return w, lambda X: X


def rank(
    model_or_lambdas,
    channels: Sequence[ScoreChannel],
    query_id: str,
    candidate_docs: Sequence[str] | None = None,
) -> Ranking:
    """Rank candidates for one query by descending fused score, ties by doc_id.

    Candidates default to the union of channel supports for the query.
    """
    w, transform = _weights_for(model_or_lambdas, channels)
    if candidate_docs is None:
        if not any(query_id in ch for ch in channels):
            raise KeyError(f"unknown query_id {query_id!r}")
        candidate_docs = candidates(channels, query_id)
    docs = sorted(set(candidate_docs))
    if not docs:
        return Ranking(query_id, [])
    fused = transform(features(channels, query_id, docs)) @ w
    order = np.argsort(-fused, kind="stable")
    return Ranking(query_id, [(docs[i], float(fused[i])) for i in order])


def rank_all(model_or_lambdas, channels: Sequence[ScoreChannel], query_ids: Sequence[str]) -> dict[str, Ranking]:
    """Rank every query; queries no channel covers get an empty ranking."""
    out = {}
    for qid in query_ids:
        if any(qid in ch for ch in channels):
            out[qid] = rank(model_or_lambdas, channels, qid)
        else:
            out[qid] = Ranking(qid, [])
    return out


def _pair_differences(
    channels: Sequence[ScoreChannel], queries: QuerySet, max_negatives: int | None
) -> tuple[list[np.ndarray], list[str]]:
    blocks = []
    used = []
    for entry in queries:
        gt = entry.ground_truth
        negs = [d for d in candidates(channels, entry.query_id) if d != gt]
        if not negs:
            continue
        X = features(channels, entry.query_id, negs)
        if max_negatives is not None and len(negs) > max_negatives:
            # strongest competitors by max channel score; stable sort keeps doc_id order on ties
            keep = np.sort(np.argsort(-X.max(axis=1), kind="stable")[:max_negatives])
            X = X[keep]
        pos = features(channels, entry.query_id, [gt])
        blocks.append(pos - X)
        used.append(entry.query_id)
    return blocks, used


def _objective(D: np.ndarray, w: np.ndarray, c: float) -> tuple[float, np.ndarray]:
    margins = D @ w
    return 0.5 * float(w @ w) + c * float(np.maximum(0.0, 1.0 - margins).sum()), margins


def train_ranksvm(
    channels: Sequence[ScoreChannel],
    train_queries: QuerySet,
    c_param: float = 1.0,
    epochs: int = 200,
    seed: int = 0,
    *,
    max_negatives: int | None = 1000,
    scale: bool = False,
) -> FusionModel:
    """Fit pairwise ranking weights on ``train_queries``.

    Every non-matching candidate in the union of channel supports becomes
    a constraint against the query's ground truth, capped at the
    ``max_negatives`` strongest per query. With ``scale`` each channel is
    min-max scaled using ranges seen on this training set only.

    The solver is deterministic; ``seed`` is recorded in the model.
    """
    if c_param <= 0:
        raise ValueError("c_param must be > 0")
    _check_names(channels)
    blocks, used = _pair_differences(channels, train_queries, max_negatives)
    if not blocks:
        raise TrainingError("no training pairs could be constructed")

    scaling = None
    if scale:
        # ranges over every feature vector the pairs were built from
        rows = []
        for entry in train_queries:
            docs = candidates(channels, entry.query_id)
            if entry.ground_truth not in docs:
                docs.append(entry.ground_truth)
            rows.append(features(channels, entry.query_id, docs))
        allx = np.vstack(rows)
        scaling = [(float(a), float(b)) for a, b in zip(allx.min(axis=0), allx.max(axis=0))]
        span = np.array([b - a for a, b in scaling])
        span[span == 0] = 1.0
        blocks = [b / span for b in blocks]

    D = np.vstack(blocks)
    if not np.isfinite(D).all():
        raise TrainingError("non-finite feature values")

    w = np.zeros(D.shape[1])
    obj, margins = _objective(D, w, c_param)
    history = [obj]
    last_step = np.inf
    ran = 0
    for t in range(1, epochs + 1):
        active = margins < 1.0
        grad = w - c_param * D[active].sum(axis=0)
        if not grad.any():
            break
        step = min(1.0 / t, 4.0 * last_step)
        for _ in range(MAX_HALVINGS):
            cand = w - step * grad
            cand_obj, cand_margins = _objective(D, cand, c_param)
            if cand_obj < obj:
                break
            step *= 0.5
        else:
            logger.debug("no descent step found at epoch %d; stopping", t)
            break
        w, obj, margins, last_step = cand, cand_obj, cand_margins, step
        history.append(obj)
        ran = t

    slack = np.maximum(0.0, 1.0 - margins)
    report = {
        "epochs": ran,
        "objective": obj,
        "slack": float(slack.sum()),
        "violated": int((margins <= 0.0).sum()),
        "margin_violations": int((margins < 1.0).sum()),
        "pairs": int(D.shape[0]),
        "queries": len(used),
        "objective_history": history,
    }
    logger.info("trained on %d pairs from %d queries: objective %.6g", D.shape[0], len(used), obj)
    return FusionModel([ch.name for ch in channels], w.tolist(), c_param, seed, scaling, report)


def count_violations(model: FusionModel, channels: Sequence[ScoreChannel], queries: QuerySet) -> int:
    """Exhaustively count (query, negative) pairs the model fails to order."""
    w, transform = _weights_for(model, channels)
    bad = 0
    for entry in queries:
        gt = entry.ground_truth
        negs = [d for d in candidates(channels, entry.query_id) if d != gt]
        if not negs:
            continue
        s_gt = float((transform(features(channels, entry.query_id, [gt])) @ w)[0])
        s_neg = transform(features(channels, entry.query_id, negs)) @ w
        bad += int((s_neg >= s_gt).sum())
    return bad


@dataclass
class CrossValidation:
    rankings: dict[str, Ranking]
    models: list[FusionModel]
    folds: list[list[str]]


def split_folds(query_ids: Sequence[str], seed: int) -> list[list[str]]:
    ids = list(query_ids)
    random.Random(seed).shuffle(ids)
    return [ids[0::2], ids[1::2]]


def crossval_twofold(
    channels: Sequence[ScoreChannel],
    queries: QuerySet,
    c_param: float = 1.0,
    seed: int = 0,
    epochs: int = 200,
    **train_kw,
) -> CrossValidation:
    """Rank each half of ``queries`` with a model trained on the other half."""
    if len(queries) < 2:
        raise ValueError("two-fold cross validation needs at least 2 queries")
    folds = split_folds(queries.query_ids, seed)
    rankings: dict[str, Ranking] = {}
    models = []
    for i, held_out in enumerate(folds):
        train = queries.subset(folds[1 - i])
        model = train_ranksvm(channels, train, c_param, epochs, seed, **train_kw)
        models.append(model)
        rankings.update(rank_all(model, channels, held_out))
    ordered = {qid: rankings[qid] for qid in queries.query_ids}
    return CrossValidation(ordered, models, folds)
