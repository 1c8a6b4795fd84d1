"""Character n-gram matching of noisy OCR-like text against clean catalogue
metadata, with score fusion, top-K reranking and retrieval-rate evaluation."""

from ngramatch.corpus import (
    CatalogueRecord,
    Corpus,
    QueryEntry,
    QuerySet,
    load_corpus,
    load_queries,
    synth_corpus,
    write_corpus,
    write_queries,
)
from ngramatch.errors import FormatError, NgramatchError
from ngramatch.eval import Curve, retrieval_curve, tabulate
from ngramatch.fusion import (
    FusionModel,
    combine_fixed,
    crossval_twofold,
    rank,
    train_ranksvm,
)
from ngramatch.noise import NoiseConfig, corrupt
from ngramatch.rerank import Ranking, rerank_topk
from ngramatch.scores import ScoreChannel
from ngramatch.textindex import (
    IdfTable,
    WeightedIndex,
    build_index,
    query_scores,
    sim_to_dist,
)
from ngramatch.tokenizer import TokenBag, merge, tokenize

__version__ = "0.1.0"

__all__ = [
    "CatalogueRecord",
    "Corpus",
    "Curve",
    "FormatError",
    "FusionModel",
    "IdfTable",
    "NgramatchError",
    "NoiseConfig",
    "QueryEntry",
    "QuerySet",
    "Ranking",
    "ScoreChannel",
    "TokenBag",
    "WeightedIndex",
    "build_index",
    "combine_fixed",
    "corrupt",
    "crossval_twofold",
    "load_corpus",
    "load_queries",
    "merge",
    "query_scores",
    "rank",
    "rerank_topk",
    "retrieval_curve",
    "sim_to_dist",
    "synth_corpus",
    "tabulate",
    "tokenize",
    "train_ranksvm",
    "write_corpus",
    "write_queries",
]
