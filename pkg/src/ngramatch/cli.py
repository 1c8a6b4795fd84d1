"""Command-line interface.

Every subcommand communicates through files only. Each output file starts
with ``#`` comment lines naming the tool version, the subcommand and the
full effective configuration. Failures print one line to stderr,
``error<TAB>category<TAB>message``, and exit with the category's code.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from ngramatch import __version__
from ngramatch.bench import synthetic_bench, time_queries
from ngramatch.corpus import (
    QueryEntry,
    QuerySet,
    format_corpus,
    format_queries,
    load_corpus,
    load_queries,
    synth_corpus,
)
from ngramatch.errors import FormatError, NgramatchError
from ngramatch.eval import format_curves_dat, retrieval_curve, tabulate
from ngramatch.fusion import FusionModel, combine_fixed, crossval_twofold, rank_all, train_ranksvm
from ngramatch.noise import NoiseConfig, corrupt, corrupt_many, load_noise_config, synth_queries
from ngramatch.rerank import FALLBACKS, format_rankings, read_rankings, rerank_topk
from ngramatch.scores import format_channel, read_channel
from ngramatch.textindex import WeightedIndex, build_index, text_channel
from ngramatch.tokenizer import tokenize

EXIT_CODES = {"internal": 1, "usage": 2, "missing-file": 3, "format": 4, "value": 5, "io": 6}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _header(args) -> list[str]:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    return [
        f"ngramatch {__version__} {args.command}",
        "config " + json.dumps(config, sort_keys=True, default=str),
    ]


def _write(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _noise_from_args(args) -> NoiseConfig:
    overrides = {
        "sub_rate": args.sub_rate,
        "del_rate": args.del_rate,
        "ins_rate": args.ins_rate,
        "word_drop_rate": args.word_drop_rate,
        "reversed_line_rate": args.reversed_line_rate,
        "spurious_singles": args.spurious_singles,
        "spurious_words": args.spurious_words,
        "seed": args.noise_seed,
    }
    if args.noise_config:
        return load_noise_config(args.noise_config, **overrides)
    return NoiseConfig(**{k: v for k, v in overrides.items() if v is not None})


def _add_noise_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("noise")
    g.add_argument("--noise-config", help="key = value noise config file; flags override it")
    for flag in ("sub-rate", "del-rate", "ins-rate", "word-drop-rate", "reversed-line-rate"):
        g.add_argument(f"--{flag}", type=float)
    g.add_argument("--spurious-singles", type=int)
    g.add_argument("--spurious-words", type=int)
    g.add_argument("--noise-seed", type=int)


def _channels(paths: Sequence[str]):
    return [read_channel(p) for p in paths]


def cmd_ingest(args) -> None:
    corpus = load_corpus(args.corpus)
    non_dist, dist = corpus.counts()
    print(f"records\t{len(corpus)}")
    print(f"non_distractors\t{non_dist}")
    print(f"distractors\t{dist}")
    print(f"indexable\t{len(corpus.indexable())}")
    if args.queries:
        qs = load_queries(args.queries, corpus)
        print(f"queries\t{len(qs)}")
    if args.out:
        _write(args.out, format_corpus(corpus, _header(args)))


def cmd_synth(args) -> None:
    dictionary = None
    if args.dictionary:
        dictionary = Path(args.dictionary).read_text(encoding="utf-8").split()
    corpus = synth_corpus(
        args.num_docs,
        (args.min_words, args.max_words),
        dictionary,
        args.seed,
        words_per_author=(args.min_author_words, args.max_author_words),
        distractor=args.distractor,
        id_prefix=args.id_prefix,
    )
    _write(args.out, format_corpus(corpus, _header(args)))
    if args.queries_out:
        cfg = _noise_from_args(args)
        qs = synth_queries(corpus, args.num_queries, cfg, seed=args.seed, include_distractors=args.distractor)
        _write(args.queries_out, format_queries(qs, _header(args)))


def cmd_corrupt(args) -> None:
    cfg = _noise_from_args(args)
    if args.text is not None:
        print(corrupt(args.text, cfg))
        return
    if not args.queries or not args.out:
        raise UsageError("corrupt needs --text, or --queries with --out")
    qs = load_queries(args.queries)
    texts = corrupt_many([qs.text(e) for e in qs], cfg)
    # newlines from token files become spaces so payloads stay inline
    entries = [QueryEntry(e.query_id, e.ground_truth, " ".join(t.split())) for e, t in zip(qs, texts)]
    _write(args.out, format_queries(QuerySet(entries), _header(args)))


def cmd_build_index(args) -> None:
    corpus = load_corpus(args.corpus)
    index = build_index(corpus, args.n, unicode_letters=args.unicode_letters)
    index.save(args.out, _header(args))
    print(f"indexed\t{index.num_docs}")
    print(f"grams\t{len(index.grams)}")


def cmd_text_scores(args) -> None:
    index = WeightedIndex.load(args.index)
    qs = load_queries(args.queries)
    channel = text_channel(index, qs, args.name, top=args.top, threads=args.threads)
    _write(args.out, format_channel(channel, _header(args)))


def cmd_combine(args) -> None:
    channels = _channels(args.channels)
    combined = combine_fixed(channels, args.lambdas, args.name)
    _write(args.out, format_channel(combined, _header(args)))


def cmd_train(args) -> None:
    channels = _channels(args.channels)
    qs = load_queries(args.queries)
    model = train_ranksvm(
        channels, qs, args.c, args.epochs, args.seed, max_negatives=args.max_negatives or None, scale=args.scale
    )
    model.save(args.out, _header(args))
    rep = model.train_report
    print(f"weights\t{' '.join(repr(w) for w in model.weights)}")
    print(f"objective\t{rep['objective']!r}")
    print(f"violated\t{rep['violated']}")


def cmd_rank(args) -> None:
    channels = _channels(args.channels)
    qs = load_queries(args.queries)
    if sum([args.model is not None, args.lambdas is not None, args.crossval]) != 1:
        raise UsageError("rank needs exactly one of --model, --lambdas, --crossval")
    if args.crossval:
        cv = crossval_twofold(
            channels, qs, args.c, args.seed, args.epochs,
            max_negatives=args.max_negatives or None, scale=args.scale,
        )
        rankings = cv.rankings
        if args.models_out:
            for i, model in enumerate(cv.models):
                model.save(f"{args.models_out}.fold{i}.json", _header(args))
    else:
        weights = FusionModel.load(args.model) if args.model else args.lambdas
        rankings = rank_all(weights, channels, qs.query_ids)
    _write(args.out, format_rankings(rankings.values(), _header(args)))


def cmd_rerank(args) -> None:
    rankings = read_rankings(args.rankings)
    expensive = read_channel(args.expensive)
    out = [rerank_topk(r, expensive, args.k, args.fallback) for r in rankings.values()]
    _write(args.out, format_rankings(out, _header(args)))


def cmd_eval(args) -> None:
    qs = load_queries(args.queries)
    labels = args.labels or [Path(p).stem for p in args.rankings]
    if len(labels) != len(args.rankings):
        raise UsageError("--labels must match --rankings in number")
    curves = [
        retrieval_curve(read_rankings(path), qs, args.max_k, label)
        for path, label in zip(args.rankings, labels)
    ]
    table = tabulate(curves, args.ks)
    sys.stdout.write(table.to_text())
    comments = "".join(f"# {h}\n" for h in _header(args))
    if args.table:
        _write(args.table, comments + table.to_tsv())
    if args.dat:
        _write(args.dat, comments + format_curves_dat(curves))


def cmd_bench(args) -> None:
    if args.index:
        if not args.queries:
            raise UsageError("--index needs --queries")
        index = WeightedIndex.load(args.index)
        qs = load_queries(args.queries)
        result = time_queries(index, [tokenize(qs.text(e), index.n, unicode_letters=index.unicode_letters) for e in qs])
    else:
        _, result = synthetic_bench(
            args.num_docs, args.num_queries, args.n, (args.min_words, args.max_words), args.seed
        )
    text = result.to_tsv(_header(args))
    if args.out:
        _write(args.out, text)
    sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ngramatch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ngramatch {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate a corpus (and queries) and report counts")
    p.add_argument("--corpus", required=True)
    p.add_argument("--queries")
    p.add_argument("--out", help="write a normalized copy of the corpus")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic corpus and optional noisy queries")
    p.add_argument("--num-docs", type=int, required=True)
    p.add_argument("--min-words", type=int, default=2)
    p.add_argument("--max-words", type=int, default=8)
    p.add_argument("--min-author-words", type=int, default=0)
    p.add_argument("--max-author-words", type=int, default=0)
    p.add_argument("--dictionary", help="word list file (default: bundled list)")
    p.add_argument("--distractor", action="store_true", help="mark generated records as distractors")
    p.add_argument("--id-prefix", default="d")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--queries-out")
    p.add_argument("--num-queries", type=int, default=100)
    _add_noise_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("corrupt", help="apply synthetic OCR noise to text or query payloads")
    p.add_argument("--text")
    p.add_argument("--queries")
    p.add_argument("--out")
    _add_noise_flags(p)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("build-index", help="build the tf-idf n-gram index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--unicode-letters", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("text-scores", help="score queries against an index into a channel file")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--name")
    p.add_argument("--top", type=int, help="keep only the best TOP docs per query")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_text_scores)

    p = sub.add_parser("combine", help="fixed-weight linear combination of channels")
    p.add_argument("--channels", nargs="+", required=True)
    p.add_argument("--lambdas", nargs="+", type=float, required=True)
    p.add_argument("--name", default="combined")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_combine)

    def add_train_flags(q):
        q.add_argument("--c", type=float, default=1.0)
        q.add_argument("--epochs", type=int, default=200)
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--max-negatives", type=int, default=1000, help="0 means no cap")
        q.add_argument("--scale", action="store_true", help="min-max scale channels on the training fold")

    p = sub.add_parser("train", help="train pairwise ranking weights")
    p.add_argument("--channels", nargs="+", required=True)
    p.add_argument("--queries", required=True)
    add_train_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rank", help="fuse channels into rankings")
    p.add_argument("--channels", nargs="+", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--model")
    p.add_argument("--lambdas", nargs="+", type=float)
    p.add_argument("--crossval", action="store_true", help="two-fold cross-validated ranking model")
    add_train_flags(p)
    p.add_argument("--models-out", help="prefix for per-fold model files")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("rerank", help="rerank the top K of each ranking with an expensive channel")
    p.add_argument("--rankings", required=True)
    p.add_argument("--expensive", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--fallback", choices=FALLBACKS, default="keep")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("eval", help="retrieval-rate curves and table")
    p.add_argument("--rankings", nargs="+", required=True)
    p.add_argument("--labels", nargs="+")
    p.add_argument("--queries", required=True)
    p.add_argument("--max-k", type=int, default=20)
    p.add_argument("--ks", nargs="+", type=int, default=[1, 5, 10, 20])
    p.add_argument("--table", help="TSV table output (raw values)")
    p.add_argument("--dat", help="curve .dat output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="measure per-query latency")
    p.add_argument("--index")
    p.add_argument("--queries")
    p.add_argument("--num-docs", type=int, default=100_000)
    p.add_argument("--num-queries", type=int, default=200)
    p.add_argument("--min-words", type=int, default=3)
    p.add_argument("--max-words", type=int, default=7)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def _fail(category: str, message: str) -> int:
    message = " ".join(str(message).split())
    print(f"error\t{category}\t{message}", file=sys.stderr)
    return EXIT_CODES[category]


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        args.func(args)
    except UsageError as exc:
        return _fail("usage", exc)
    except FileNotFoundError as exc:
        return _fail("missing-file", f"{exc.strerror}: {exc.filename}")
    except FormatError as exc:
        return _fail("format", exc)
    except (ValueError, KeyError, NgramatchError) as exc:
        return _fail("value", exc.args[0] if isinstance(exc, KeyError) and exc.args else exc)
    except OSError as exc:
        return _fail("io", f"{exc.strerror}: {exc.filename}")
    except Exception as exc:  # noqa: BLE001
        logging.getLogger(__name__).debug("internal error", exc_info=True)
        return _fail("internal", f"{type(exc).__name__}: {exc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
