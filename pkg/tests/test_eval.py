import random

import pytest
from hypothesis import given, strategies as st

from ngramatch.corpus import QueryEntry, QuerySet, default_dictionary, synth_corpus
from ngramatch.errors import FormatError
from ngramatch.eval import (
    Curve,
    export_curve_dat,
    parse_curves_dat,
    read_curve_dat,
    retrieval_curve,
    tabulate,
)
from ngramatch.fusion import rank_all
from ngramatch.noise import NoiseConfig, synth_queries
from ngramatch.rerank import Ranking
from ngramatch.textindex import build_index, text_channel

from oracles import rate_at


def ranked(qid, docs):
    return Ranking(qid, [(d, 1.0 - i / 100) for i, d in enumerate(docs)])


def queries(*pairs):
    return QuerySet([QueryEntry(q, gt, "x") for q, gt in pairs])


def test_curve_from_positions():
    qs = queries(("q1", "a"), ("q2", "b"), ("q3", "c"), ("q4", "z"))
    rs = {
        "q1": ranked("q1", ["a", "b", "c"]),
        "q2": ranked("q2", ["a", "c", "b"]),
        "q3": ranked("q3", ["c"]),
        "q4": ranked("q4", ["a", "b"]),
    }
    curve = retrieval_curve(rs, qs, 5)
    assert curve.points == [(1, 0.5), (2, 0.5), (3, 0.75), (4, 0.75), (5, 0.75)]


def test_all_first_gives_one():
    qs = queries(("q1", "a"), ("q2", "b"))
    rs = {"q1": ranked("q1", ["a"]), "q2": ranked("q2", ["b", "a"])}
    assert retrieval_curve(rs, qs, 3).rate(1) == 1.0


def test_empty_ranking_never_hits():
    qs = queries(("q1", "a"))
    assert retrieval_curve({"q1": Ranking("q1", [])}, qs, 2).rate(2) == 0.0


def test_missing_ranking_is_an_error():
    with pytest.raises(KeyError, match="q2"):
        retrieval_curve({"q1": ranked("q1", ["a"])}, queries(("q1", "a"), ("q2", "b")), 1)


@given(st.lists(st.one_of(st.none(), st.integers(1, 30)), min_size=1, max_size=40), st.integers(1, 25))
def test_curve_matches_position_oracle(positions, max_k):
    qs, rs = [], {}
    for i, p in enumerate(positions):
        qid = f"q{i}"
        docs = [f"n{j}" for j in range(30)]
        if p is not None:
            docs[p - 1] = "gt"
        qs.append(QueryEntry(qid, "gt", "x"))
        rs[qid] = ranked(qid, docs)
    curve = retrieval_curve(rs, QuerySet(qs), max_k)
    for k in range(1, max_k + 1):
        assert curve.rate(k) == rate_at(positions, len(positions), k)
    rates = [r for _, r in curve.points]
    assert rates == sorted(rates)


def test_curve_validation():
    with pytest.raises(ValueError):
        Curve([(1, 0.5), (2, 0.4)])
    with pytest.raises(ValueError):
        Curve([(2, 0.5), (2, 0.6)])
    with pytest.raises(ValueError):
        Curve([(1, 1.5)])
    with pytest.raises(ValueError):
        Curve([(1, 0.5)], "two words")
    with pytest.raises(ValueError):
        Curve([(1, 0.5)]).rate(2)


def test_tabulate_shape_and_flags():
    a = Curve([(k, min(1.0, 0.1 * k)) for k in range(1, 21)], "text")
    b = Curve([(k, min(1.0, 0.05 * k + 0.2)) for k in range(1, 21)], "fused")
    table = tabulate([a, b])
    assert table.ks == [1, 5, 10, 20]
    assert len(table.values) == 4 and all(len(r) == 2 for r in table.values)
    assert table.best[0] == [False, True]
    assert table.best[-1] == [True, True]


def test_ties_are_all_flagged():
    a = Curve([(1, 0.5)], "a")
    b = Curve([(1, 0.5)], "b")
    c = Curve([(1, 0.25)], "c")
    assert tabulate([a, b, c], [1]).best == [[True, True, False]]


def test_best_uses_unrounded_values():
    a = Curve([(1, 0.845)], "a")
    b = Curve([(1, 0.842)], "b")
    table = tabulate([a, b], [1])
    assert table.best == [[True, False]]
    text = table.to_text()
    assert "0.84*" in text or "0.85*" in text
    assert text.count("*") == 1
    tsv = table.to_tsv().splitlines()
    assert tsv[0] == "retrieved\ta\tb\tbest"
    assert tsv[1] == "1\t0.845\t0.842\ta"


def test_dat_round_trip(tmp_path):
    rng = random.Random(2)
    vals = sorted(rng.random() for _ in range(20))
    curve = Curve([(k + 1, v) for k, v in enumerate(vals)], "fused")
    path = tmp_path / "c.dat"
    export_curve_dat(curve, path)
    assert path.read_text().splitlines()[0] == "retrieved fused"
    (back,) = read_curve_dat(path)
    assert back == curve


def test_dat_multiple_curves(tmp_path):
    a = Curve([(1, 0.2), (2, 0.4)], "text")
    b = Curve([(1, 0.3), (2, 0.5)], "visual")
    path = tmp_path / "c.dat"
    export_curve_dat([a, b], path)
    assert read_curve_dat(path) == [a, b]
    with pytest.raises(ValueError):
        export_curve_dat([a, Curve([(1, 0.1)], "short")], path)


def test_dat_parse_errors():
    with pytest.raises(FormatError):
        parse_curves_dat("")
    with pytest.raises(FormatError):
        parse_curves_dat("k rate\n1 0.5\n")
    with pytest.raises(FormatError) as info:
        parse_curves_dat("# note\nretrieved rate\n1 0.5\n2\n")
    assert info.value.line == 4


def test_dat_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        export_curve_dat(Curve([(1, 0.5)]), tmp_path / "missing" / "c.dat")


def test_distractors_do_not_help():
    words = default_dictionary()[:200]
    corpus = synth_corpus(300, (2, 4), words, seed=42)
    cfg = NoiseConfig(sub_rate=0.15, word_drop_rate=0.1, spurious_singles=3, spurious_words=2, seed=7)
    qs = synth_queries(corpus, 150, cfg, seed=11)
    rates = []
    for extra in (0, 1000, 5000):
        full = corpus
        if extra:
            full = corpus.extend(synth_corpus(extra, (1, 6), words, seed=43, distractor=True, id_prefix="x"))
        ch = text_channel(build_index(full, 3), qs)
        rates.append(retrieval_curve(rank_all([1.0], [ch], qs.query_ids), qs, 10).rate(10))
    assert rates[0] >= rates[1] >= rates[2]
