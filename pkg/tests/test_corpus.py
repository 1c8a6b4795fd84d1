from collections import Counter

import pytest

from ngramatch.corpus import (
    CatalogueRecord,
    Corpus,
    QueryEntry,
    QuerySet,
    format_corpus,
    load_corpus,
    load_queries,
    parse_corpus,
    synth_corpus,
    write_corpus,
    write_queries,
)
from ngramatch.errors import FormatError


def test_line_maps_to_record():
    corpus = parse_corpus("b001\tAlgorithms Unlocked\tThomas Cormen\t0\n")
    rec = corpus["b001"]
    assert rec == CatalogueRecord("b001", "Algorithms Unlocked", "Thomas Cormen", False)
    assert rec.annotation == "Algorithms Unlocked Thomas Cormen"


def test_duplicate_id_is_an_error():
    with pytest.raises(FormatError, match="b001"):
        parse_corpus("b001\tA\tB\t0\nb001\tC\tD\t1\n")


@pytest.mark.parametrize(
    "text, lineno",
    [
        ("b001\tA\tB\t0\nb002\tA\tB\n", 2),
        ("b001\tA\tB\t2\n", 1),
        ("# c\n\tA\tB\t0\n", 2),
        ("b001\tA\tB\t0\textra\n", 1),
    ],
)
def test_malformed_line_reports_line_number(text, lineno):
    with pytest.raises(FormatError) as info:
        parse_corpus(text, "c.tsv")
    assert info.value.line == lineno
    assert f"c.tsv:{lineno}" in str(info.value)


def test_empty_file_is_an_error(tmp_path):
    path = tmp_path / "empty.tsv"
    path.write_text("")
    with pytest.raises(FormatError):
        load_corpus(path)
    path.write_text("# only a comment\n")
    with pytest.raises(FormatError):
        load_corpus(path)


def test_distractor_counts_at_full_scale():
    lines = [f"b{i:03d}\tt\ta\t0" for i in range(101)]
    lines += [f"x{i:06d}\tt\ta\t1" for i in range(104_132)]
    corpus = parse_corpus("\n".join(lines) + "\n")
    assert corpus.counts() == (101, 104_132)


def test_non_indexable_records_are_kept():
    corpus = parse_corpus("a\t\t\t0\nb\tTitle\t\t0\nc\t\tAuthor\t1\n")
    assert len(corpus) == 3
    assert [r.doc_id for r in corpus.indexable()] == ["b", "c"]
    assert not corpus["a"].indexable
    assert corpus["c"].annotation == "Author"


def test_round_trip_is_byte_exact(tmp_path):
    text = (
        "# header comment\n"
        "b001\tAlgorithms Unlocked\tThomas Cormen\t0\n"
        "\n"
        "# interleaved\n"
        "b002\tÜber Café\t\t1\n"
        "b003\t\t\t0\n"
        "# trailing comment\n"
    )
    src = tmp_path / "in.tsv"
    src.write_text(text, encoding="utf-8")
    out = tmp_path / "out.tsv"
    write_corpus(load_corpus(src), out)
    assert out.read_bytes() == src.read_bytes()


def test_round_trip_without_trailing_newline(tmp_path):
    src = tmp_path / "in.tsv"
    src.write_text("a\tx\ty\t0\nb\tz\t\t1", encoding="utf-8")
    out = tmp_path / "out.tsv"
    write_corpus(load_corpus(src), out)
    assert out.read_text().rstrip("\n") == src.read_text().rstrip("\n")


def test_invalid_utf8_is_a_format_error(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_bytes(b"a\t\xff\t\t0\n")
    with pytest.raises(FormatError):
        load_corpus(path)


def test_synth_single_record_two_words():
    corpus = synth_corpus(1, (2, 2), ["alpha", "beta"], seed=7)
    assert len(corpus) == 1
    words = corpus.records[0].title.split()
    assert len(words) == 2
    assert set(words) <= {"alpha", "beta"}


def test_synth_is_deterministic():
    a = synth_corpus(50, (1, 5), seed=3, words_per_author=(1, 2))
    b = synth_corpus(50, (1, 5), seed=3, words_per_author=(1, 2))
    assert format_corpus(a).encode() == format_corpus(b).encode()


def test_synth_seed_changes_titles():
    a = synth_corpus(1000, seed=42)
    b = synth_corpus(1000, seed=43)
    assert Counter(r.title for r in a) != Counter(r.title for r in b)


def test_synth_ids_unique_and_sorted():
    corpus = synth_corpus(1234, seed=1)
    ids = corpus.doc_ids
    assert len(set(ids)) == len(ids)
    assert ids == sorted(ids)


def test_synth_rejects_empty_dictionary():
    with pytest.raises(ValueError):
        synth_corpus(3, dictionary=[])


def test_extend_rejects_colliding_ids():
    a = synth_corpus(3, seed=1)
    with pytest.raises(ValueError):
        a.extend(synth_corpus(3, seed=2))
    merged = a.extend(synth_corpus(3, seed=2, id_prefix="x", distractor=True))
    assert merged.counts() == (3, 3)


def test_queries_inline_and_file_payloads(tmp_path, toy_corpus):
    (tmp_path / "tok").mkdir()
    (tmp_path / "tok" / "q2.txt").write_text("algo\nrithms\nunlocked\n")
    path = tmp_path / "q.tsv"
    path.write_text("# queries\nq1\tb002\tart of computr\nq2\tb001\t@tok/q2.txt\n")
    qs = load_queries(path, toy_corpus)
    assert qs.query_ids == ["q1", "q2"]
    assert qs.text("q1") == "art of computr"
    assert qs.text("q2") == "algo\nrithms\nunlocked\n"
    assert qs.ground_truth() == {"q1": "b002", "q2": "b001"}


def test_queries_unknown_ground_truth(tmp_path, toy_corpus):
    path = tmp_path / "q.tsv"
    path.write_text("q1\tnope\ttext\n")
    with pytest.raises(FormatError, match="nope"):
        load_queries(path, toy_corpus)


def test_queries_duplicate_id(tmp_path):
    path = tmp_path / "q.tsv"
    path.write_text("q1\ta\tx\nq1\tb\ty\n")
    with pytest.raises(FormatError, match="duplicate"):
        load_queries(path)


def test_queries_round_trip(tmp_path):
    qs = QuerySet([QueryEntry("q1", "a", "some text"), QueryEntry("q2", "b", "f.txt", True)])
    path = tmp_path / "q.tsv"
    write_queries(qs, path)
    back = load_queries(path)
    assert back.entries == qs.entries


def test_corpus_constructor_validates_ids():
    with pytest.raises(ValueError):
        Corpus([CatalogueRecord("a b")])
