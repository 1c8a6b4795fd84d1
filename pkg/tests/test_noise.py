import pytest
from hypothesis import given, strategies as st

from ngramatch.corpus import default_dictionary, synth_corpus
from ngramatch.errors import FormatError
from ngramatch.eval import retrieval_curve
from ngramatch.fusion import rank_all
from ngramatch.noise import (
    NoiseConfig,
    corrupt,
    corrupt_many,
    expensive_oracle,
    load_noise_config,
    parse_noise_config,
    synth_queries,
    visual_channel,
)
from ngramatch.textindex import build_index, text_channel
from ngramatch.tokenizer import tokenize

NOISY = NoiseConfig(sub_rate=0.2, del_rate=0.05, ins_rate=0.05, word_drop_rate=0.1, spurious_singles=2, spurious_words=1)


@given(st.text(max_size=80))
def test_identity_at_zero_noise(text):
    assert corrupt(text, NoiseConfig(seed=5)) == text


def test_total_deletion():
    assert corrupt("The Art of Computer Programming", NoiseConfig(del_rate=1.0, seed=1)) == ""


def test_deterministic():
    text = "Structure and Interpretation of Computer Programs"
    assert corrupt(text, NOISY) == corrupt(text, NOISY)


def test_seed_changes_output():
    text = "Structure and Interpretation of Computer Programs"
    outputs = [corrupt(text, NOISY.with_seed(s)) for s in range(100)]
    collisions = len(outputs) - len(set(outputs))
    assert collisions <= 2


def test_substitutions_are_lowercase_letters():
    out = corrupt("....................", NoiseConfig(sub_rate=1.0, seed=3))
    assert len(out) == 20 and out.isalpha() and out.islower()


def test_word_drop_all():
    assert corrupt("alpha beta gamma", NoiseConfig(word_drop_rate=1.0)).strip() == ""


def test_reversal():
    assert corrupt("turtles", NoiseConfig(reversed_line_rate=1.0)) == "seltrut"


def test_spurious_tokens_appended():
    out = corrupt("turtles", NoiseConfig(spurious_singles=3, spurious_words=2, seed=9))
    parts = out.split(" ")
    assert parts[0] == "turtles"
    assert [len(p) for p in parts[1:4]] == [1, 1, 1]
    assert all(3 <= len(p) <= 8 for p in parts[4:])
    # single characters vanish under n >= 2
    assert set(tokenize(" ".join(parts[1:4]), 2).grams) == set()


def test_config_validation():
    with pytest.raises(ValueError):
        NoiseConfig(sub_rate=1.5)
    with pytest.raises(ValueError):
        NoiseConfig(spurious_words=-1)


def test_config_file_round_trip(tmp_path):
    cfg = NoiseConfig(sub_rate=0.15, word_drop_rate=0.1, spurious_singles=3, spurious_words=2, seed=42)
    path = tmp_path / "noise.cfg"
    path.write_text("# noise settings\n" + cfg.to_text())
    assert load_noise_config(path) == cfg
    assert load_noise_config(path, sub_rate=0.3).sub_rate == 0.3


@pytest.mark.parametrize("text", ["sub_rate 0.1", "bogus = 1", "sub_rate = x", "sub_rate = 2"])
def test_config_file_errors(text):
    with pytest.raises(FormatError):
        parse_noise_config(text)


def test_corrupt_many_uses_distinct_seeds():
    out = corrupt_many(["same text here for all"] * 20, NOISY)
    assert len(set(out)) > 15
    assert out == corrupt_many(["same text here for all"] * 20, NOISY)


def test_synth_queries_ground_truth():
    corpus = synth_corpus(50, seed=1)
    qs = synth_queries(corpus, 20, NoiseConfig(), seed=2)
    assert len(qs) == 20
    assert len(set(qs.ground_truth().values())) == 20
    for e in qs:
        assert e.payload == corpus[e.ground_truth].annotation


def test_visual_channel_shape():
    corpus = synth_corpus(300, seed=1)
    qs = synth_queries(corpus, 50, NoiseConfig(), seed=2)
    vis = visual_channel(qs, corpus.doc_ids, candidates=40, seed=3)
    for e in qs:
        row = vis.row(e.query_id)
        assert len(row) == 40 and e.ground_truth in row
        assert all(0.0 <= v < 1.0 for v in row.values())
    clean = visual_channel(qs, corpus.doc_ids, corrupt_fraction=0.0, clean_scale=0.01, seed=3)
    curve = retrieval_curve(rank_all([1.0], [clean], qs.query_ids), qs, 1)
    assert curve.rate(1) == 1.0


def test_expensive_oracle_failures_leave_ground_truth_unscored():
    corpus = synth_corpus(30, seed=1)
    qs = synth_queries(corpus, 30, NoiseConfig(), seed=2)
    cands = {e.query_id: [e.ground_truth, *corpus.doc_ids[:3]] for e in qs}
    always = expensive_oracle(qs, cands, success_rate=1.0, seed=1)
    never = expensive_oracle(qs, cands, success_rate=0.0, seed=1)
    for e in qs:
        assert always.get(e.query_id, e.ground_truth) >= 1.0
        assert e.ground_truth not in never.row(e.query_id)


def test_degradation_is_monotone_in_substitution_rate():
    words = default_dictionary()[:200]
    corpus = synth_corpus(1000, (2, 4), words, seed=42)
    idx = build_index(corpus, 3)
    rates = {}
    for sub in (0.1, 0.3):
        cfg = NoiseConfig(sub_rate=sub, word_drop_rate=0.1, spurious_singles=3, spurious_words=2, seed=7)
        qs = synth_queries(corpus, 500, cfg, seed=11)
        ranks = rank_all([1.0], [text_channel(idx, qs)], qs.query_ids)
        rates[sub] = retrieval_curve(ranks, qs, 1).rate(1)
    assert rates[0.3] <= rates[0.1]
