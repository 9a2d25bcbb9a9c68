import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from domainlex.corpus import (
    ALPHABET,
    BigramModel,
    CorpusParseError,
    WordModel,
    build_char_markov,
    load_bigrams,
    load_unigrams,
    unknown_word_logprob,
    word_logprob,
)

TINY = 1e-12  # stands in for the alpha -> 0+ limit


def test_bundled_count_of_the(wm):
    assert wm.counts["the"] == 23135851162


def test_bundled_totals(wm, bm):
    assert wm.total == sum(wm.counts.values())
    assert wm.total > 0
    assert all(c > 0 for c in bm.counts.values())


def test_load_single_line():
    m = load_unigrams(["the\t23135851162"])
    assert m.counts == {"the": 23135851162}
    assert m.total == 23135851162


def test_duplicates_merge():
    m = load_unigrams("a\t2\na\t3".splitlines())
    assert m.counts == {"a": 5}
    assert m.total == 5
    assert m.vocab_size == 1


def test_top_k_keeps_leading_records():
    m = load_unigrams(["a\t9", "b\t5", "", "c\t1"], top_k=2)
    assert m.counts == {"a": 9, "b": 5}


@pytest.mark.parametrize(
    "lines, lineno",
    [
        (["x\t-1"], 1),
        (["a\t1", "b\t0"], 2),
        (["a\t1", "b\tmany"], 2),
        (["a\t1", "", "b 7"], 3),
        (["\t4"], 1),
    ],
)
def test_unigram_parse_errors(lines, lineno):
    with pytest.raises(CorpusParseError) as err:
        load_unigrams(lines)
    assert err.value.lineno == lineno


def test_bigram_loading():
    bm = load_bigrams(["of the\t10", "Of The\t5", "in a\t3"])
    assert bm.counts == {("of", "the"): 15, ("in", "a"): 3}
    with pytest.raises(CorpusParseError):
        load_bigrams(["ofthe\t10"])


def test_char_markov_single_word():
    cm = build_char_markov(WordModel.from_counts({"ab": 1}), smoothing=TINY)
    assert cm.first_char_logprob["a"] == pytest.approx(0.0, abs=1e-9)
    assert cm.transition_logprob[("a", "b")] == pytest.approx(0.0, abs=1e-9)


def test_char_markov_symmetry():
    cm = build_char_markov(WordModel.from_counts({"ab": 1, "ba": 1}), smoothing=TINY)
    assert cm.first_char_logprob["a"] == pytest.approx(math.log(0.5), abs=1e-9)
    assert cm.first_char_logprob["b"] == pytest.approx(math.log(0.5), abs=1e-9)


def test_char_markov_weighted_hand_count():
    cm = build_char_markov(WordModel.from_counts({"aa": 3, "ab": 1}), smoothing=TINY)
    assert cm.transition_logprob[("a", "a")] == pytest.approx(math.log(3 / 4), abs=1e-9)
    assert cm.transition_logprob[("a", "b")] == pytest.approx(math.log(1 / 4), abs=1e-9)


def test_char_markov_unweighted_flag():
    cm = build_char_markov(WordModel.from_counts({"aa": 3, "ab": 1}), smoothing=TINY, weighted=False)
    assert cm.transition_logprob[("a", "a")] == pytest.approx(math.log(1 / 2), abs=1e-9)


def test_char_markov_skips_non_letters():
    cm = build_char_markov(WordModel.from_counts({"a1b": 2, "9": 5}), smoothing=TINY)
    assert cm.first_char_logprob["a"] == pytest.approx(0.0, abs=1e-9)
    assert cm.transition_logprob[("a", "b")] == pytest.approx(0.0, abs=1e-9)


def test_char_markov_add_one_by_hand():
    cm = build_char_markov(WordModel.from_counts({"ab": 1}), smoothing=1.0)
    assert cm.first_char_logprob["a"] == pytest.approx(math.log(2 / 27))
    assert cm.first_char_logprob["z"] == pytest.approx(math.log(1 / 27))
    assert cm.transition_logprob[("b", "q")] == pytest.approx(math.log(1 / 26))


def _assert_valid_distributions(cm):
    assert set(cm.first_char_logprob) == set(ALPHABET)
    assert math.fsum(math.exp(v) for v in cm.first_char_logprob.values()) == pytest.approx(1.0, abs=1e-9)
    for a in ALPHABET:
        row = [cm.transition_logprob[(a, b)] for b in ALPHABET]
        assert math.fsum(map(math.exp, row)) == pytest.approx(1.0, abs=1e-9)
    every = list(cm.first_char_logprob.values()) + list(cm.transition_logprob.values())
    assert all(math.isfinite(v) and v <= 0 for v in every)


def test_bundled_char_model_is_valid(char_model):
    _assert_valid_distributions(char_model)


@given(st.dictionaries(st.from_regex(r"[a-z0-9]{1,6}", fullmatch=True), st.integers(1, 10**6), min_size=1, max_size=20),
       st.floats(1e-6, 10.0))
def test_char_model_rows_are_distributions(counts, alpha):
    _assert_valid_distributions(build_char_markov(WordModel.from_counts(counts), smoothing=alpha))


def test_char_markov_errors():
    with pytest.raises(ValueError):
        build_char_markov(WordModel.from_counts({}))
    with pytest.raises(ValueError):
        build_char_markov(WordModel.from_counts({"a": 1}), smoothing=0)


def test_word_logprob_cases():
    wm = WordModel.from_counts({"of": 40, "the": 50, "cat": 10})
    bm = BigramModel({("of", "the"): 8, ("zzz", "cat"): 3})
    n = 100
    assert word_logprob("cat", None, wm, bm) == pytest.approx(math.log(10 / n), abs=1e-12)
    assert word_logprob("cat", "dog", wm, bm) == pytest.approx(math.log(10 / n), abs=1e-12)
    assert word_logprob("the", "of", wm, bm) == pytest.approx(math.log(8 / 40), abs=1e-12)
    # the pair is listed but its first word is unknown: unigram fallback
    assert word_logprob("cat", "zzz", wm, bm) == pytest.approx(math.log(10 / n), abs=1e-12)
    assert word_logprob("abcd", None, wm, bm) == pytest.approx(math.log(10 / (n * 10**4)), abs=1e-12)
    with pytest.raises(ValueError):
        word_logprob("", None, wm, bm)


def test_unknown_penalty_formula():
    for n in (1, 10, 12345, 10**12):
        for length in (1, 4, 20):
            assert unknown_word_logprob(length, n) == pytest.approx(math.log(10 / (n * 10.0**length)), rel=1e-13)


def test_unknown_penalty_strictly_decreasing(wm, bm):
    values = [word_logprob("q" * k + "xj", None, wm, bm) for k in range(1, 25)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_known_words_beat_unknown_penalty(wm, bm):
    total = wm.total
    worse = [w for w in wm.counts if word_logprob(w, None, wm, bm) < unknown_word_logprob(len(w), total)]
    assert worse == []
