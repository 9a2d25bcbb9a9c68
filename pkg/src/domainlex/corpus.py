"""Word count corpora and the character-level Markov model derived from them.

Count files hold one ``token<TAB>count`` record per line (``w1 w2<TAB>count``
for bigrams), the layout of the public Google n-gram count lists.
"""

from __future__ import annotations

import math
import string
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

__all__ = [
    "CorpusParseError",
    "WordModel",
    "BigramModel",
    "CharMarkovModel",
    "ALPHABET",
    "DEFAULT_TOP_K",
    "load_unigrams",
    "load_bigrams",
    "build_char_markov",
    "unknown_word_logprob",
    "word_logprob",
]

ALPHABET = string.ascii_lowercase
DEFAULT_TOP_K = 333_333


class CorpusParseError(ValueError):
    def __init__(self, lineno: int, line: str, reason: str):
        super().__init__(f"line {lineno}: {reason}: {line!r}")
        self.lineno = lineno


@dataclass(frozen=True)
class WordModel:
    counts: Mapping[str, int]
    total: int

    @property
    def vocab_size(self) -> int:
        return len(self.counts)

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> "WordModel":
        counts = dict(counts)
        return cls(counts, sum(counts.values()))


@dataclass(frozen=True)
class BigramModel:
    counts: Mapping[tuple[str, str], int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class CharMarkovModel:
    """First-character and first-order transition log-probabilities over a-z."""

    first_char_logprob: Mapping[str, float]
    transition_logprob: Mapping[tuple[str, str], float]
    alphabet: str = ALPHABET


def _parse_count(lineno: int, raw: str, text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise CorpusParseError(lineno, raw, "count is not an integer") from None
    if value <= 0:
        raise CorpusParseError(lineno, raw, "count must be positive")
    return value


def _records(lines: Iterable[str], limit: int | None):
    kept = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if limit is not None and kept >= limit:
            break
        token, sep, count = line.rpartition("\t")
        if not sep:
            raise CorpusParseError(lineno, raw, "missing tab separator")
        kept += 1
        yield lineno, raw, token, _parse_count(lineno, raw, count)


def load_unigrams(lines: Iterable[str], top_k: int | None = None) -> WordModel:
    """Read ``word<TAB>count`` lines; duplicates are summed.

    ``top_k`` keeps only the first ``top_k`` records, which for the usual
    frequency-sorted files are the most frequent words.
    """
    counts: dict[str, int] = {}
    for lineno, raw, word, count in _records(lines, top_k):
        word = word.strip().lower()
        if not word:
            raise CorpusParseError(lineno, raw, "empty word")
        counts[word] = counts.get(word, 0) + count
    return WordModel.from_counts(counts)


def load_bigrams(lines: Iterable[str]) -> BigramModel:
    counts: dict[tuple[str, str], int] = {}
    for lineno, raw, pair, count in _records(lines, None):
        parts = pair.strip().lower().split(" ")
        if len(parts) != 2 or not all(parts):
            raise CorpusParseError(lineno, raw, "expected two space-separated tokens")
        key = (parts[0], parts[1])
        counts[key] = counts.get(key, 0) + count
    return BigramModel(counts)


def build_char_markov(model: WordModel, smoothing: float = 1.0, weighted: bool = True) -> CharMarkovModel:
    """Estimate a first-order Markov chain over a-z from corpus words.

    Each word contributes its first letter and its consecutive letter pairs,
    weighted by the word's count (or 1 when ``weighted`` is False). Characters
    outside a-z are dropped before pairing. Add-``smoothing`` pseudo-counts
    keep every log-probability finite.
    """
    if not model.counts:
        raise ValueError("cannot build a character model from an empty corpus")
    if smoothing <= 0:
        raise ValueError("smoothing must be positive")
    letters = set(ALPHABET)
    first = dict.fromkeys(ALPHABET, 0.0)
    trans = {a: dict.fromkeys(ALPHABET, 0.0) for a in ALPHABET}
    for word, count in model.counts.items():
        w = float(count) if weighted else 1.0
        chars = [c for c in word if c in letters]
        if not chars:
            continue
        first[chars[0]] += w
        for a, b in zip(chars, chars[1:]):
            trans[a][b] += w

    def _normalize(row: dict[str, float]) -> dict[str, float]:
        denom = math.log(sum(row.values()) + smoothing * len(ALPHABET))
        return {c: math.log(v + smoothing) - denom for c, v in row.items()}

    first_lp = _normalize(first)
    trans_lp = {}
    for a, row in trans.items():
        for b, lp in _normalize(row).items():
            trans_lp[(a, b)] = lp
    return CharMarkovModel(first_lp, trans_lp)


def unknown_word_logprob(length: int, total: int) -> float:
    """log(10 / (total * 10**length)), the penalty for out-of-vocabulary words."""
    return math.log(10.0) - math.log(total) - length * math.log(10.0)


def word_logprob(word: str, prev: str | None, wm: WordModel, bm: BigramModel) -> float:
    """Log-probability of ``word`` following ``prev`` (``None`` at sentence start).

    Uses the bigram ratio count(prev, word) / count(prev) when the pair is
    listed and ``prev`` is a known word, else the unigram estimate.
    """
    if not word:
        raise ValueError("empty word")
    if prev is not None:
        pair = bm.counts.get((prev, word))
        if pair is not None and prev in wm.counts:
            return math.log(pair) - math.log(wm.counts[prev])
    count = wm.counts.get(word)
    if count is not None:
        return math.log(count) - math.log(wm.total)
    return unknown_word_logprob(len(word), wm.total)
