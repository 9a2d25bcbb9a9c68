"""Lexical feature families and the sparse binary feature space.

Five families are supported, laid out in this fixed column order:

``basic``
    Length deciles plus {0, 1, 2, >=3} bins for hyphens, digits and numbers.
``chars``
    Presence of each of a-z and 0-9.
``loglik``
    Deciles of the character Markov log-likelihood and of its per-letter
    version, each with an extra bin for cores that contain no letters.
``tld``
    One indicator per public suffix seen in training.
``words``
    One indicator per segmented word seen in training.
"""

from __future__ import annotations

import bisect
import hashlib
import json
import math
import re
import string
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import sparse

from .corpus import CharMarkovModel

__all__ = [
    "FAMILIES",
    "BINNED_FAMILIES",
    "BasicCounts",
    "LogLikFeatures",
    "FeatureInput",
    "FeatureSpace",
    "FeatureSpaceError",
    "SparseVector",
    "basic_counts",
    "char_indicators",
    "char_loglik",
    "decile_edges",
    "fit_feature_space",
    "vectorize",
    "design_matrix",
]

FAMILIES = ("basic", "chars", "loglik", "tld", "words")
BINNED_FAMILIES = ("basic", "loglik")
CHARS = string.ascii_lowercase + string.digits
COUNT_BINS = ("0", "1", "2", ">=3")
SPACE_VERSION = 1
_CHAR_SET = frozenset(CHARS)
_CHAR_POS = {c: k for k, c in enumerate(CHARS)}
_DIGIT_RUN = re.compile(r"[0-9]+")
_NON_LETTER = re.compile(r"[^a-z]+")


class FeatureSpaceError(ValueError):
    pass


class BasicCounts(NamedTuple):
    n_chars: int
    n_hyphens: int
    n_digits: int
    n_numbers: int


class LogLikFeatures(NamedTuple):
    raw: float | None
    normalized: float | None


class SparseVector(NamedTuple):
    """Set column indices (strictly increasing) of a binary feature vector."""

    indices: tuple[int, ...]
    fingerprint: str


class FeatureInput(NamedTuple):
    """The parts of a domain record that features depend on."""

    core: str
    tld: str
    tokens: Sequence[str]


def basic_counts(core: str) -> BasicCounts:
    """Count characters (periods excluded), hyphens, digits and digit runs."""
    runs = _DIGIT_RUN.findall(core)
    return BasicCounts(len(core) - core.count("."), core.count("-"), sum(map(len, runs)), len(runs))


def char_indicators(core: str) -> set[str]:
    return set(core.lower()) & _CHAR_SET


def char_loglik(core: str, model: CharMarkovModel) -> LogLikFeatures:
    """Markov log-likelihood of the letters of ``core`` (digits and hyphens removed)."""
    letters = _NON_LETTER.sub("", core.lower())
    if not letters:
        return LogLikFeatures(None, None)
    trans = model.transition_logprob
    raw = model.first_char_logprob[letters[0]]
    for lp in map(trans.__getitem__, zip(letters, letters[1:])):
        raw += lp
    return LogLikFeatures(raw, raw / len(letters))


def decile_edges(values: Iterable[float]) -> list[float]:
    """Interior decile cut points with ties merged.

    Cut ``k`` is the smallest observed value ``v`` with at least ``k/10`` of
    the sample ``<= v``. Duplicate cuts are merged and a cut equal to the
    maximum is dropped, so every bin ``(e[k-1], e[k]]`` holds training data.
    """
    xs = sorted(values)
    if not xs:
        return []
    n = len(xs)
    edges: list[float] = []
    for k in range(1, 10):
        v = xs[max(math.ceil(k * n / 10) - 1, 0)]
        if v < xs[-1] and (not edges or v > edges[-1]):
            edges.append(v)
    return edges


def _bin(edges: Sequence[float], x: float) -> int:
    # right-closed bins; values beyond the training range land in the end bins
    return bisect.bisect_left(edges, x)


def _count_bin(c: int) -> int:
    return c if c < 3 else 3


@dataclass(frozen=True)
class FeatureSpace:
    """Fitted mapping from feature descriptors to design-matrix columns."""

    enabled_sets: tuple[str, ...]
    char_bin_edges: tuple[float, ...] = ()
    ll_bin_edges: tuple[float, ...] = ()
    ll_norm_bin_edges: tuple[float, ...] = ()
    tld_vocab: dict[str, int] = field(default_factory=dict)
    word_vocab: dict[str, int] = field(default_factory=dict)
    offsets: dict[str, int] = field(default_factory=dict)
    column_count: int = 0
    fingerprint: str = ""

    @property
    def char_columns(self) -> dict[str, int]:
        if "chars" not in self.enabled_sets:
            return {}
        base = self.offsets["chars"]
        return {c: base + k for k, c in enumerate(CHARS)}

    def to_dict(self) -> dict:
        return {
            "version": SPACE_VERSION,
            "enabled_sets": list(self.enabled_sets),
            "char_bin_edges": list(self.char_bin_edges),
            "ll_bin_edges": list(self.ll_bin_edges),
            "ll_norm_bin_edges": list(self.ll_norm_bin_edges),
            "tld_vocab": sorted(self.tld_vocab, key=self.tld_vocab.__getitem__),
            "word_vocab": sorted(self.word_vocab, key=self.word_vocab.__getitem__),
            "column_count": self.column_count,
            "fingerprint": self.fingerprint,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSpace":
        if d.get("version") != SPACE_VERSION:
            raise FeatureSpaceError(f"unsupported feature-space version {d.get('version')!r}")
        fs = _assemble(
            tuple(d["enabled_sets"]),
            d["char_bin_edges"],
            d["ll_bin_edges"],
            d["ll_norm_bin_edges"],
            d["tld_vocab"],
            d["word_vocab"],
        )
        if fs.fingerprint != d["fingerprint"] or fs.column_count != d["column_count"]:
            raise FeatureSpaceError("feature-space content does not match its fingerprint")
        return fs

    def feature_names(self) -> list[str]:
        """Human-readable, family-qualified name for every column."""
        names = [""] * self.column_count
        if "basic" in self.enabled_sets:
            base = self.offsets["basic"]
            for k, label in enumerate(_interval_labels(self.char_bin_edges)):
                names[base + k] = f"basic:n_chars{label}"
            base += len(self.char_bin_edges) + 1
            for feat in ("n_hyphens", "n_digits", "n_numbers"):
                for k, label in enumerate(COUNT_BINS):
                    names[base + k] = f"basic:{feat}={label}"
                base += len(COUNT_BINS)
        for c, col in self.char_columns.items():
            names[col] = f"char:{c}"
        if "loglik" in self.enabled_sets:
            base = self.offsets["loglik"]
            for feat, edges in (("loglik", self.ll_bin_edges), ("loglik_norm", self.ll_norm_bin_edges)):
                labels = _interval_labels(edges)
                for k, label in enumerate(labels):
                    names[base + k] = f"loglik:{feat}{label}"
                names[base + len(labels)] = f"loglik:{feat}=missing"
                base += len(labels) + 1
        for t, col in self.tld_vocab.items():
            names[col] = f"tld:.{t}"
        for w, col in self.word_vocab.items():
            names[col] = f"word:{w}"
        return names


def _interval_labels(edges: Sequence[float]) -> list[str]:
    bounds = [-math.inf, *edges, math.inf]
    return [f" in ({_fmt(lo)}, {_fmt(hi)}]" if hi != math.inf else f" in ({_fmt(lo)}, inf)" for lo, hi in zip(bounds, bounds[1:])]


def _fmt(x: float) -> str:
    if x in (math.inf, -math.inf):
        return "-inf" if x < 0 else "inf"
    return f"{x:.4g}"


def _assemble(enabled, char_edges, ll_edges, lln_edges, tlds, words) -> FeatureSpace:
    unknown = set(enabled) - set(FAMILIES)
    enabled = tuple(f for f in FAMILIES if f in set(enabled))
    if unknown:
        raise FeatureSpaceError(f"unknown feature sets {sorted(unknown)}")
    if not enabled:
        raise FeatureSpaceError("no feature sets enabled")
    for edges in (char_edges, ll_edges, lln_edges):
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise FeatureSpaceError("bin edges must be strictly increasing")
    offsets: dict[str, int] = {}
    col = 0
    tld_vocab: dict[str, int] = {}
    word_vocab: dict[str, int] = {}
    for fam in enabled:
        offsets[fam] = col
        if fam == "basic":
            col += len(char_edges) + 1 + 3 * len(COUNT_BINS)
        elif fam == "chars":
            col += len(CHARS)
        elif fam == "loglik":
            col += len(ll_edges) + len(lln_edges) + 4
        elif fam == "tld":
            for t in tlds:
                tld_vocab[t] = col
                col += 1
        elif fam == "words":
            for w in words:
                word_vocab[w] = col
                col += 1
    content = json.dumps(
        [list(enabled), list(char_edges), list(ll_edges), list(lln_edges), list(tlds), list(words)],
        separators=(",", ":"),
    )
    fingerprint = hashlib.sha256(content.encode("utf-8")).hexdigest()[:16]
    return FeatureSpace(
        enabled_sets=enabled,
        char_bin_edges=tuple(char_edges) if "basic" in enabled else (),
        ll_bin_edges=tuple(ll_edges) if "loglik" in enabled else (),
        ll_norm_bin_edges=tuple(lln_edges) if "loglik" in enabled else (),
        tld_vocab=tld_vocab,
        word_vocab=word_vocab,
        offsets=offsets,
        column_count=col,
        fingerprint=fingerprint,
    )


def fit_feature_space(
    training: Sequence[FeatureInput],
    enabled_sets: Iterable[str],
    char_model: CharMarkovModel | None = None,
    min_word_count: int = 1,
) -> FeatureSpace:
    """Fit bin edges and vocabularies on training records.

    ``char_model`` is required when ``loglik`` is enabled. Words (and TLDs)
    are kept when they occur in at least ``min_word_count`` training records.
    """
    if not training:
        raise FeatureSpaceError("empty training set")
    enabled = set(enabled_sets)
    if enabled - set(FAMILIES):
        raise FeatureSpaceError(f"unknown feature sets {sorted(enabled - set(FAMILIES))}")
    char_edges: list[float] = []
    ll_edges: list[float] = []
    lln_edges: list[float] = []
    tlds: list[str] = []
    words: list[str] = []
    if "basic" in enabled:
        char_edges = decile_edges(basic_counts(r.core).n_chars for r in training)
    if "loglik" in enabled:
        if char_model is None:
            raise FeatureSpaceError("loglik features need a character model")
        lls = [char_loglik(r.core, char_model) for r in training]
        ll_edges = decile_edges(x.raw for x in lls if x.raw is not None)
        lln_edges = decile_edges(x.normalized for x in lls if x.normalized is not None)
    if "tld" in enabled:
        tld_counts = Counter(r.tld for r in training)
        tlds = sorted(t for t, c in tld_counts.items() if c >= min_word_count)
    if "words" in enabled:
        word_counts = Counter(w for r in training for w in set(r.tokens))
        words = sorted(w for w, c in word_counts.items() if c >= min_word_count)
    return _assemble(enabled, char_edges, ll_edges, lln_edges, tlds, words)


def vectorize(record: FeatureInput, fs: FeatureSpace, char_model: CharMarkovModel | None = None) -> SparseVector:
    """Binary feature vector of ``record`` in the fitted space ``fs``."""
    return SparseVector(tuple(_indices(record, fs, char_model)), fs.fingerprint)


def _indices(record: FeatureInput, fs: FeatureSpace, char_model: CharMarkovModel | None) -> list[int]:
    enabled = fs.enabled_sets
    offsets = fs.offsets
    core = record.core
    idx: list[int] = []
    if "basic" in enabled:
        bc = basic_counts(core)
        base = offsets["basic"]
        idx.append(base + _bin(fs.char_bin_edges, bc.n_chars))
        base += len(fs.char_bin_edges) + 1
        idx.append(base + _count_bin(bc.n_hyphens))
        idx.append(base + 4 + _count_bin(bc.n_digits))
        idx.append(base + 8 + _count_bin(bc.n_numbers))
    if "chars" in enabled:
        base = offsets["chars"]
        idx.extend(base + _CHAR_POS[c] for c in char_indicators(core))
    if "loglik" in enabled:
        if char_model is None:
            raise FeatureSpaceError("loglik features need a character model")
        ll = char_loglik(core, char_model)
        base = offsets["loglik"]
        n_raw = len(fs.ll_bin_edges) + 1
        idx.append(base + (n_raw if ll.raw is None else _bin(fs.ll_bin_edges, ll.raw)))
        base += n_raw + 1
        n_norm = len(fs.ll_norm_bin_edges) + 1
        idx.append(base + (n_norm if ll.normalized is None else _bin(fs.ll_norm_bin_edges, ll.normalized)))
    if "tld" in enabled:
        col = fs.tld_vocab.get(record.tld)
        if col is not None:
            idx.append(col)
    if "words" in enabled:
        vocab = fs.word_vocab
        idx.extend({vocab[w] for w in record.tokens if w in vocab})
    idx.sort()
    return idx


def design_matrix(records: Sequence[FeatureInput], fs: FeatureSpace, char_model: CharMarkovModel | None = None) -> sparse.csr_matrix:
    """Stack vectorized records into a binary CSR matrix."""
    indptr = [0]
    indices: list[int] = []
    for r in records:
        indices.extend(_indices(r, fs, char_model))
        indptr.append(len(indices))
    data = np.ones(len(indices), dtype=np.float64)
    return sparse.csr_matrix(
        (data, np.asarray(indices, dtype=np.int32), np.asarray(indptr, dtype=np.int64)),
        shape=(len(records), fs.column_count),
    )
