"""Loaders for the bundled suffix list and n-gram count files."""

from __future__ import annotations

import gzip
import io
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .corpus import DEFAULT_TOP_K, BigramModel, WordModel, load_bigrams, load_unigrams
from .psl import SuffixRuleSet, parse_psl

_DATA = resources.files("domainlex") / "data"
PSL_FILE = "public_suffix_list.dat"
UNIGRAM_FILE = "unigrams.txt.gz"
BIGRAM_FILE = "bigrams.txt.gz"


def open_text(path: str | Path) -> io.TextIOBase:
    """Open a UTF-8 text file, transparently decompressing ``.gz``."""
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def _bundled(name: str) -> io.TextIOBase:
    raw = (_DATA / name).open("rb")
    if name.endswith(".gz"):
        return io.TextIOWrapper(gzip.GzipFile(fileobj=raw), encoding="utf-8")
    return io.TextIOWrapper(raw, encoding="utf-8")


def load_psl(path: str | Path | None = None, include_private: bool = True) -> SuffixRuleSet:
    if path is None:
        return default_psl(include_private)
    with open_text(path) as fh:
        return parse_psl(fh.read(), include_private=include_private, source_version=str(path))


def load_word_model(path: str | Path | None = None, top_k: int | None = DEFAULT_TOP_K) -> WordModel:
    if path is None:
        return default_word_model(top_k)
    with open_text(path) as fh:
        return load_unigrams(fh, top_k=top_k)


def load_bigram_model(path: str | Path | None = None) -> BigramModel:
    if path is None:
        return default_bigram_model()
    with open_text(path) as fh:
        return load_bigrams(fh)


@lru_cache(maxsize=2)
def default_psl(include_private: bool = True) -> SuffixRuleSet:
    with _bundled(PSL_FILE) as fh:
        return parse_psl(fh.read(), include_private=include_private, source_version=f"bundled:{PSL_FILE}")


@lru_cache(maxsize=2)
def default_word_model(top_k: int | None = DEFAULT_TOP_K) -> WordModel:
    with _bundled(UNIGRAM_FILE) as fh:
        return load_unigrams(fh, top_k=top_k)


@lru_cache(maxsize=1)
def default_bigram_model() -> BigramModel:
    with _bundled(BIGRAM_FILE) as fh:
        return load_bigrams(fh)
