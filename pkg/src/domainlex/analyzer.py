"""Hostname to (core, suffix, tokens) in one step."""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import resources
from .corpus import BigramModel, CharMarkovModel, WordModel, build_char_markov
from .features import FeatureInput
from .psl import DomainName, SuffixRuleSet, effective_2ld, extract_hostname
from .segmenter import DEFAULT_MAX_TOKEN_LEN, Segmenter

__all__ = ["DomainAnalyzer", "InvalidDomain"]

_CORE = re.compile(r"^[a-z0-9-]+$")


class InvalidDomain(ValueError):
    pass


@dataclass
class DomainAnalyzer:
    """Suffix rules, segmentation model and character model used together.

    >>> an = DomainAnalyzer.default()                      # doctest: +SKIP
    >>> an.analyze("http://www.more.example.com/x").core   # doctest: +SKIP
    'example'
    """

    rules: SuffixRuleSet
    segmenter: Segmenter
    char_model: CharMarkovModel

    @classmethod
    def build(
        cls,
        rules: SuffixRuleSet,
        wm: WordModel,
        bm: BigramModel,
        max_token_len: int = DEFAULT_MAX_TOKEN_LEN,
        smoothing: float = 1.0,
        weighted: bool = True,
    ) -> "DomainAnalyzer":
        return cls(rules, Segmenter(wm, bm, max_token_len), build_char_markov(wm, smoothing, weighted))

    @classmethod
    def default(cls, **kwargs) -> "DomainAnalyzer":
        return cls.from_files(**kwargs)

    @classmethod
    def from_files(
        cls,
        psl=None,
        unigrams=None,
        bigrams=None,
        include_private: bool = True,
        top_k: int | None = resources.DEFAULT_TOP_K,
        max_token_len: int = DEFAULT_MAX_TOKEN_LEN,
        smoothing: float = 1.0,
        weighted: bool = True,
    ) -> "DomainAnalyzer":
        """Load resources from paths, using the bundled file for any that is ``None``."""
        return cls.build(
            resources.load_psl(psl, include_private),
            resources.load_word_model(unigrams, top_k),
            resources.load_bigram_model(bigrams),
            max_token_len,
            smoothing,
            weighted,
        )

    def parse(self, url_or_host: str) -> DomainName:
        host = extract_hostname(url_or_host)
        dn = effective_2ld(host, self.rules)
        if not _CORE.match(dn.core):
            raise InvalidDomain(f"core {dn.core!r} is not a valid domain label")
        return dn

    def analyze(self, url_or_host: str) -> FeatureInput:
        dn = self.parse(url_or_host)
        return FeatureInput(dn.core, dn.tld, tuple(self.segmenter.segment_core(dn.core)))

    def resource_info(self) -> dict:
        """Identity of the loaded corpora, stored alongside trained models."""
        wm, bm = self.segmenter.wm, self.segmenter.bm
        return {
            "unigram_total": wm.total,
            "unigram_vocab": wm.vocab_size,
            "bigram_pairs": len(bm),
            "max_token_len": self.segmenter.max_token_len,
            "psl": self.rules.source_version,
        }
