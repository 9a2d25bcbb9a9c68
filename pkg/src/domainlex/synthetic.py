"""Synthetic rated-domain generator with a known word signal.

Domains are concatenations of one to three English words drawn from the
unigram corpus. A fixed list of "malicious" words is planted in most
positive-class cores and rarely in negative ones, so a model that sees the
segmented words should beat one that only sees surface statistics. Surface
statistics carry a weaker signal of their own: malicious cores get digits and
hyphens somewhat more often, and the suffix mix differs slightly.

Labels are expressed as reputation ratings (below 60 for malicious) with
random confidence scores, in the ratings-CSV layout read by
:func:`domainlex.harness.ingest`.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .corpus import WordModel

__all__ = ["PLANTED_WORDS", "SyntheticConfig", "SyntheticRow", "generate", "to_csv", "filler_vocabulary"]

PLANTED_WORDS = (
    "payday", "loans", "cheap", "pills", "pharmacy", "jerseys", "outlet", "replica",
    "casino", "discount", "sneakers", "jordans", "oakley", "webcams", "meds", "cash",
    "watches", "deals", "dresses", "lebron",
)

TLDS = ("com", "net", "org", "info", "de", "co.uk", "us", "co", "eu", "biz")
# suffix weights for (benign, malicious)
_TLD_WEIGHTS = (
    np.array([58, 6, 11, 2, 6, 6, 3, 2, 2, 1], dtype=float),
    np.array([52, 8, 7, 5, 3, 4, 6, 6, 5, 4], dtype=float),
)


@dataclass(frozen=True)
class SyntheticConfig:
    n: int = 10_000
    positive_rate: float = 0.3
    plant_rate_malicious: float = 0.55
    plant_rate_benign: float = 0.02
    digit_rate: tuple[float, float] = (0.08, 0.18)  # (benign, malicious)
    hyphen_rate: tuple[float, float] = (0.06, 0.12)
    filler_size: int = 4000


@dataclass(frozen=True)
class SyntheticRow:
    domain: str
    source: str
    rating: int
    confidence: int
    label: int
    planted: str | None


def filler_vocabulary(wm: WordModel, size: int, exclude: set[str]) -> list[str]:
    """Frequent alphabetic corpus words of length 3-9, skipping ``exclude``."""
    out = []
    for w in wm.counts:  # insertion order follows the frequency-sorted file
        if 3 <= len(w) <= 9 and w.isalpha() and w not in exclude:
            out.append(w)
            if len(out) == size:
                break
    return out


def generate(wm: WordModel, seed: int, config: SyntheticConfig = SyntheticConfig()) -> list[SyntheticRow]:
    rng = np.random.default_rng(seed)
    filler = filler_vocabulary(wm, config.filler_size, set(PLANTED_WORDS))
    rows: list[SyntheticRow] = []
    seen: set[str] = set()
    while len(rows) < config.n:
        label = int(rng.random() < config.positive_rate)
        k = int(rng.choice([1, 2, 3], p=[0.2, 0.55, 0.25]))
        words = [filler[int(i)] for i in rng.integers(0, len(filler), size=k)]
        planted = None
        plant_rate = config.plant_rate_malicious if label else config.plant_rate_benign
        if rng.random() < plant_rate:
            planted = PLANTED_WORDS[int(rng.integers(len(PLANTED_WORDS)))]
            words.insert(int(rng.integers(0, len(words) + 1)), planted)
        sep = "-" if rng.random() < config.hyphen_rate[label] else ""
        core = sep.join(words)
        if rng.random() < config.digit_rate[label]:
            core += str(int(rng.integers(1, 1000)))
        w = _TLD_WEIGHTS[label]
        tld = TLDS[int(rng.choice(len(TLDS), p=w / w.sum()))]
        domain = f"{core}.{tld}"
        if domain in seen:
            continue
        seen.add(domain)
        rating = int(rng.integers(0, 60)) if label else int(rng.integers(60, 101))
        confidence = int(rng.integers(0, 101))
        rows.append(SyntheticRow(domain, "cellular", rating, confidence, label, planted))
    return rows


def to_csv(rows: list[SyntheticRow]) -> str:
    buf = io.StringIO()
    buf.write("domain,source,rating,confidence\n")
    for r in rows:
        buf.write(f"{r.domain},{r.source},{r.rating},{r.confidence}\n")
    return buf.getvalue()
