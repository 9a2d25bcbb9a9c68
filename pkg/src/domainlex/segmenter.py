"""Most-likely word segmentation of domain-name strings.

Tokens are scored with the unigram/bigram model of :mod:`domainlex.corpus`:
each token is conditioned on the token before it, the first token of every
substring on nothing. The search is an exact dynamic program whose state is
(end position, length of the last token), so bigram context is handled
without approximation. The DP runs compiled; words are found through a hash
table over the UTF-8 bytes of every vocabulary prefix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .corpus import BigramModel, WordModel, unknown_word_logprob

__all__ = ["Segmentation", "Segmenter", "segment", "segment_core", "DEFAULT_MAX_TOKEN_LEN"]

DEFAULT_MAX_TOKEN_LEN = 20
_LN10 = math.log(10.0)


@dataclass(frozen=True)
class Segmentation:
    tokens: tuple[str, ...]
    logprob: float


_FNV_OFFSET = np.uint64(14695981039346656037)
_FNV_PRIME = np.uint64(1099511628211)


# Hash table over every prefix of every vocabulary word. A slot packs the
# top 32 bits of the FNV-1a hash, two flags and a witness word id:
#   bits 32-63  hash fingerprint
#   bit 31      some longer vocabulary word starts with this string
#   bit 30      the string is itself a vocabulary word (the witness)
#   bits 0-29   witness word id + 1 (0 marks an empty slot)
# Matches are confirmed byte by byte against the witness, so lookups are exact.
_EXTENDS = np.uint64(1 << 31)
_IS_WORD = np.uint64(1 << 30)
_ID_MASK = np.uint64((1 << 30) - 1)
_SHIFT = np.uint64(32)


@numba.njit(cache=True)
def _same_prefix(flat, offsets, witness, text, i, length):
    lo = offsets[witness]
    if offsets[witness + 1] - lo < length:
        return False
    for k in range(length):
        if flat[lo + k] != text[i + k]:
            return False
    return True


@numba.njit(cache=True)
def _probe(table, h, flat, offsets, text, i, length):
    """Slot holding ``text[i:i+length]``, or the empty slot where it would go."""
    mask = np.uint64(table.size - 1)
    slot = h & mask
    fp = h >> _SHIFT
    while True:
        e = table[slot]
        if e == 0:
            return slot
        if e >> _SHIFT == fp and _same_prefix(flat, offsets, np.int64(e & _ID_MASK) - 1, text, i, length):
            return slot
        slot = (slot + np.uint64(1)) & mask


@numba.njit(cache=True)
def _build_table(flat, offsets, size):
    table = np.zeros(size, np.uint64)
    for w in range(offsets.size - 1):
        lo = offsets[w]
        n = offsets[w + 1] - lo
        h = _FNV_OFFSET
        for k in range(1, n + 1):
            h = (h ^ np.uint64(flat[lo + k - 1])) * _FNV_PRIME
            slot = _probe(table, h, flat, offsets, flat, lo, k)
            e = table[slot]
            if e == 0:
                e = (h >> _SHIFT) << _SHIFT | np.uint64(w + 1)
            if k == n:
                # a word entry must witness itself
                e = (e & ~_ID_MASK) | np.uint64(w + 1) | _IS_WORD
            else:
                e |= _EXTENDS
            table[slot] = e
    return table


@numba.njit(cache=True)
def _lookup(text, i, j, h, table, flat, offsets):
    """``(word id or -1, whether longer words extend text[i:j])``."""
    e = table[_probe(table, h, flat, offsets, text, i, j - i)]
    if e == 0:
        return -1, False
    w = np.int64(e & _ID_MASK) - 1 if e & _IS_WORD else -1
    return w, (e & _EXTENDS) != 0


@numba.njit(cache=True)
def _bigram(prev, w, succ_ptr, succ_word, succ_lp):
    lo = succ_ptr[prev]
    hi = succ_ptr[prev + 1]
    while lo < hi:
        mid = (lo + hi) >> 1
        x = succ_word[mid]
        if x == w:
            return True, succ_lp[mid]
        if x < w:
            lo = mid + 1
        else:
            hi = mid
    return False, 0.0


@numba.njit(cache=True)
def _starts(j, ln, parent, out):
    """Token start positions of the best path into state (j, ln), first token first."""
    k = 0
    while j > 0:
        out[k] = j - ln
        k += 1
        nj = j - ln
        ln = parent[j, ln]
        j = nj
    out[:k] = out[:k][::-1].copy()
    return k


@numba.njit(cache=True)
def _path_less(i, la, lb, parent, buf_a, buf_b):
    """Is the path into (i, la) lexicographically before the path into (i, lb)?

    Both paths spell the same prefix, so at the first token where they differ
    one token is a prefix of the other and the shorter one sorts first.
    """
    na = _starts(i, la, parent, buf_a)
    nb = _starts(i, lb, parent, buf_b)
    for k in range(min(na, nb)):
        end_a = buf_a[k + 1] if k + 1 < na else i
        end_b = buf_b[k + 1] if k + 1 < nb else i
        if end_a != end_b:
            return end_a < end_b
    return False


# Scores that differ by less than this relative amount are ties. Sums of the
# same terms in a different order can disagree in the last bits, and such
# mathematical ties must fall through to the token-count and lexical rules.
_TIE_RTOL = 1e-12


@numba.njit(cache=True)
def _order(a, b):
    """1 if score a beats b, -1 if it loses, 0 for a tie."""
    tol = _TIE_RTOL * max(1.0, abs(a), abs(b))
    if a > b + tol:
        return 1
    if a < b - tol:
        return -1
    return 0


@numba.njit(cache=True)
def _segment(text, max_len, table, flat, offsets, uni, succ_ptr, succ_word, succ_lp, unk):
    """Best segmentation of ``text``; returns (token starts, logprob).

    State (j, ln) is the best path over ``text[:j]`` whose last token has
    length ``ln``. Paths are ordered by score, then fewer tokens, then
    lexicographically by token sequence.
    """
    n = len(text)
    wid = np.full((n + 1, max_len + 1), -1, np.int64)
    for i in range(n):
        h = _FNV_OFFSET
        for j in range(i + 1, min(n, i + max_len) + 1):
            h = (h ^ np.uint64(text[j - 1])) * _FNV_PRIME
            w, extends = _lookup(text, i, j, h, table, flat, offsets)
            wid[j, j - i] = w
            if not extends:
                break
    score = np.full((n + 1, max_len + 1), -np.inf)
    ntok = np.zeros((n + 1, max_len + 1), np.int64)
    parent = np.zeros((n + 1, max_len + 1), np.int64)
    buf_a = np.empty(n + 1, np.int64)
    buf_b = np.empty(n + 1, np.int64)
    for j in range(1, n + 1):
        for ln in range(1, min(max_len, j) + 1):
            i = j - ln
            w = wid[j, ln]
            u = uni[w] if w >= 0 else unk[ln]
            if i == 0:
                score[j, ln] = u
                ntok[j, ln] = 1
                continue
            best = -1
            best_score = -np.inf
            for pl in range(1, min(max_len, i) + 1):
                t = u
                pid = wid[i, pl]
                if w >= 0 and pid >= 0:
                    hit, lp = _bigram(pid, w, succ_ptr, succ_word, succ_lp)
                    if hit:
                        t = lp
                sc = score[i, pl] + t
                if best < 0:
                    best, best_score = pl, sc
                    continue
                o = _order(sc, best_score)
                if o > 0 or (
                    o == 0
                    and (
                        ntok[i, pl] < ntok[i, best]
                        or (ntok[i, pl] == ntok[i, best] and _path_less(i, pl, best, parent, buf_a, buf_b))
                    )
                ):
                    best, best_score = pl, sc
            score[j, ln] = best_score
            ntok[j, ln] = ntok[i, best] + 1
            parent[j, ln] = best
    best = 1
    for ln in range(2, min(max_len, n) + 1):
        o = _order(score[n, ln], score[n, best])
        if o > 0 or (
            o == 0 and (ntok[n, ln] < ntok[n, best] or (ntok[n, ln] == ntok[n, best] and _path_less(n, ln, best, parent, buf_a, buf_b)))
        ):
            best = ln
    k = _starts(n, best, parent, buf_a)
    return buf_a[:k].copy(), score[n, best]


class Segmenter:
    """Reusable segmenter holding precomputed log-probability tables.

    Parameters
    ----------
    wm, bm : WordModel, BigramModel
        Unigram and bigram counts.
    max_token_len : int
        Longest token considered.
    """

    def __init__(self, wm: WordModel, bm: BigramModel, max_token_len: int = DEFAULT_MAX_TOKEN_LEN):
        if max_token_len < 1:
            raise ValueError("max_token_len must be >= 1")
        if wm.total <= 0:
            raise ValueError("word model is empty")
        self.wm = wm
        self.bm = bm
        self.max_token_len = max_token_len
        log_total = math.log(wm.total)
        self._uni = {w: math.log(c) - log_total for w, c in wm.counts.items()}
        self._unk_base = unknown_word_logprob(0, wm.total)
        succ: dict[str, dict[str, float]] = {}
        counts = wm.counts
        for (prev, word), c in bm.counts.items():
            pc = counts.get(prev)
            if pc is None:
                continue
            succ.setdefault(prev, {})[word] = math.log(c) - math.log(pc)
        self._succ = succ
        # every word the scorer knows: corpus words plus words that only occur
        # as bigram continuations (those carry the unknown-word penalty)
        words = list(self._uni)
        ids = {w: k for k, w in enumerate(words)}
        uni = list(self._uni.values())
        for sd in succ.values():
            for w in sd:
                if w not in ids:
                    ids[w] = len(words)
                    words.append(w)
                    uni.append(self._unk_base - len(w) * _LN10)
        encoded = [w.encode("utf-8") for w in words]
        self._flat = np.frombuffer(b"".join(encoded), dtype=np.uint8)
        self._offsets = np.zeros(len(words) + 1, dtype=np.int64)
        np.cumsum([len(e) for e in encoded], out=self._offsets[1:])
        if len(words) >= 1 << 30:
            raise ValueError("vocabulary too large")
        # the byte count bounds the number of distinct prefixes, so the table never fills
        size = 1 << max(4, int(self._offsets[-1]).bit_length())
        self._table = _build_table(self._flat, self._offsets, size)
        self._uni_arr = np.array(uni, dtype=np.float64)
        counts_per_prev = np.zeros(len(words) + 1, dtype=np.int64)
        pairs = []
        for prev, sd in succ.items():
            p = ids[prev]
            counts_per_prev[p + 1] = len(sd)
            pairs.extend((p, ids[w], lp) for w, lp in sd.items())
        pairs.sort()
        self._succ_ptr = np.cumsum(counts_per_prev)
        self._succ_word = np.array([q[1] for q in pairs], dtype=np.int64)
        self._succ_lp = np.array([q[2] for q in pairs], dtype=np.float64)
        # unknown-word score by length, computed here so it rounds exactly as word_logprob does
        self._unk = np.array([self._unk_base - k * _LN10 for k in range(max_token_len + 1)])
        self._tables = (
            max_token_len, self._table, self._flat, self._offsets,
            self._uni_arr, self._succ_ptr, self._succ_word, self._succ_lp, self._unk,
        )

    def word_logprob(self, word: str, prev: str | None = None) -> float:
        if prev is not None:
            sd = self._succ.get(prev)
            if sd is not None and word in sd:
                return sd[word]
        lp = self._uni.get(word)
        return lp if lp is not None else self._unk_base - len(word) * _LN10

    def segment(self, text: str) -> Segmentation:
        """Segment a non-empty, hyphen-free alphanumeric string."""
        tokens, lp = self._run(text)
        return Segmentation(tokens, lp)

    def segment_core(self, core: str) -> list[str]:
        """Segment each hyphen-separated piece of a domain core and concatenate."""
        tokens: list[str] = []
        for piece in core.split("-"):
            if piece:
                tokens.extend(self._run(piece)[0])
        return tokens

    def _run(self, text: str) -> tuple[tuple[str, ...], float]:
        if not text:
            raise ValueError("cannot segment an empty string")
        if not (text.isascii() and text.isalnum()):
            raise ValueError(f"non-alphanumeric characters in {text!r}")
        starts, lp = _segment(text.encode("ascii"), *self._tables)
        if len(starts) == 1:
            return (text,), float(lp)
        bounds = starts.tolist()
        bounds.append(len(text))
        return tuple(text[a:b] for a, b in zip(bounds, bounds[1:])), float(lp)


_CACHE: dict[tuple[int, int, int], Segmenter] = {}


def _segmenter(wm: WordModel, bm: BigramModel, max_token_len: int) -> Segmenter:
    key = (id(wm), id(bm), max_token_len)
    seg = _CACHE.get(key)
    if seg is None or seg.wm is not wm or seg.bm is not bm:
        if len(_CACHE) >= 4:
            _CACHE.clear()
        seg = _CACHE[key] = Segmenter(wm, bm, max_token_len)
    return seg


def segment(s: str, wm: WordModel, bm: BigramModel, max_token_len: int = DEFAULT_MAX_TOKEN_LEN) -> Segmentation:
    return _segmenter(wm, bm, max_token_len).segment(s)


def segment_core(core: str, wm: WordModel, bm: BigramModel, max_token_len: int = DEFAULT_MAX_TOKEN_LEN) -> list[str]:
    return _segmenter(wm, bm, max_token_len).segment_core(core)
