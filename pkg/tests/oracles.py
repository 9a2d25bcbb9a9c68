"""Slow, independent reference implementations used to check the package.

Nothing here imports the code under test; each oracle works from the
defining formula.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


# -- segmentation -------------------------------------------------------------


def token_logprob(word, prev, unigrams, bigrams, total):
    """log P(word | prev) straight from raw counts."""
    if prev is not None and (prev, word) in bigrams and prev in unigrams:
        return math.log(bigrams[(prev, word)] / unigrams[prev])
    if word in unigrams:
        return math.log(unigrams[word] / total)
    return math.log(10.0 / (total * 10.0 ** len(word)))


def sequence_logprob(tokens, unigrams, bigrams, total):
    score = 0.0
    prev = None
    for tok in tokens:
        score += token_logprob(tok, prev, unigrams, bigrams, total)
        prev = tok
    return score


def all_segmentations(text, max_len):
    """Every split of ``text`` into tokens of length <= max_len (2**(n-1) candidates before the cap)."""
    n = len(text)
    for cuts in itertools.product((False, True), repeat=n - 1):
        tokens = []
        start = 0
        for i, cut in enumerate(cuts, start=1):
            if cut:
                tokens.append(text[start:i])
                start = i
        tokens.append(text[start:])
        if all(len(t) <= max_len for t in tokens):
            yield tuple(tokens)


def brute_force_segment(text, unigrams, bigrams, total, max_len=20):
    """Best (logprob, tokens) by exhaustive enumeration, using the same tie-break order."""
    best = None
    for toks in all_segmentations(text, max_len):
        key = (-sequence_logprob(toks, unigrams, bigrams, total), len(toks), toks)
        if best is None or key < best:
            best = key
    return -best[0], best[2]


# -- metrics --------------------------------------------------------------------


def pairwise_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    credit = 0.0
    for p in pos:
        for q in neg:
            credit += 1.0 if p > q else 0.5 if p == q else 0.0
    return credit / (len(pos) * len(neg))


# -- lasso ----------------------------------------------------------------------


def _loss_grad(X, y, b0, beta):
    eta = b0 + X @ beta
    p = 0.5 * (1.0 + np.tanh(0.5 * eta))
    r = p - y
    n = y.size
    loss = np.mean(np.logaddexp(0.0, eta) - y * eta)
    return loss, r.mean(), X.T @ r / n


def proximal_gradient_lasso(X, y, lam, tol=1e-10, max_iter=2_000_000, start=None):
    """FISTA with adaptive restart for the L1-penalized mean logistic loss.

    Stops when the composite gradient mapping has infinity norm below ``tol``.
    Returns ``(b0, beta)``.
    """
    X = np.asarray(X, dtype=np.float64)
    n, p = X.shape
    # Lipschitz constant of the gradient including the intercept column
    Z = np.hstack([np.ones((n, 1)), X])
    L = np.linalg.norm(Z, 2) ** 2 / (4.0 * n)
    step = 1.0 / L
    if start is None:
        ybar = y.mean()
        x = np.r_[math.log(ybar / (1 - ybar)), np.zeros(p)]
    else:
        x = np.r_[start[0], start[1]].astype(np.float64)
    v = x.copy()
    t = 1.0

    def prox(z):
        out = z.copy()
        out[1:] = np.sign(z[1:]) * np.maximum(np.abs(z[1:]) - step * lam, 0.0)
        return out

    for _ in range(max_iter):
        _, g0, g = _loss_grad(X, y, v[0], v[1:])
        x_new = prox(v - step * np.r_[g0, g])
        mapping = (v - x_new) / step
        if np.max(np.abs(mapping)) < tol:
            return x_new[0], x_new[1:]
        # restart momentum when it points uphill
        if np.dot(v - x_new, x_new - x) > 0:
            t = 1.0
            v = x_new.copy()
        else:
            t_new = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
            v = x_new + ((t - 1.0) / t_new) * (x_new - x)
            t = t_new
        x = x_new
    raise RuntimeError(f"proximal gradient did not reach {tol} at lambda={lam}")


def kkt_residual(X, y, b0, beta, lam):
    """Largest violation of the lasso optimality conditions (0 at the exact optimum).

    Active coordinates need gradient == lam * sign; inactive ones |gradient| <= lam;
    the unpenalized intercept needs a zero gradient.
    """
    X = np.asarray(X, dtype=np.float64)
    eta = b0 + X @ beta
    p = 0.5 * (1.0 + np.tanh(0.5 * eta))
    score = X.T @ (y - p) / y.size
    active = beta != 0
    worst = abs(np.mean(y - p))
    if active.any():
        worst = max(worst, np.max(np.abs(score[active] - lam * np.sign(beta[active]))))
    if (~active).any():
        worst = max(worst, np.max(np.abs(score[~active])) - lam)
    return max(worst, 0.0)


# -- public suffix list -----------------------------------------------------------


def naive_registrable_domain(host, rules):
    """The publicsuffix.org algorithm written out from its prose description.

    ``rules`` is a list of rule strings as they appear in the file. Returns
    the registrable domain or ``None``.
    """
    labels = host.split(".")
    matches = []
    for rule in rules:
        exc = rule.startswith("!")
        body = (rule[1:] if exc else rule).split(".")
        if len(body) > len(labels):
            continue
        tail = labels[len(labels) - len(body):]
        if all(r == "*" or r == h for r, h in zip(body, tail)):
            matches.append((exc, len(body)))
    exceptions = [k for exc, k in matches if exc]
    if exceptions:
        suffix_len = max(exceptions) - 1
    elif matches:
        suffix_len = max(k for _, k in matches)
    else:
        suffix_len = 1
    if suffix_len >= len(labels):
        return None
    return ".".join(labels[-suffix_len - 1:])
