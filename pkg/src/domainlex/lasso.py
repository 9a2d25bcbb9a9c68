"""L1-penalized logistic regression on sparse designs.

The objective at penalty ``lam`` is::

    (1/n) * sum_i [log(1 + exp(eta_i)) - y_i * eta_i] + lam * sum_j |beta_j|,
    eta = beta0 + X @ beta

with an unpenalized intercept. Each penalty on a decreasing path is solved by
iteratively reweighted least squares: a quadratic approximation of the loss
is minimized by cyclic coordinate descent with soft-thresholding, warm
started from the previous penalty. Sweeps alternate between all columns and
the currently active ones, and the active-column passes periodically take an
exact solve on the active set to cross poorly conditioned valleys. Identical
columns are fitted once. A step-halving guard keeps the objective
non-increasing across outer iterations.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import sparse
from scipy.special import expit

from .metrics import auc

__all__ = [
    "ConvergenceError",
    "DegenerateLabels",
    "FingerprintMismatch",
    "LassoModel",
    "PathFit",
    "CvResult",
    "soft_threshold",
    "lambda_max",
    "lambda_path",
    "objective",
    "fit_path",
    "stratified_folds",
    "cross_validate",
    "select_one_se",
    "select_best",
    "predict_prob",
    "logistic",
]

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 10_000
DEFAULT_N_LAMBDAS = 100
DEFAULT_LAMBDA_RATIO = 0.01
_MAX_INNER_SWEEPS = 100_000
_MIN_WEIGHT = 1e-5
# inner least-squares solves run this much tighter than the outer test, so the
# outer "coefficient change < tol" criterion is not limited by inner slack
_INNER_TOL_FACTOR = 1e-2
# covariance coordinate descent tries an exact active-set solve this often
_NEWTON_EVERY = 25
_NEWTON_DROPS = 8


class ConvergenceError(RuntimeError):
    def __init__(self, lam: float, iterations: int, what: str = "outer"):
        super().__init__(f"no convergence at lambda={lam:.6g} after {iterations} {what} iterations")
        self.lam = lam
        self.iterations = iterations


class DegenerateLabels(ValueError):
    pass


class FingerprintMismatch(ValueError):
    pass


@dataclass
class LassoModel:
    intercept: float
    coefficients: dict[int, float]
    lam: float
    n_features: int
    feature_fingerprint: str = ""
    training_meta: dict = field(default_factory=dict)

    @property
    def nonzero_count(self) -> int:
        return len(self.coefficients)

    def coef_array(self) -> np.ndarray:
        beta = np.zeros(self.n_features)
        for j, b in self.coefficients.items():
            beta[j] = b
        return beta

    def decision_function(self, X) -> np.ndarray:
        return self.intercept + np.asarray(X @ self.coef_array()).ravel()

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(self.decision_function(X))


@dataclass
class PathFit:
    lambdas: np.ndarray
    models: list[LassoModel]
    objective_traces: list[np.ndarray] = field(default_factory=list)


@dataclass
class CvResult:
    lambdas: np.ndarray
    mean_auc: np.ndarray
    se_auc: np.ndarray
    fold_auc: np.ndarray  # shape (fold_count, len(lambdas))
    fold_count: int
    seed: int


def soft_threshold(z: float, gamma: float) -> float:
    if gamma < 0:
        raise ValueError("threshold must be non-negative")
    if z > gamma:
        return z - gamma
    if z < -gamma:
        return z + gamma
    return 0.0


def _sigmoid(eta):
    return expit(np.asarray(eta, dtype=np.float64))


def _check_labels(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).ravel()
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("labels must be 0 or 1")
    if y.size == 0 or y.min() == y.max():
        raise DegenerateLabels("degenerate labels: both classes are required")
    return y


def lambda_max(X, y) -> float:
    """Smallest penalty at which every coefficient is zero."""
    y = _check_labels(y)
    X = sparse.csc_matrix(X)
    score = np.asarray(X.T @ (y - y.mean())).ravel() / y.size
    return float(np.max(np.abs(score))) if score.size else 0.0


def lambda_path(lam_max: float, n: int = DEFAULT_N_LAMBDAS, ratio: float = DEFAULT_LAMBDA_RATIO) -> np.ndarray:
    """``n`` log-spaced penalties from ``lam_max`` down to ``ratio * lam_max``."""
    if lam_max <= 0:
        # nothing to penalize; a single tiny penalty keeps the path well formed
        return np.array([1e-12])
    if not 0 < ratio < 1:
        raise ValueError("ratio must be in (0, 1)")
    return lam_max * np.logspace(0.0, math.log10(ratio), n)


def objective(X, y, intercept: float, beta: np.ndarray, lam: float) -> float:
    eta = intercept + np.asarray(X @ beta).ravel()
    loss = np.mean(np.logaddexp(0.0, eta) - y * eta)
    return float(loss + lam * np.abs(beta).sum())


@numba.njit(cache=True)
def _loss(eta, y):
    s = 0.0
    for i in range(eta.size):
        e = eta[i]
        s += (e if e > 0 else 0.0) + math.log1p(math.exp(-abs(e))) - y[i] * e
    return s / eta.size


@numba.njit(cache=True)
def _eta(indptr, indices, data, b0, beta, n):
    eta = np.full(n, b0)
    for j in range(beta.size):
        b = beta[j]
        if b != 0.0:
            for k in range(indptr[j], indptr[j + 1]):
                eta[indices[k]] += data[k] * b
    return eta


@numba.njit(cache=True)
def _sweep(cols, indptr, indices, data, w, r, beta, lam, n):
    """One coordinate-descent pass over ``cols``; returns the largest change."""
    max_change = 0.0
    for j in cols:
        lo = indptr[j]
        hi = indptr[j + 1]
        if lo == hi:
            continue
        grad = 0.0
        v = 0.0
        for k in range(lo, hi):
            i = indices[k]
            xw = data[k] * w[i]
            grad += xw * r[i]
            v += xw * data[k]
        grad /= n
        v /= n
        if v <= 0.0:
            continue
        old = beta[j]
        z = grad + v * old
        if z > lam:
            new = (z - lam) / v
        elif z < -lam:
            new = (z + lam) / v
        else:
            new = 0.0
        d = new - old
        if d != 0.0:
            beta[j] = new
            for k in range(lo, hi):
                r[indices[k]] -= data[k] * d
            if abs(d) > max_change:
                max_change = abs(d)
    return max_change


@numba.njit(cache=True)
def _intercept_step(w, r):
    sw = 0.0
    swr = 0.0
    for i in range(w.size):
        sw += w[i]
        swr += w[i] * r[i]
    d = swr / sw
    for i in range(r.size):
        r[i] -= d
    return d


@numba.njit(cache=True)
def _active_gram(active, pos, rptr, rcol, rdata, w, n):
    """Weighted Gram matrix of the active columns, with the intercept as the last slot."""
    m = active.size
    G = np.zeros((m + 1, m + 1))
    slot = np.empty(m, np.int64)
    val = np.empty(m)
    for i in range(n):
        wi = w[i]
        c = 0
        for k in range(rptr[i], rptr[i + 1]):
            a = pos[rcol[k]]
            if a >= 0:
                slot[c] = a
                val[c] = rdata[k]
                c += 1
        for s in range(c):
            a = slot[s]
            xa = val[s] * wi
            G[a, m] += xa
            for t in range(s, c):
                G[a, slot[t]] += xa * val[t]
        G[m, m] += wi
    # column indices are sorted within rows and slots follow column order, so only the upper triangle was filled
    for a in range(m + 1):
        for b in range(a + 1, m + 1):
            G[b, a] = G[a, b]
    return G / n


@numba.njit(cache=True)
def _psd_solve(H, rhs):
    """Minimum-norm solution of ``H @ x = rhs`` for symmetric positive semidefinite ``H``.

    Returns an empty array if the eigendecomposition fails.
    """
    try:
        vals, vecs = np.linalg.eigh(H)
    except Exception:
        return np.empty(0)
    cut = 1e-13 * max(vals[-1], 0.0)
    coef = vecs.T @ rhs
    for i in range(vals.size):
        coef[i] = coef[i] / vals[i] if vals[i] > cut else 0.0
    return vecs @ coef


@numba.njit(cache=True)
def _newton_step(G, g, b, lam, max_drops):
    """Exact minimizer of the quadratic model over the nonzero coordinates, signs held fixed.

    Coordinate descent crawls along valleys whose curvature comes only from
    rows with near-saturated probabilities. Solving the small dense system
    jumps along them. A coordinate that would change sign stops the step
    where it reaches zero, leaves the set, and the system is solved again,
    at most ``max_drops`` times. Updates ``b`` and ``g`` in place and
    returns the intercept move.
    """
    m = b.size
    moved0 = 0.0
    for _ in range(max_drops + 1):
        nz = np.flatnonzero(b)
        k = nz.size
        idx = np.empty(k + 1, np.int64)
        idx[:k] = nz
        idx[k] = m
        H = np.empty((k + 1, k + 1))
        rhs = np.empty(k + 1)
        for u in range(k + 1):
            for v in range(k + 1):
                H[u, v] = G[idx[u], idx[v]]
            rhs[u] = g[idx[u]]
        for u in range(k):
            rhs[u] -= lam if b[nz[u]] > 0 else -lam
        step = _psd_solve(H, rhs)
        if step.size == 0:
            break
        gain = 0.0
        for u in range(k + 1):
            hs = 0.0
            for v in range(k + 1):
                hs += H[u, v] * step[v]
            gain += step[u] * (rhs[u] - 0.5 * hs)
        if not gain > 0.0:
            break
        t = 1.0
        hit = -1
        for u in range(k):
            bu = b[nz[u]]
            if step[u] != 0.0 and bu * (bu + step[u]) <= 0.0:
                tu = -bu / step[u]
                if tu < t:
                    t = tu
                    hit = u
        for u in range(k + 1):
            d = -b[nz[u]] if u == hit else t * step[u]
            if d == 0.0:
                continue
            a = idx[u]
            if u < k:
                b[a] = 0.0 if u == hit else b[a] + d
            for c in range(m + 1):
                g[c] -= d * G[c, a]
        moved0 += t * step[k]
        if hit < 0:
            break
    return moved0


@numba.njit(cache=True)
def _active_cd(active, pos, indptr, indices, data, rptr, rcol, rdata, w, r, beta, b0, lam, tol, n, budget):
    """Coordinate descent restricted to ``active`` using covariance updates.

    Updates ``beta`` and the working residual ``r`` in place; returns
    ``(b0, sweeps)``. Stops early when ``budget`` sweeps are used.
    """
    m = active.size
    for a in range(m):
        pos[active[a]] = a
    G = _active_gram(active, pos, rptr, rcol, rdata, w, n)
    for a in range(m):
        pos[active[a]] = -1
    # g holds (1/n) * sum_i x_i w_i r_i for each active column and the intercept
    g = np.zeros(m + 1)
    for a in range(m):
        j = active[a]
        s = 0.0
        for k in range(indptr[j], indptr[j + 1]):
            i = indices[k]
            s += data[k] * w[i] * r[i]
        g[a] = s / n
    s = 0.0
    for i in range(n):
        s += w[i] * r[i]
    g[m] = s / n
    start = np.empty(m)
    for a in range(m):
        start[a] = beta[active[a]]
    b = start.copy()
    moved0 = 0.0
    sweeps = 0
    while sweeps < budget:
        max_change = 0.0
        for a in range(m):
            v = G[a, a]
            if v <= 0.0:
                continue
            old = b[a]
            z = g[a] + v * old
            if z > lam:
                new = (z - lam) / v
            elif z < -lam:
                new = (z + lam) / v
            else:
                new = 0.0
            d = new - old
            if d != 0.0:
                b[a] = new
                for c in range(m + 1):
                    g[c] -= d * G[c, a]
                if abs(d) > max_change:
                    max_change = abs(d)
        d0 = g[m] / G[m, m]
        for c in range(m + 1):
            g[c] -= d0 * G[c, m]
        moved0 += d0
        sweeps += 1
        if max(max_change, abs(d0)) < tol:
            break
        if sweeps % _NEWTON_EVERY == 0:
            moved0 += _newton_step(G, g, b, lam, _NEWTON_DROPS)
    # carry the accumulated change back into the working residual
    for a in range(m):
        d = b[a] - start[a]
        if d != 0.0:
            j = active[a]
            beta[j] = b[a]
            for k in range(indptr[j], indptr[j + 1]):
                r[indices[k]] -= data[k] * d
    for i in range(n):
        r[i] -= moved0
    return b0 + moved0, sweeps


@numba.njit(cache=True)
def _objective_change(eta, direction, t, y, beta, step, lam):
    """Objective at ``(eta + t*direction, beta + t*step)`` minus the objective at ``(eta, beta)``.

    Per row, softplus(e + d) - softplus(e) - y*d is log1p(p*expm1(d)) for
    y = 0 and log1p((1-p)*expm1(-d)) for y = 1, with p the fitted
    probability at e; both forms keep full relative precision for small d.
    """
    s = 0.0
    for i in range(eta.size):
        d = t * direction[i]
        if d == 0.0:
            continue
        e = eta[i]
        if y[i] > 0.5:
            q = 1.0 / (1.0 + math.exp(e))
            s += math.log1p(q * math.expm1(-d))
        else:
            p = 1.0 / (1.0 + math.exp(-e))
            s += math.log1p(p * math.expm1(d))
    l1 = 0.0
    for j in range(beta.size):
        if step[j] != 0.0:
            l1 += abs(beta[j] + t * step[j]) - abs(beta[j])
    return s / eta.size + lam * l1


@numba.njit(cache=True)
def _solve(indptr, indices, data, rptr, rcol, rdata, y, lam, beta, b0, tol, max_outer, max_sweeps, trace):
    """Minimize the penalized objective in place from the warm start ``(b0, beta)``.

    Returns ``(b0, outer_iterations, sweeps, status)`` where status is 0 on
    convergence, 1 when the outer limit is hit, 2 when the inner limit is hit.
    """
    n = y.size
    p = beta.size
    all_cols = np.arange(p)
    pos = np.full(p, -1, np.int64)
    eta = _eta(indptr, indices, data, b0, beta, n)
    obj = _loss(eta, y) + lam * np.abs(beta).sum()
    w = np.empty(n)
    r = np.empty(n)
    sweeps = 0
    inner_tol = tol * _INNER_TOL_FACTOR
    for outer in range(max_outer):
        trace[outer] = obj
        for i in range(n):
            pi = 1.0 / (1.0 + math.exp(-eta[i]))
            wi = pi * (1.0 - pi)
            if wi < _MIN_WEIGHT:
                wi = _MIN_WEIGHT
            w[i] = wi
            r[i] = (y[i] - pi) / wi
        old_beta = beta.copy()
        old_b0 = b0
        # coordinate descent on the weighted least-squares approximation:
        # full passes find the active set, covariance passes converge on it
        while True:
            change = _sweep(all_cols, indptr, indices, data, w, r, beta, lam, n)
            d0 = _intercept_step(w, r)
            b0 += d0
            sweeps += 1
            if max(change, abs(d0)) < inner_tol:
                break
            if sweeps >= max_sweeps:
                return b0, outer + 1, sweeps, 2
            active = np.flatnonzero(beta)
            b0, used = _active_cd(
                active, pos, indptr, indices, data, rptr, rcol, rdata, w, r, beta, b0, lam, inner_tol, n, max_sweeps - sweeps
            )
            sweeps += used
            if sweeps >= max_sweeps:
                return b0, outer + 1, sweeps, 2
        # step halving keeps the true objective from increasing; the change is
        # evaluated directly because near the optimum it is far below the
        # rounding error of the objective itself
        step_b = beta - old_beta
        step_0 = b0 - old_b0
        direction = _eta(indptr, indices, data, step_0, step_b, n)
        t = 1.0
        change = 0.0
        for _ in range(60):
            change = _objective_change(eta, direction, t, y, old_beta, step_b, lam)
            if change <= 0.0:
                break
            t *= 0.5
        if change > 0.0:
            beta[:] = old_beta
            trace[outer + 1] = obj
            return old_b0, outer + 1, sweeps, 0
        beta[:] = old_beta + t * step_b
        b0 = old_b0 + t * step_0
        eta = _eta(indptr, indices, data, b0, beta, n)
        obj += change
        # converged when the proposed change is small; testing the damped
        # change would stop early whenever the line search halves the step
        delta = max(np.max(np.abs(step_b)) if p > 0 else 0.0, abs(step_0))
        if delta < tol:
            trace[outer + 1] = obj
            return b0, outer + 1, sweeps, 0
    return b0, max_outer, sweeps, 1


def _as_csc(X) -> sparse.csc_matrix:
    X = sparse.csc_matrix(X, dtype=np.float64)
    X.sort_indices()
    return X


def _distinct_columns(X: sparse.csc_matrix) -> np.ndarray:
    """Index of the first column of each group of identical columns, in column order.

    Identical columns leave the lasso solution non-unique: any same-signed
    split of one coefficient among them has the same objective. Fitting only
    the first of each group picks that split deterministically and keeps the
    active-set Gram matrix from being singular for that reason.
    """
    seen: dict[bytes, int] = {}
    keep = []
    for j in range(X.shape[1]):
        lo, hi = X.indptr[j], X.indptr[j + 1]
        key = X.indices[lo:hi].tobytes() + b"|" + X.data[lo:hi].tobytes()
        if key not in seen:
            seen[key] = j
            keep.append(j)
    return np.asarray(keep, dtype=np.int64)


def fit_path(
    X,
    y,
    lambdas: Sequence[float],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    fingerprint: str = "",
) -> PathFit:
    """Fit the lasso at each penalty in ``lambdas`` with warm starts.

    Penalties at or above :func:`lambda_max` return the intercept-only model
    exactly.
    """
    y = _check_labels(y)
    lambdas = np.asarray(lambdas, dtype=np.float64)
    if lambdas.ndim != 1 or lambdas.size == 0:
        raise ValueError("lambdas must be a non-empty 1-d sequence")
    if np.any(lambdas <= 0) or np.any(np.diff(lambdas) >= 0):
        raise ValueError("lambdas must be positive and strictly decreasing")
    X = _as_csc(X)
    n, p = X.shape
    if n != y.size:
        raise ValueError(f"X has {n} rows but y has {y.size} labels")
    lmax = lambda_max(X, y)
    ybar = y.mean()
    b0 = math.log(ybar / (1.0 - ybar))
    keep = _distinct_columns(X)
    X = X[:, keep]
    X.sort_indices()
    beta = np.zeros(keep.size)
    indptr = X.indptr.astype(np.int64)
    indices = X.indices.astype(np.int64)
    data = X.data
    Xr = X.tocsr()
    Xr.sort_indices()
    rptr = Xr.indptr.astype(np.int64)
    rcol = Xr.indices.astype(np.int64)
    rdata = Xr.data
    models: list[LassoModel] = []
    traces: list[np.ndarray] = []
    for lam in lambdas:
        trace = np.empty(max_iter + 1)
        if lam >= lmax:
            beta[:] = 0.0
            b0 = math.log(ybar / (1.0 - ybar))
            outer, sweeps = 0, 0
            trace[0] = objective(X, y, b0, beta, lam)
            used = 1
        else:
            b0, outer, sweeps, status = _solve(indptr, indices, data, rptr, rcol, rdata, y, lam, beta, b0, tol, max_iter, _MAX_INNER_SWEEPS, trace)
            if status == 1:
                raise ConvergenceError(float(lam), outer)
            if status == 2:
                raise ConvergenceError(float(lam), sweeps, "coordinate-descent sweep")
            used = outer + 1
        nz = np.flatnonzero(beta)
        models.append(
            LassoModel(
                intercept=float(b0),
                coefficients={int(keep[j]): float(beta[j]) for j in nz},
                lam=float(lam),
                n_features=p,
                feature_fingerprint=fingerprint,
                training_meta={"tol": tol, "outer_iterations": int(outer), "sweeps": int(sweeps)},
            )
        )
        traces.append(trace[:used].copy())
    return PathFit(lambdas, models, traces)


def stratified_folds(y, k: int, seed: int) -> np.ndarray:
    """Fold id per row: each class is shuffled and dealt round-robin into ``k`` folds."""
    y = np.asarray(y).ravel()
    if k < 2:
        raise ValueError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    folds = np.empty(y.size, dtype=np.int64)
    offset = 0
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        if idx.size < k:
            raise ValueError(f"class {cls} has {idx.size} rows, fewer than {k} folds")
        idx = idx[rng.permutation(idx.size)]
        folds[idx] = (np.arange(idx.size) + offset) % k
        offset += idx.size
    return folds


def cross_validate(
    X,
    y,
    lambdas: Sequence[float],
    k: int = 10,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> CvResult:
    """K-fold cross-validated AUC along the penalty path."""
    y = _check_labels(y)
    X = sparse.csr_matrix(X, dtype=np.float64)
    lambdas = np.asarray(lambdas, dtype=np.float64)
    folds = stratified_folds(y, k, seed)
    fold_auc = np.empty((k, lambdas.size))
    for f in range(k):
        test = folds == f
        try:
            fit = fit_path(X[~test], y[~test], lambdas, tol=tol, max_iter=max_iter)
        except (ConvergenceError, ValueError) as exc:
            exc.fold = f
            exc.args = (f"fold {f}: {exc.args[0] if exc.args else exc}",)
            raise
        Xt, yt = X[test], y[test]
        for li, m in enumerate(fit.models):
            fold_auc[f, li] = auc(m.decision_function(Xt), yt)
    mean = fold_auc.mean(axis=0)
    se = fold_auc.std(axis=0, ddof=1) / math.sqrt(k)
    return CvResult(lambdas, mean, se, fold_auc, k, seed)


def select_best(cv: CvResult) -> float:
    """Penalty with the highest mean cross-validated AUC (largest on ties)."""
    return float(cv.lambdas[int(np.argmax(cv.mean_auc))])


def select_one_se(cv: CvResult) -> float:
    """Largest penalty whose mean AUC is within one standard error of the best."""
    if len(cv.lambdas) == 0:
        raise ValueError("empty cross-validation result")
    order = np.argsort(-np.asarray(cv.lambdas), kind="mergesort")
    means = np.asarray(cv.mean_auc)[order]
    best = int(np.argmax(means))
    threshold = means[best] - np.asarray(cv.se_auc)[order][best]
    first = int(np.flatnonzero(means >= threshold)[0])
    return float(np.asarray(cv.lambdas)[order][first])


def predict_prob(model: LassoModel, vector) -> float:
    """Probability of the positive class for one binary feature vector.

    ``vector`` is a :class:`~domainlex.features.SparseVector`, or a plain
    sequence of set column indices (no fingerprint check).
    """
    fingerprint = getattr(vector, "fingerprint", None)
    indices = getattr(vector, "indices", vector)
    if fingerprint is not None and fingerprint != model.feature_fingerprint:
        raise FingerprintMismatch(
            f"vector built for feature space {fingerprint!r}, model expects {model.feature_fingerprint!r}"
        )
    coef = model.coefficients
    eta = model.intercept
    for j in indices:
        eta += coef.get(j, 0.0)
    return logistic(eta)


def logistic(eta: float) -> float:
    """1 / (1 + exp(-eta)), evaluated without overflow or loss of the small tail."""
    if eta >= 0.0:
        return 1.0 / (1.0 + math.exp(-eta))
    e = math.exp(eta)
    return e / (1.0 + e)
