"""Datasets, experiment splits, the model matrix and coefficient reports."""

from __future__ import annotations

import csv
import json
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import lasso
from .analyzer import DomainAnalyzer
from .corpus import CharMarkovModel
from .features import (
    FAMILIES,
    FeatureInput,
    FeatureSpace,
    FeatureSpaceError,
    _bin,
    _count_bin,
    basic_counts,
    char_loglik,
    design_matrix,
    fit_feature_space,
)
from .metrics import auc, mcr
from .psl import DomainName

__all__ = [
    "MALICIOUS_BELOW",
    "CONFIDENCE_MIN",
    "DomainRecord",
    "IngestError",
    "IngestResult",
    "ingest",
    "label_for_rating",
    "in_filtered_set",
    "ExperimentSplit",
    "build_experiment",
    "ModelSpec",
    "MODEL_SPECS",
    "TrainConfig",
    "TrainedModel",
    "train_model",
    "MatrixRow",
    "MatrixReport",
    "run_matrix",
    "RankedFeature",
    "report_coefficients",
    "HostScorer",
]

log = logging.getLogger(__name__)

MALICIOUS_BELOW = 60
CONFIDENCE_MIN = 10
AMBIGUOUS_RATINGS = range(40, 60)
SOURCES = ("cellular", "directory")
CSV_HEADER = ("domain", "source", "rating", "confidence")
EXPERIMENTS = ("balanced", "unfiltered", "filtered")


def label_for_rating(rating: int) -> int:
    """1 (malicious) for reputation ratings below 60, else 0."""
    return int(rating < MALICIOUS_BELOW)


def in_filtered_set(rating: int | None, confidence: int | None) -> bool:
    """Confident, unambiguous ratings: confidence >= 10 and rating outside [40, 60)."""
    if rating is None or confidence is None:
        return False
    return confidence >= CONFIDENCE_MIN and rating not in AMBIGUOUS_RATINGS


@dataclass(frozen=True)
class DomainRecord:
    raw: str
    parsed: DomainName
    tokens: tuple[str, ...]
    source: str
    rating: int | None = None
    confidence: int | None = None
    label: int | None = None

    @property
    def features(self) -> FeatureInput:
        return FeatureInput(self.parsed.core, self.parsed.tld, self.tokens)


class IngestError(ValueError):
    pass


@dataclass
class IngestResult:
    records: list[DomainRecord]
    skipped: list[tuple[int, str]] = field(default_factory=list)

    @property
    def skip_count(self) -> int:
        return len(self.skipped)


def _score_field(text: str, name: str) -> int | None:
    text = text.strip()
    if not text:
        return None
    value = int(text)
    if not 0 <= value <= 100:
        raise ValueError(f"{name} {value} outside 0..100")
    return value


def ingest(lines: Iterable[str], analyzer: DomainAnalyzer, max_skip_rate: float = 0.10) -> IngestResult:
    """Parse a ratings CSV with header ``domain,source,rating,confidence``.

    Rows whose domain cannot be reduced to a valid core, or whose fields are
    malformed, are skipped and reported. More than ``max_skip_rate`` skipped
    rows is an error.
    """
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty input: missing header") from None
    if tuple(h.strip().lower() for h in header) != CSV_HEADER:
        raise IngestError(f"expected header {','.join(CSV_HEADER)!r}, got {','.join(header)!r}")
    records: list[DomainRecord] = []
    skipped: list[tuple[int, str]] = []
    rows = 0
    for lineno, row in enumerate(reader, start=2):
        if not row or not "".join(row).strip():
            continue
        rows += 1
        try:
            if len(row) != 4:
                raise ValueError(f"expected 4 fields, got {len(row)}")
            domain, source, rating_s, conf_s = row
            source = source.strip().lower()
            if source not in SOURCES:
                raise ValueError(f"unknown source {source!r}")
            rating = _score_field(rating_s, "rating")
            confidence = _score_field(conf_s, "confidence")
            if source == "directory":
                label = 0
            else:
                if rating is None:
                    raise ValueError("cellular rows need a rating")
                label = label_for_rating(rating)
            fi = analyzer.analyze(domain)
        except ValueError as exc:
            skipped.append((lineno, str(exc)))
            continue
        records.append(
            DomainRecord(
                raw=domain.strip(),
                parsed=DomainName(fi.core, fi.tld),
                tokens=tuple(fi.tokens),
                source=source,
                rating=rating,
                confidence=confidence,
                label=label,
            )
        )
    if skipped:
        log.warning("skipped %d of %d rows", len(skipped), rows)
    if rows and len(skipped) / rows > max_skip_rate:
        first = "; ".join(f"line {n}: {msg}" for n, msg in skipped[:5])
        raise IngestError(f"{len(skipped)} of {rows} rows skipped (limit {max_skip_rate:.0%}): {first}")
    return IngestResult(records, skipped)


@dataclass
class ExperimentSplit:
    name: str
    train: list[DomainRecord]
    test: list[DomainRecord]
    seed: int


def _split(records: list[DomainRecord], frac: float, rng: np.random.Generator, stratify: bool):
    if stratify:
        train: list[DomainRecord] = []
        test: list[DomainRecord] = []
        for cls in (0, 1):
            a, b = _split([r for r in records if r.label == cls], frac, rng, False)
            train += a
            test += b
        return train, test
    order = rng.permutation(len(records))
    n_train = int(math.floor(frac * len(records) + 0.5))
    return [records[i] for i in order[:n_train]], [records[i] for i in order[n_train:]]


def build_experiment(
    records: Sequence[DomainRecord],
    name: str,
    seed: int,
    balanced_size: int = 15_000,
    train_fraction: float = 0.8,
    stratify: bool = False,
) -> ExperimentSplit:
    """Build one of the ``balanced``, ``unfiltered`` or ``filtered`` splits.

    ``balanced`` draws ``2 * balanced_size`` malicious cellular records and as
    many directory records, half of each group for training. The other two
    use labelled cellular records (all, or only the confident unambiguous
    ones) split ``train_fraction`` / rest.
    """
    rng = np.random.default_rng(seed)
    cellular = [r for r in records if r.source == "cellular" and r.label is not None]
    if name == "balanced":
        groups = {
            "malicious cellular": [r for r in cellular if r.label == 1],
            "directory": [r for r in records if r.source == "directory"],
        }
        train: list[DomainRecord] = []
        test: list[DomainRecord] = []
        for what, group in groups.items():
            need = 2 * balanced_size
            if len(group) < need:
                raise ValueError(f"balanced split needs {need} {what} records, have {len(group)} (short by {need - len(group)})")
            picked = [group[i] for i in rng.choice(len(group), size=need, replace=False)]
            train += picked[:balanced_size]
            test += picked[balanced_size:]
    elif name in ("unfiltered", "filtered"):
        pool = cellular if name == "unfiltered" else [r for r in cellular if in_filtered_set(r.rating, r.confidence)]
        if len(pool) < 2:
            raise ValueError(f"{name} split needs at least 2 cellular records, have {len(pool)}")
        train, test = _split(pool, train_fraction, rng, stratify)
    else:
        raise ValueError(f"unknown experiment {name!r}; expected one of {EXPERIMENTS}")
    if not train or not test:
        raise ValueError(f"{name} split produced an empty train or test set")
    return ExperimentSplit(name, train, test, seed)


@dataclass(frozen=True)
class ModelSpec:
    id: str
    enabled_sets: tuple[str, ...]
    description: str


MODEL_SPECS: dict[str, ModelSpec] = {
    s.id: s
    for s in (
        ModelSpec("M1", ("basic",), "Basics"),
        ModelSpec("M2", ("chars",), "Characters"),
        ModelSpec("M3", ("tld",), "TLD"),
        ModelSpec("M4", ("loglik",), "Log-likelihood"),
        ModelSpec("M5", ("words",), "Words"),
        ModelSpec("M6", ("basic", "chars", "tld", "loglik"), "M1 + M2 + M3 + M4"),
        ModelSpec("M7", FAMILIES, "M6 + Words"),
    )
}


@dataclass(frozen=True)
class TrainConfig:
    seed: int
    folds: int = 10
    n_lambdas: int = lasso.DEFAULT_N_LAMBDAS
    lambda_ratio: float = lasso.DEFAULT_LAMBDA_RATIO
    tol: float = lasso.DEFAULT_TOL
    max_iter: int = lasso.DEFAULT_MAX_ITER
    min_word_count: int = 1


@dataclass
class TrainedModel:
    model: lasso.LassoModel  # one-standard-error penalty
    best_model: lasso.LassoModel  # highest cross-validated AUC
    feature_space: FeatureSpace
    cv: lasso.CvResult


def train_model(
    records: Sequence[FeatureInput],
    labels: Sequence[int],
    enabled_sets: Iterable[str],
    char_model: CharMarkovModel | None,
    config: TrainConfig,
) -> TrainedModel:
    """Fit features, cross-validate the penalty path and refit on all records."""
    y = np.asarray(labels, dtype=np.float64)
    fs = fit_feature_space(records, enabled_sets, char_model, config.min_word_count)
    X = design_matrix(records, fs, char_model)
    lambdas = lasso.lambda_path(lasso.lambda_max(X, y), config.n_lambdas, config.lambda_ratio)
    cv = lasso.cross_validate(X, y, lambdas, k=config.folds, seed=config.seed, tol=config.tol, max_iter=config.max_iter)
    lam_1se = lasso.select_one_se(cv)
    lam_best = lasso.select_best(cv)
    stop = int(np.flatnonzero(lambdas <= min(lam_1se, lam_best))[0])
    fit = lasso.fit_path(X, y, lambdas[: stop + 1], tol=config.tol, max_iter=config.max_iter, fingerprint=fs.fingerprint)
    by_lam = {m.lam: m for m in fit.models}
    meta = {"seed": config.seed, "folds": config.folds, "lambda_ratio": config.lambda_ratio, "n_lambdas": config.n_lambdas}
    for m in fit.models:
        m.training_meta.update(meta)
    return TrainedModel(by_lam[lam_1se], by_lam[lam_best], fs, cv)


@dataclass(frozen=True)
class MatrixRow:
    id: str
    feature_sets: str
    mcr: float
    auc: float
    n_features: int
    n_nonzero: int
    lambda_1se: float
    mcr_best: float
    auc_best: float
    n_nonzero_best: int
    lambda_best: float
    cv_auc: float


@dataclass
class MatrixReport:
    experiment: str
    seed: int
    n_train: int
    n_test: int
    train_positive_rate: float
    test_positive_rate: float
    threshold: float
    rows: list[MatrixRow]
    models: dict[str, TrainedModel] = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "train_positive_rate": self.train_positive_rate,
            "test_positive_rate": self.test_positive_rate,
            "threshold": self.threshold,
            "rows": [vars(r) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [
            f"experiment: {self.experiment}  seed: {self.seed}",
            f"train: {self.n_train} ({self.train_positive_rate:.3f} malicious)  "
            f"test: {self.n_test} ({self.test_positive_rate:.3f} malicious)",
            "",
            f"{'':4}{'Feature sets':<20}{'MCR':>7}{'AUC':>7}{'# Features':>12}{'# != 0':>8}"
            f"{'MCR*':>8}{'AUC*':>7}{'# != 0*':>9}",
        ]
        for r in self.rows:
            lines.append(
                f"{r.id:<4}{r.feature_sets:<20}{r.mcr:>7.3f}{r.auc:>7.3f}{r.n_features:>12d}{r.n_nonzero:>8d}"
                f"{r.mcr_best:>8.3f}{r.auc_best:>7.3f}{r.n_nonzero_best:>9d}"
            )
        lines += ["", "MCR/AUC: one-standard-error penalty; starred columns: penalty with best CV AUC."]
        return "\n".join(lines) + "\n"


def run_matrix(
    split: ExperimentSplit,
    specs: Sequence[ModelSpec],
    char_model: CharMarkovModel,
    config: TrainConfig,
    threshold: float = 0.5,
) -> MatrixReport:
    """Train every model spec on the split's training set and score its test set."""
    train_in = [r.features for r in split.train]
    test_in = [r.features for r in split.test]
    y_train = np.array([r.label for r in split.train], dtype=np.float64)
    y_test = np.array([r.label for r in split.test], dtype=np.float64)
    rows: list[MatrixRow] = []
    models: dict[str, TrainedModel] = {}
    for spec in specs:
        log.info("fitting %s (%s)", spec.id, ",".join(spec.enabled_sets))
        tm = train_model(train_in, y_train, spec.enabled_sets, char_model, config)
        Xt = design_matrix(test_in, tm.feature_space, char_model)
        p = tm.model.predict_proba(Xt)
        pb = tm.best_model.predict_proba(Xt)
        li = int(np.flatnonzero(tm.cv.lambdas == tm.model.lam)[0])
        rows.append(
            MatrixRow(
                id=spec.id,
                feature_sets=spec.description,
                mcr=mcr(p, y_test, threshold),
                auc=auc(p, y_test),
                n_features=tm.feature_space.column_count,
                n_nonzero=tm.model.nonzero_count,
                lambda_1se=tm.model.lam,
                mcr_best=mcr(pb, y_test, threshold),
                auc_best=auc(pb, y_test),
                n_nonzero_best=tm.best_model.nonzero_count,
                lambda_best=tm.best_model.lam,
                cv_auc=float(tm.cv.mean_auc[li]),
            )
        )
        models[spec.id] = tm
    return MatrixReport(
        experiment=split.name,
        seed=split.seed,
        n_train=len(split.train),
        n_test=len(split.test),
        train_positive_rate=float(y_train.mean()),
        test_positive_rate=float(y_test.mean()),
        threshold=threshold,
        rows=rows,
        models=models,
    )


@dataclass(frozen=True)
class RankedFeature:
    name: str
    column: int
    coefficient: float


def report_coefficients(model: lasso.LassoModel, fs: FeatureSpace, top_n: int | None = None) -> list[RankedFeature]:
    """Nonzero coefficients by name, largest first.

    With ``top_n`` only the ``top_n`` largest positive (malicious-leaning) and
    ``top_n`` most negative (benign-leaning) coefficients are kept.
    """
    if model.feature_fingerprint != fs.fingerprint:
        raise lasso.FingerprintMismatch("model was not trained on this feature space")
    names = fs.feature_names()
    ranked = sorted(
        (RankedFeature(names[j], j, b) for j, b in model.coefficients.items() if b != 0.0),
        key=lambda f: (-f.coefficient, f.column),
    )
    if top_n is None:
        return ranked
    pos = [f for f in ranked if f.coefficient > 0][:top_n]
    neg = [f for f in ranked if f.coefficient < 0][-top_n:] if top_n > 0 else []
    return pos + neg


class HostScorer:
    """Score hostnames one at a time with a trained model.

    Hosts without a valid registrable core score ``nan``. Only features with
    nonzero coefficients are computed (segmentation is skipped entirely when
    no word is in the model), but terms are summed in column order so the
    result equals ``predict_prob(model, vectorize(...))`` exactly.
    """

    def __init__(self, analyzer: DomainAnalyzer, model: lasso.LassoModel, fs: FeatureSpace, char_model: CharMarkovModel | None):
        if model.feature_fingerprint != fs.fingerprint:
            raise lasso.FingerprintMismatch("model was not trained on this feature space")
        if "loglik" in fs.enabled_sets and char_model is None:
            raise FeatureSpaceError("loglik features need a character model")
        self.analyzer = analyzer
        self.model = model
        self.feature_space = fs
        self.char_model = char_model
        coef = model.coefficients
        enabled = fs.enabled_sets
        off = fs.offsets

        def block(start: int, size: int) -> list[float]:
            return [coef.get(start + k, 0.0) for k in range(size)]

        self._basic = None
        if "basic" in enabled:
            n_len = len(fs.char_bin_edges) + 1
            base = off["basic"]
            self._basic = (block(base, n_len), block(base + n_len, 4), block(base + n_len + 4, 4), block(base + n_len + 8, 4))
        self._chars = []
        if "chars" in enabled:
            self._chars = [(c, coef[j]) for c, j in fs.char_columns.items() if coef.get(j, 0.0) != 0.0]
        self._loglik = None
        if "loglik" in enabled:
            n_raw = len(fs.ll_bin_edges) + 2  # bins plus the no-letters bin
            n_norm = len(fs.ll_norm_bin_edges) + 2
            raw = block(off["loglik"], n_raw)
            norm = block(off["loglik"] + n_raw, n_norm)
            if any(raw) or any(norm):
                self._loglik = (raw, norm)
        self._tld = {t: coef[j] for t, j in fs.tld_vocab.items() if coef.get(j, 0.0) != 0.0}
        self._words = {w: (j, coef[j]) for w, j in fs.word_vocab.items() if coef.get(j, 0.0) != 0.0}

    def score(self, host: str) -> float:
        try:
            dn = self.analyzer.parse(host)
            core, tld = dn.core, dn.tld
            tokens = self.analyzer.segmenter.segment_core(core) if self._words else ()
        except ValueError:
            return math.nan
        eta = self.model.intercept
        if self._basic is not None:
            lengths, hyphens, digits, numbers = self._basic
            bc = basic_counts(core)
            eta += lengths[_bin(self.feature_space.char_bin_edges, bc.n_chars)]
            eta += hyphens[_count_bin(bc.n_hyphens)]
            eta += digits[_count_bin(bc.n_digits)]
            eta += numbers[_count_bin(bc.n_numbers)]
        for c, b in self._chars:
            if c in core:
                eta += b
        if self._loglik is not None:
            raw_c, norm_c = self._loglik
            ll = char_loglik(core, self.char_model)
            fs = self.feature_space
            eta += raw_c[-1] if ll.raw is None else raw_c[_bin(fs.ll_bin_edges, ll.raw)]
            eta += norm_c[-1] if ll.normalized is None else norm_c[_bin(fs.ll_norm_bin_edges, ll.normalized)]
        if self._tld:
            eta += self._tld.get(tld, 0.0)
        if tokens:
            hits = sorted({self._words[w] for w in tokens if w in self._words})
            for _, b in hits:
                eta += b
        return lasso.logistic(eta)

    def score_many(self, hosts: Iterable[str]) -> list[float]:
        return [self.score(h) for h in hosts]
