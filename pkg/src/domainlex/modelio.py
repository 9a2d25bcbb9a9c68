"""Versioned JSON model files.

A model file bundles everything needed to score hostnames: the lasso model,
its feature space, and the character model used for log-likelihood bins.
"""

from __future__ import annotations

import json
from pathlib import Path

from .corpus import ALPHABET, CharMarkovModel
from .features import FeatureSpace, FeatureSpaceError
from .lasso import FingerprintMismatch, LassoModel

__all__ = ["MODEL_FORMAT", "MODEL_VERSION", "ModelFileError", "model_to_dict", "model_from_dict", "save_model", "load_model"]

MODEL_FORMAT = "domainlex-model"
MODEL_VERSION = 1


class ModelFileError(ValueError):
    pass


def _char_model_to_dict(cm: CharMarkovModel) -> dict:
    return {
        "alphabet": cm.alphabet,
        "first": [cm.first_char_logprob[a] for a in cm.alphabet],
        "transition": [[cm.transition_logprob[(a, b)] for b in cm.alphabet] for a in cm.alphabet],
    }


def _char_model_from_dict(d: dict) -> CharMarkovModel:
    alpha = d["alphabet"]
    if alpha != ALPHABET:
        raise ModelFileError(f"unexpected character alphabet {alpha!r}")
    first = dict(zip(alpha, d["first"]))
    trans = {(a, b): v for a, row in zip(alpha, d["transition"]) for b, v in zip(alpha, row)}
    return CharMarkovModel(first, trans, alpha)


def model_to_dict(model: LassoModel, fs: FeatureSpace, char_model: CharMarkovModel | None, resources: dict | None = None) -> dict:
    if model.feature_fingerprint != fs.fingerprint:
        raise FingerprintMismatch("model was not trained on this feature space")
    names = fs.feature_names()
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "model": {
            "intercept": model.intercept,
            "lambda": model.lam,
            "n_features": model.n_features,
            "fingerprint": model.feature_fingerprint,
            "coefficients": [
                {"column": j, "name": names[j], "value": b} for j, b in sorted(model.coefficients.items())
            ],
            "training_meta": model.training_meta,
        },
        "feature_space": fs.to_dict(),
        "char_model": None if char_model is None else _char_model_to_dict(char_model),
        "resources": resources or {},
    }


def model_from_dict(d: dict) -> tuple[LassoModel, FeatureSpace, CharMarkovModel | None, dict]:
    if not isinstance(d, dict) or d.get("format") != MODEL_FORMAT:
        raise ModelFileError("not a model file")
    if d.get("version") != MODEL_VERSION:
        raise ModelFileError(f"unsupported model file version {d.get('version')!r} (expected {MODEL_VERSION})")
    try:
        fs = FeatureSpace.from_dict(d["feature_space"])
        m = d["model"]
        model = LassoModel(
            intercept=float(m["intercept"]),
            coefficients={int(c["column"]): float(c["value"]) for c in m["coefficients"]},
            lam=float(m["lambda"]),
            n_features=int(m["n_features"]),
            feature_fingerprint=m["fingerprint"],
            training_meta=dict(m.get("training_meta", {})),
        )
        cm = None if d.get("char_model") is None else _char_model_from_dict(d["char_model"])
    except (KeyError, TypeError, ValueError, FeatureSpaceError) as exc:
        raise ModelFileError(f"corrupted model file: {exc}") from exc
    if model.feature_fingerprint != fs.fingerprint:
        raise FingerprintMismatch("model fingerprint does not match its feature space")
    if model.n_features != fs.column_count or any(not 0 <= j < fs.column_count for j in model.coefficients):
        raise ModelFileError("coefficient columns do not fit the feature space")
    return model, fs, cm, dict(d.get("resources", {}))


def save_model(path: str | Path, model: LassoModel, fs: FeatureSpace, char_model: CharMarkovModel | None = None, resources: dict | None = None) -> None:
    text = json.dumps(model_to_dict(model, fs, char_model, resources), indent=1, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_model(path: str | Path) -> tuple[LassoModel, FeatureSpace, CharMarkovModel | None, dict]:
    """Read a model file; returns ``(model, feature_space, char_model, resources)``."""
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"corrupted model file {path}: {exc}") from exc
    return model_from_dict(d)
