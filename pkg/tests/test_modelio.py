import json

import numpy as np
import pytest

from domainlex import lasso
from domainlex.corpus import WordModel, build_char_markov
from domainlex.features import FAMILIES, FeatureInput, design_matrix, fit_feature_space, vectorize
from domainlex.modelio import ModelFileError, load_model, save_model


@pytest.fixture(scope="module")
def trained():
    rng = np.random.default_rng(0)
    cm = build_char_markov(WordModel.from_counts({"payday": 5, "loans": 4, "flowers": 9, "news": 7}))
    words = ["payday", "loans", "flowers", "news", "shop", "cash"]
    recs, y = [], []
    for i in range(300):
        toks = tuple(rng.choice(words, size=2))
        core = "".join(toks) + (str(i) if i % 5 == 0 else "")
        recs.append(FeatureInput(core, ["com", "net"][i % 2], toks))
        y.append(float("payday" in toks or "cash" in toks))
    fs = fit_feature_space(recs, FAMILIES, cm)
    X = design_matrix(recs, fs, cm)
    y = np.array(y)
    lams = lasso.lambda_path(lasso.lambda_max(X, y), 30)
    model = lasso.fit_path(X, y, lams, fingerprint=fs.fingerprint).models[-1]
    return model, fs, cm, recs


def test_round_trip_is_bit_identical(trained, tmp_path):
    model, fs, cm, recs = trained
    path = tmp_path / "m.json"
    save_model(path, model, fs, cm, {"note": "x"})
    m2, fs2, cm2, res = load_model(path)
    assert res == {"note": "x"}
    assert fs2 == fs and m2.coefficients == model.coefficients and m2.intercept == model.intercept
    for r in recs + [FeatureInput("zzz", "org", ("zzz",))]:
        assert lasso.predict_prob(m2, vectorize(r, fs2, cm2)) == lasso.predict_prob(model, vectorize(r, fs, cm))


def test_file_names_coefficients(trained, tmp_path):
    model, fs, cm, _ = trained
    path = tmp_path / "m.json"
    save_model(path, model, fs, cm)
    d = json.loads(path.read_text())
    names = fs.feature_names()
    assert {c["column"]: c["name"] for c in d["model"]["coefficients"]} == {j: names[j] for j in model.coefficients}
    assert d["model"]["fingerprint"] == fs.fingerprint


def test_truncated_file(trained, tmp_path):
    model, fs, cm, _ = trained
    path = tmp_path / "m.json"
    save_model(path, model, fs, cm)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(ModelFileError):
        load_model(path)


def test_version_and_format_checks(trained, tmp_path):
    model, fs, cm, _ = trained
    path = tmp_path / "m.json"
    save_model(path, model, fs, cm)
    d = json.loads(path.read_text())
    path.write_text(json.dumps({**d, "version": 99}))
    with pytest.raises(ModelFileError, match="version"):
        load_model(path)
    path.write_text(json.dumps({**d, "format": "other"}))
    with pytest.raises(ModelFileError):
        load_model(path)
    del d["model"]["intercept"]
    path.write_text(json.dumps(d))
    with pytest.raises(ModelFileError):
        load_model(path)


def test_fingerprint_mismatch(trained, tmp_path):
    model, fs, cm, recs = trained
    other = fit_feature_space(recs[:50], ["basic", "tld"])
    with pytest.raises(lasso.FingerprintMismatch):
        save_model(tmp_path / "m.json", model, other, cm)
    with pytest.raises(lasso.FingerprintMismatch):
        lasso.predict_prob(model, vectorize(recs[0], other))
