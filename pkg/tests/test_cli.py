import io
import json
import math

import numpy as np
import pytest

from domainlex import cli

WORDS = ["cheap", "loans", "payday", "shop", "news", "best", "flowers", "duck", "go", "my", "the"]
BAD = {"cheap", "loans", "payday"}


def _ratings(n=120):
    rng = np.random.default_rng(0)
    lines = ["domain,source,rating,confidence"]
    for i in range(n):
        a, b = rng.choice(WORDS, size=2)
        bad = bool(BAD & {a, b}) != (rng.random() < 0.15)
        rating = 20 if bad else 85
        lines.append(f"{a}{b}{i}.com,cellular,{rating},50")
    return "\n".join(lines) + "\n"


@pytest.fixture
def data_file(tmp_path):
    path = tmp_path / "ratings.csv"
    path.write_text(_ratings())
    return str(path)


def _stdin(monkeypatch, text):
    monkeypatch.setattr("sys.stdin", io.StringIO(text))


def test_segment(tiny_resources, monkeypatch, capsys):
    _stdin(monkeypatch, "www.duckgo.com\n\n# comment\npaydayloans.co.uk\nnet\n")
    assert cli.main(["segment", *tiny_resources]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out == ["www.duckgo.com\tduck go", "paydayloans.co.uk\tpayday loans", "net\t"]


def test_featurize_fit_then_reuse(tiny_resources, data_file, tmp_path, capsys):
    space = tmp_path / "space.json"
    assert cli.main(["featurize", *tiny_resources, "--data", data_file, "--space-out", str(space)]) == 0
    first = capsys.readouterr().out
    assert len(first.splitlines()) == 120
    host, cols = first.splitlines()[0].split("\t")
    assert host.endswith(".com") and all(c.endswith(":1") for c in cols.split())
    assert cli.main(["featurize", *tiny_resources, "--data", data_file, "--space", str(space)]) == 0
    assert capsys.readouterr().out == first
    assert json.loads(space.read_text())


def test_featurize_needs_space(tiny_resources, data_file):
    with pytest.raises(SystemExit):
        cli.main(["featurize", *tiny_resources, "--data", data_file])


@pytest.fixture
def model_file(tiny_resources, data_file, tmp_path, capsys):
    path = tmp_path / "model.json"
    args = ["train", *tiny_resources, "--data", data_file, "--model", str(path), "--seed", "1", "--folds", "3", "--n-lambdas", "20"]
    assert cli.main(args) == 0
    assert "trained on 120 records" in capsys.readouterr().err
    return str(path)


def test_train_predict(tiny_resources, model_file, monkeypatch, capsys):
    _stdin(monkeypatch, "cheaploans.com\nnewsflowers.net\ncom\n")
    assert cli.main(["predict", *tiny_resources, "--model", model_file]) == 0
    rows = [ln.split("\t") for ln in capsys.readouterr().out.splitlines()]
    assert [r[0] for r in rows] == ["cheaploans.com", "newsflowers.net", "com"]
    bad, good, junk = (float(r[1]) for r in rows)
    assert bad > good
    assert math.isnan(junk)


def test_evaluate_writes_reports(tiny_resources, model_file, data_file, tmp_path, capsys):
    js, roc = tmp_path / "r.json", tmp_path / "roc.tsv"
    args = ["evaluate", *tiny_resources, "--model", model_file, "--data", data_file, "--json", str(js), "--roc", str(roc)]
    assert cli.main(args) == 0
    out = capsys.readouterr().out
    assert "MCR:" in out and "AUC:" in out
    report = json.loads(js.read_text())
    assert report["records"] == 120 and 0.7 <= report["auc"] <= 1.0
    lines = roc.read_text().splitlines()
    assert lines[0] == "fpr\ttpr" and lines[-1] == "1.0\t1.0"


def test_evaluate_experiment_needs_seed(tiny_resources, model_file, data_file):
    with pytest.raises(SystemExit):
        cli.main(["evaluate", *tiny_resources, "--model", model_file, "--data", data_file, "--experiment", "unfiltered"])


def test_coefficients(model_file, capsys):
    assert cli.main(["coefficients", "--model", model_file, "--top", "0"]) == 0
    lines = capsys.readouterr().out.splitlines()
    values = [float(ln.split("\t")[0]) for ln in lines]
    assert values == sorted(values, reverse=True)
    assert lines and all(v != 0 for v in values)
    assert all(ln.split("\t")[1].split(":")[0] in ("char", "word", "tld", "basic", "loglik") for ln in lines)


def test_experiment(tiny_resources, data_file, tmp_path, capsys):
    js, models = tmp_path / "m.json", tmp_path / "models"
    args = [
        "experiment", *tiny_resources, "--data", data_file, "--experiment", "unfiltered", "--seed", "2",
        "--models", "m1,M7", "--folds", "3", "--n-lambdas", "15", "--json", str(js), "--save-models", str(models),
    ]
    assert cli.main(args) == 0
    text = capsys.readouterr().out
    assert "M1" in text and "M7" in text
    assert sorted(p.name for p in models.iterdir()) == ["M1.json", "M7.json"]
    assert [r["id"] for r in json.loads(js.read_text())["rows"]] == ["M1", "M7"]


def test_experiment_rejects_unknown_model(tiny_resources, data_file):
    with pytest.raises(SystemExit):
        cli.main(["experiment", *tiny_resources, "--data", data_file, "--experiment", "unfiltered", "--seed", "1", "--models", "M9"])


def test_synthetic(tmp_path, capsys):
    assert cli.main(["synthetic", "--seed", "3", "--n", "50"]) == 0
    text = capsys.readouterr().out
    lines = text.splitlines()
    assert lines[0] == "domain,source,rating,confidence" and len(lines) == 51
    out = tmp_path / "s.csv"
    assert cli.main(["synthetic", "--seed", "3", "--n", "50", "--out", str(out)]) == 0
    assert out.read_text() == text


def test_errors_return_one(tiny_resources, tmp_path, capsys):
    assert cli.main(["coefficients", "--model", str(tmp_path / "missing.json")]) == 1
    assert "domainlex: error:" in capsys.readouterr().err
    bad = tmp_path / "bad.csv"
    bad.write_text("host,rating\nx.com,1\n")
    assert cli.main(["train", *tiny_resources, "--data", str(bad), "--model", str(tmp_path / "m.json"), "--seed", "1"]) == 1
