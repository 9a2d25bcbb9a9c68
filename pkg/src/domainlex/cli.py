"""Command-line interface, installed as ``domainlex``.

Every command that needs the suffix list or the word corpora accepts
``--psl``, ``--unigrams`` and ``--bigrams``; the bundled copies are used
otherwise. Commands that shuffle or sample take a mandatory ``--seed``.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from collections.abc import Iterable, Iterator
from pathlib import Path
from typing import TextIO

import numpy as np

from . import harness, lasso, modelio, resources, synthetic
from .analyzer import DomainAnalyzer
from .features import FAMILIES, FeatureSpace, FeatureSpaceError, design_matrix, fit_feature_space, vectorize
from .metrics import auc, mcr, roc_curve

log = logging.getLogger("domainlex")


def _feature_sets(text: str) -> tuple[str, ...]:
    names = [t.strip().lower() for t in text.split(",") if t.strip()]
    unknown = sorted(set(names) - set(FAMILIES))
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"feature sets must be a comma list of {','.join(FAMILIES)}; got {text!r}")
    return tuple(f for f in FAMILIES if f in names)


def _model_ids(text: str) -> list[harness.ModelSpec]:
    ids = [t.strip().upper() for t in text.split(",") if t.strip()]
    bad = [i for i in ids if i not in harness.MODEL_SPECS]
    if bad or not ids:
        raise argparse.ArgumentTypeError(f"unknown model ids {bad}; choose from {','.join(harness.MODEL_SPECS)}")
    return [harness.MODEL_SPECS[i] for i in ids]


def _positive_fraction(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("must be strictly between 0 and 1")
    return value


@contextlib.contextmanager
def _open_in(path: str) -> Iterator[TextIO]:
    if path == "-":
        yield sys.stdin
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            yield fh


@contextlib.contextmanager
def _open_out(path: str) -> Iterator[TextIO]:
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _hosts(stream: Iterable[str]) -> Iterator[str]:
    for line in stream:
        host = line.strip()
        if host and not host.startswith("#"):
            yield host


def _analyzer(args) -> DomainAnalyzer:
    return DomainAnalyzer.from_files(
        psl=args.psl,
        unigrams=args.unigrams,
        bigrams=args.bigrams,
        include_private=not args.icann_only,
        top_k=args.top_k,
        max_token_len=args.max_token_len,
    )


def _ingest(args, analyzer: DomainAnalyzer) -> list[harness.DomainRecord]:
    with _open_in(args.data) as fh:
        result = harness.ingest(fh, analyzer)
    for lineno, msg in result.skipped[:10]:
        log.warning("line %d skipped: %s", lineno, msg)
    return result.records


def _train_config(args) -> harness.TrainConfig:
    return harness.TrainConfig(
        seed=args.seed,
        folds=args.folds,
        n_lambdas=args.n_lambdas,
        lambda_ratio=args.lambda_ratio,
        min_word_count=args.min_word_count,
    )


def _labelled(args, records: list[harness.DomainRecord], part: str) -> list[harness.DomainRecord]:
    """All labelled records, or one side of an experiment split when ``--experiment`` is given."""
    if args.experiment is None:
        return [r for r in records if r.label is not None]
    split = harness.build_experiment(records, args.experiment, args.seed, args.balanced_size, stratify=args.stratify)
    return split.train if part == "train" else split.test


# -- commands ---------------------------------------------------------------


def cmd_segment(args) -> int:
    analyzer = _analyzer(args)
    out = sys.stdout
    for host in _hosts(sys.stdin):
        try:
            tokens = analyzer.analyze(host).tokens
        except ValueError as exc:
            log.warning("%s: %s", host, exc)
            tokens = ()
        out.write(f"{host}\t{' '.join(tokens)}\n")
    return 0


def cmd_featurize(args) -> int:
    analyzer = _analyzer(args)
    records = _ingest(args, analyzer)
    inputs = [r.features for r in records]
    if args.space:
        fs = FeatureSpace.from_dict(json.loads(Path(args.space).read_text(encoding="utf-8")))
    else:
        fs = fit_feature_space(inputs, args.feature_sets, analyzer.char_model, args.min_word_count)
        Path(args.space_out).write_text(json.dumps(fs.to_dict(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
    with _open_out(args.out) as out:
        for rec, inp in zip(records, inputs):
            vec = vectorize(inp, fs, analyzer.char_model)
            out.write(f"{rec.raw}\t{' '.join(f'{j}:1' for j in vec.indices)}\n")
    log.info("%d records, %d columns", len(records), fs.column_count)
    return 0


def cmd_train(args) -> int:
    analyzer = _analyzer(args)
    train = _labelled(args, _ingest(args, analyzer), "train")
    tm = harness.train_model(
        [r.features for r in train], [r.label for r in train], args.feature_sets, analyzer.char_model, _train_config(args)
    )
    model = tm.model if args.select == "one-se" else tm.best_model
    model.training_meta["selection"] = args.select
    modelio.save_model(args.model, model, tm.feature_space, analyzer.char_model, analyzer.resource_info())
    li = int(np.flatnonzero(tm.cv.lambdas == model.lam)[0])
    print(
        f"trained on {len(train)} records: {tm.feature_space.column_count} features, "
        f"{model.nonzero_count} nonzero, lambda={model.lam:.6g}, cv auc={tm.cv.mean_auc[li]:.4f}",
        file=sys.stderr,
    )
    return 0


def _load(args):
    model, fs, char_model, res = modelio.load_model(args.model)
    analyzer = _analyzer(args)
    current = analyzer.resource_info()
    for key in sorted(set(res) & set(current)):
        if res[key] != current[key]:
            log.warning("model was trained with %s=%r, now using %r", key, res[key], current[key])
    return model, fs, char_model, analyzer


def predict_stream(scorer: harness.HostScorer, hosts: Iterable[str], out: TextIO) -> int:
    """Write ``host<TAB>probability`` for each host; returns the number scored."""
    n = 0
    write = out.write
    score = scorer.score
    for host in hosts:
        write(f"{host}\t{score(host)!r}\n")
        n += 1
    return n


def cmd_predict(args) -> int:
    model, fs, char_model, analyzer = _load(args)
    scorer = harness.HostScorer(analyzer, model, fs, char_model)
    predict_stream(scorer, _hosts(sys.stdin), sys.stdout)
    return 0


def cmd_evaluate(args) -> int:
    model, fs, char_model, analyzer = _load(args)
    records = _labelled(args, _ingest(args, analyzer), "test")
    y = np.array([r.label for r in records], dtype=np.float64)
    X = design_matrix([r.features for r in records], fs, char_model)
    p = model.predict_proba(X)
    report = {
        "records": len(records),
        "positives": int(y.sum()),
        "threshold": args.threshold,
        "mcr": mcr(p, y, args.threshold),
        "auc": auc(p, y),
        "lambda": model.lam,
        "nonzero": model.nonzero_count,
    }
    if args.experiment is not None:
        report["experiment"] = args.experiment
        report["seed"] = args.seed
    print(
        f"records: {report['records']} ({report['positives']} malicious)\n"
        f"threshold: {args.threshold:g}\nMCR: {report['mcr']:.4f}\nAUC: {report['auc']:.4f}"
    )
    if args.json:
        Path(args.json).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if args.roc:
        curve = roc_curve(p, y)
        lines = ["fpr\ttpr"] + [f"{a!r}\t{b!r}" for a, b in zip(curve.fpr.tolist(), curve.tpr.tolist())]
        Path(args.roc).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def cmd_experiment(args) -> int:
    analyzer = _analyzer(args)
    records = _ingest(args, analyzer)
    split = harness.build_experiment(records, args.experiment, args.seed, args.balanced_size, stratify=args.stratify)
    report = harness.run_matrix(split, args.models, analyzer.char_model, _train_config(args), args.threshold)
    with _open_out(args.out) as out:
        out.write(report.to_text())
    if args.json:
        Path(args.json).write_text(report.to_json(), encoding="utf-8")
    if args.save_models:
        folder = Path(args.save_models)
        folder.mkdir(parents=True, exist_ok=True)
        for mid, tm in report.models.items():
            modelio.save_model(folder / f"{mid}.json", tm.model, tm.feature_space, analyzer.char_model, analyzer.resource_info())
    return 0


def cmd_coefficients(args) -> int:
    model, fs, _, _ = modelio.load_model(args.model)
    top = None if args.top <= 0 else args.top
    for f in harness.report_coefficients(model, fs, top):
        print(f"{f.coefficient:+.6g}\t{f.name}")
    return 0


def cmd_synthetic(args) -> int:
    wm = resources.load_word_model(args.unigrams, args.top_k)
    rows = synthetic.generate(wm, args.seed, synthetic.SyntheticConfig(n=args.n))
    with _open_out(args.out) as out:
        out.write(synthetic.to_csv(rows))
    return 0


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="domainlex", description="Lexical malicious-domain classifier.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    res = argparse.ArgumentParser(add_help=False)
    g = res.add_argument_group("resources")
    g.add_argument("--psl", help="public suffix list file (default: bundled copy)")
    g.add_argument("--unigrams", help="word<TAB>count file, optionally gzipped (default: bundled)")
    g.add_argument("--bigrams", help="'w1 w2<TAB>count' file, optionally gzipped (default: bundled)")
    g.add_argument("--icann-only", action="store_true", help="ignore the private section of the suffix list")
    g.add_argument("--top-k", type=int, default=resources.DEFAULT_TOP_K, help="most frequent words kept (default %(default)s)")
    g.add_argument("--max-token-len", type=int, default=20, help="longest segmented token (default %(default)s)")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", default="-", help="ratings CSV with header domain,source,rating,confidence (default stdin)")

    fit = argparse.ArgumentParser(add_help=False)
    g = fit.add_argument_group("training")
    g.add_argument("--folds", type=int, default=10, help="cross-validation folds (default %(default)s)")
    g.add_argument("--lambda-ratio", type=_positive_fraction, default=lasso.DEFAULT_LAMBDA_RATIO,
                   help="smallest/largest penalty on the path (default %(default)s)")
    g.add_argument("--n-lambdas", type=int, default=lasso.DEFAULT_N_LAMBDAS, help="penalties on the path (default %(default)s)")
    g.add_argument("--min-word-count", type=int, default=1, help="drop words seen fewer times in training")

    split = argparse.ArgumentParser(add_help=False)
    g = split.add_argument_group("experiment split")
    g.add_argument("--balanced-size", type=int, default=15_000, help="B for the balanced experiment (default %(default)s)")
    g.add_argument("--stratify", action="store_true", help="stratify 80/20 splits by label")

    fsets = argparse.ArgumentParser(add_help=False)
    fsets.add_argument("--feature-sets", type=_feature_sets, default=FAMILIES,
                       help=f"comma list of {','.join(FAMILIES)} (default: all)")

    p = sub.add_parser("segment", parents=[res], help="hostnames on stdin -> host<TAB>tokens")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("featurize", parents=[res, data, fsets], help="ratings CSV -> host<TAB>idx:1 ... lines")
    p.add_argument("--space", help="reuse this feature-space file instead of fitting one")
    p.add_argument("--space-out", help="where to write the fitted feature space (JSON)")
    p.add_argument("--min-word-count", type=int, default=1)
    p.add_argument("--out", default="-", help="output file (default stdout)")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", parents=[res, data, fsets, fit, split], help="fit a model and write it to a file")
    p.add_argument("--model", required=True, help="output model file")
    p.add_argument("--seed", type=int, required=True, help="seed for folds and splits")
    p.add_argument("--experiment", choices=harness.EXPERIMENTS, help="train on this experiment's training part only")
    p.add_argument("--select", choices=("one-se", "best"), default="one-se", help="penalty selection rule")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[res], help="hostnames on stdin -> host<TAB>probability")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", parents=[res, data, split], help="MCR, AUC and ROC points on labelled data")
    p.add_argument("--model", required=True)
    p.add_argument("--threshold", type=float, default=0.5, help="probability cut for MCR (default %(default)s)")
    p.add_argument("--experiment", choices=harness.EXPERIMENTS, help="evaluate on this experiment's test part only")
    p.add_argument("--seed", type=int, help="split seed (required with --experiment)")
    p.add_argument("--json", help="also write the report as JSON")
    p.add_argument("--roc", help="write fpr<TAB>tpr points here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", parents=[res, data, fit, split], help="train and score the M1-M7 model matrix")
    p.add_argument("--experiment", choices=harness.EXPERIMENTS, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--models", type=_model_ids, default=list(harness.MODEL_SPECS.values()), help="comma list of model ids (default all)")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", default="-", help="text report destination (default stdout)")
    p.add_argument("--json", help="also write the report as JSON")
    p.add_argument("--save-models", metavar="DIR", help="write each fitted model to DIR/<id>.json")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("coefficients", help="nonzero coefficients of a model, most malicious first")
    p.add_argument("--model", required=True)
    p.add_argument("--top", type=int, default=50, help="keep this many from each end; 0 for all (default %(default)s)")
    p.set_defaults(func=cmd_coefficients)

    p = sub.add_parser("synthetic", help="write a synthetic ratings CSV with planted malicious words")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--unigrams")
    p.add_argument("--top-k", type=int, default=resources.DEFAULT_TOP_K)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_synthetic)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(name)s: %(levelname)s: %(message)s", stream=sys.stderr
    )
    if args.command == "featurize" and not (args.space or args.space_out):
        parser.error("featurize needs --space or --space-out")
    if args.command == "evaluate" and args.experiment is not None and args.seed is None:
        parser.error("--experiment needs --seed")
    try:
        return args.func(args)
    except (ValueError, OSError, FeatureSpaceError, lasso.ConvergenceError) as exc:
        print(f"domainlex: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
