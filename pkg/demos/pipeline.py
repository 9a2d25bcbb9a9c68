"""Follow a few hostnames through parsing, segmentation, features and scoring.

Trains a small all-families model on synthetic data first, then prints what
each stage produces for a handful of hosts.
"""

import io

from domainlex import harness, resources, synthetic
from domainlex.analyzer import DomainAnalyzer
from domainlex.features import basic_counts, char_loglik

analyzer = DomainAnalyzer.from_files()
rows = synthetic.generate(resources.default_word_model(), seed=1, config=synthetic.SyntheticConfig(n=3000))
records = harness.ingest(io.StringIO(synthetic.to_csv(rows)), analyzer).records
split = harness.build_experiment(records, "unfiltered", seed=1)
tm = harness.train_model(
    [r.features for r in split.train],
    [r.label for r in split.train],
    harness.MODEL_SPECS["M7"].enabled_sets,
    analyzer.char_model,
    harness.TrainConfig(seed=1, folds=5),
)
scorer = harness.HostScorer(analyzer, tm.model, tm.feature_space, analyzer.char_model)
print(f"trained on {len(split.train)} domains, {tm.model.nonzero_count} of {tm.feature_space.column_count} columns used\n")

for host in ["http://www.cheappaydayloans.co.uk/apply", "duckduckgo.com", "4downs-10yards.com", "mail.google.com"]:
    info = analyzer.analyze(host)
    print(host)
    print(f"  registrable domain : {info.core}.{info.tld}")
    print(f"  tokens             : {' '.join(info.tokens)}")
    print(f"  counts             : {tuple(basic_counts(info.core))}  (chars, hyphens, digits, numbers)")
    ll = char_loglik(info.core, analyzer.char_model)
    if ll.raw is None:
        print("  char log-lik       : no letters")
    else:
        print(f"  char log-lik       : {ll.raw:.2f} total, {ll.normalized:.3f} per letter")
    print(f"  P(malicious)       : {scorer.score(host):.3f}\n")
