"""Does the lasso find the words the synthetic generator planted?

Runs the M6 (no words) and M7 (with words) models on synthetic data and
lists the strongest coefficients of M7 next to the planted vocabulary.
"""

import io

from domainlex import harness, resources, synthetic
from domainlex.analyzer import DomainAnalyzer

analyzer = DomainAnalyzer.from_files()
rows = synthetic.generate(resources.default_word_model(), seed=7, config=synthetic.SyntheticConfig(n=6000))
records = harness.ingest(io.StringIO(synthetic.to_csv(rows)), analyzer).records
split = harness.build_experiment(records, "unfiltered", seed=7)
specs = [harness.MODEL_SPECS["M6"], harness.MODEL_SPECS["M7"]]
report = harness.run_matrix(split, specs, analyzer.char_model, harness.TrainConfig(seed=7, folds=5))
print(report.to_text())

m7 = report.models["M7"]
top = [f for f in harness.report_coefficients(m7.model, m7.feature_space, top_n=25) if f.coefficient > 0]
planted = set(synthetic.PLANTED_WORDS)
print("strongest positive coefficients of M7 (* = planted):")
for f in top:
    mark = "*" if f.name.startswith("word:") and f.name[5:] in planted else " "
    print(f"  {mark} {f.coefficient:+.3f}  {f.name}")
found = sum(f"word:{w}" in {f.name for f in top} for w in planted)
print(f"\n{found} of {len(planted)} planted words are among the top {len(top)}")
