"""
Recovering planted effects from synthetic files
===============================================

A plant with shorter and rarer nouns converting more often, and longer
lags for frequent nouns with many senses.  The generator writes the same
file formats as real data, so the whole pipeline runs unchanged.
"""
import tempfile

import numpy as np

from denominal import corpus_ingest, features, lexicon, models, report, synth
from denominal.models import ModelSpec, Target

spec = synth.PlantSpec(n_words=3000, seed=7)
print("planted change weights:", {k: v for k, v in spec.change_weights.items() if v})
print("planted lag weights:   ", {k: v for k, v in spec.d_weights.items() if v})

with tempfile.TemporaryDirectory() as tmp:
    data, paths = synth.generate(spec, tmp)
    senses = lexicon.group_by_word(lexicon.load_lexicon(paths["lexicon"]))
    index = corpus_ingest.ingest_files([paths["ngrams"]], set(senses))
    totals = corpus_ingest.load_totals(paths["totals"])

outcomes = lexicon.derive_outcomes(senses, spec.from_year, spec.to_year)
rows = features.build_feature_table(index, totals, outcomes, senses, spec.from_year, spec.to_year, 1)
print("cohort:", lexicon.cohort_counts(outcomes), "of", len(senses), "lexicon words")

# The files reproduce the generator's own feature table.
expected = data.expected_features(1)
gap = max(abs(a.recent_freq - b.recent_freq) for a, b in zip(rows, expected))
print(f"largest recent_freq gap vs generator: {gap:.1e}")

fits = [models.fit(rows, ModelSpec(Target.CHANGE)), models.fit(rows, ModelSpec(Target.D))]
for fit in fits:
    print(fit.spec.target.value, {f: round(w, 3) for f, w in fit.weights.items()})
check = synth.ground_truth_check(fits, spec)
print("signs recovered:", check["passed"])

# Calibration: mean predicted probability against the observed rate, by decile.
prob = np.array([models.predict(fits[0], r) for r in rows])
y = np.array([r.change for r in rows])
edges = np.quantile(prob, np.linspace(0, 1, 11))
bins = np.clip(np.searchsorted(edges, prob, side="right") - 1, 0, 9)
for b in range(10):
    sel = bins == b
    print(f"decile {b}: predicted {prob[sel].mean():.3f} observed {y[sel].mean():.3f}")

block = report.analyze_window(rows, 1, include_models=False)
print("length t-test p:", f"{block['t_test']['length']['p']:.2e}")
