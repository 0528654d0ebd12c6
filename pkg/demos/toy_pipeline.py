"""
The bundled toy corpus, end to end
==================================

Ten nouns, a handful of n-gram lines and per-year totals that are all
powers of two, so every relative frequency below is exact.
"""
from importlib import resources

from denominal import corpus_ingest, features, lexicon, report

toy = resources.files("denominal") / "data" / "toy"

# Load the dated senses and keep the nouns that emerge inside the interval.
senses = lexicon.group_by_word(lexicon.load_lexicon(toy / "lexicon.csv"))
outcomes = lexicon.derive_outcomes(senses, 1500, 2000)
print("cohort (emerged, converted):", lexicon.cohort_counts(outcomes))

# Stream the n-gram lines.  Malformed lines are counted, not fatal.
index = corpus_ingest.ingest_files([str(toy / "ngrams.tsv")], set(senses))
totals = corpus_ingest.load_totals(toy / "totals.tsv")
print("skipped lines:", index.skipped)

# One feature table per recent-frequency window.
tables = {w: features.build_feature_table(index, totals, outcomes, senses, 1500, 2000, w)
          for w in (1, 2, 3)}
for row in tables[1]:
    print(f"{row.word:10s} ref={row.ref_year} len={row.length} acc={row.accum_freq:.6f} "
          f"rec={row.recent_freq:.6f} senses={row.sense_count} d={row.d}")

# Three converted nouns are too few for the models, but correlations and
# t-tests are defined.  Only recent_freq moves with the window.
rep = report.analyze(tables, from_year=1500, to_year=2000)
for block in rep["windows"]:
    corr = block["correlation"]
    print(f"window {block['window']}: r(length, d)={corr['length']['r']:.4f}  "
          f"r(recent, d)={corr['recent_freq']['r']:.4f}")
t = rep["windows"][0]["t_test"]["length"]
print(f"length, converted vs not: t={t['t']:.3f} df={t['df']:.2f} p={t['p']:.4f}")
