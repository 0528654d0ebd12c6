"""Synthetic lexicons and corpora with planted effects.

The generator is the end-to-end oracle for the pipeline: it writes a
lexicon CSV, an n-gram file and a totals file for a population of
made-up nouns whose conversion labels and lags are drawn from known
logistic and linear models.  Running those files through ingestion,
feature extraction and model fitting should recover the planted signs.

Randomness comes from :class:`SplitMix64`, a counter-based generator
implemented here so that fixtures are byte-identical for a given seed
regardless of numpy version.

Per noun (cohort member):

* a random letter string of length uniform in 3..12;
* emergence year uniform in ``[from_year, to_year - emergence_margin]``;
* a log-normal yearly relative frequency ``level``; each year from
  emergence to ``to_year`` gets ``round(level * total * exp(0.1 * N(0,1)))``
  occurrences, plus a one-off emergence burst (log-normal share) in the
  emergence year, which makes the accumulated frequency mostly
  independent of the yearly level;
* ``1 + Poisson(mean_extra_senses)`` noun senses before the reference
  year (the first one at emergence), plus a few later senses.

The latent predictors are the word length, the burst share, the yearly
level and the sense count, each standardized with its population mean
and standard deviation.  ``change ~ Bernoulli(sigmoid(b0 + w . z))``;
for converted nouns ``d = round(c0 + v . z + noise)`` clipped to
``[min_lag, to_year - emergence]``.  The minimum lag keeps the emergence
burst out of every recent-frequency window.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .features import FEATURE_NAMES, FeatureVector, format_real
from .models import FitResult, Target

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_ALPHABET = np.array(list("abcdefghijklmnopqrstuvwxyz"))

MIN_WORDS = 10
MIN_LAG = 4
LENGTH_RANGE = (3, 12)
LEVEL_LOG_MEAN = math.log(1e-7)
LEVEL_LOG_SD = 0.5
BURST_LOG_MEAN = math.log(3e-2)
BURST_LOG_SD = 0.75
YEAR_NOISE_SD = 0.1
MEAN_EXTRA_SENSES = 2.0
TOTAL_BASE = 200_000_000


class InfeasibleSpecError(ValueError):
    pass


class SplitMix64:
    """Counter-based SplitMix64 stream, vectorized over numpy uint64.

    Draw ``k`` of the stream is ``mix(seed + k * GAMMA)``; ``mix`` is the
    standard SplitMix64 finalizer.  Uniforms use the top 53 bits.
    """

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self, n: int) -> np.ndarray:
        idx = np.arange(1, n + 1, dtype=np.uint64)
        z = np.uint64(self.state) + idx * np.uint64(_GAMMA)
        self.state = (self.state + n * _GAMMA) & MASK64
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    def uniform(self, n: int) -> np.ndarray:
        """Uniform floats in [0, 1)."""
        return (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)

    def integers(self, low: int, high: int, n: int) -> np.ndarray:
        """Integers in the closed range [low, high] (multiply-shift, negligible bias)."""
        span = high - low + 1
        return low + np.floor(self.uniform(n) * span).astype(np.int64)

    def normal(self, n: int) -> np.ndarray:
        # Box-Muller, cosine branch only
        u1 = 1.0 - self.uniform(n)
        u2 = self.uniform(n)
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def poisson(self, lam: float, n: int) -> np.ndarray:
        # Knuth's product method, one uniform per element per round.
        limit = math.exp(-lam)
        k = np.zeros(n, dtype=np.int64)
        prod = self.uniform(n)
        active = prod > limit
        while active.any():
            k[active] += 1
            prod = prod * self.uniform(n)
            active &= prod > limit
        return k


@dataclass
class PlantSpec:
    n_words: int = 2000
    from_year: int = 1800
    to_year: int = 2000
    change_weights: dict = field(default_factory=lambda: {
        "intercept": -1.0, "length": -0.9, "accum_freq": 0.0, "recent_freq": -1.4, "sense_count": 0.0})
    d_weights: dict = field(default_factory=lambda: {
        "intercept": 40.0, "length": 0.0, "accum_freq": 0.0, "recent_freq": 8.0, "sense_count": 12.0})
    noise_std_d: float = 10.0
    seed: int = 0
    emergence_margin: int = 60

    def __post_init__(self):
        if self.n_words < MIN_WORDS:
            raise InfeasibleSpecError(f"n_words must be >= {MIN_WORDS}, got {self.n_words}")
        if not self.from_year < self.to_year:
            raise InfeasibleSpecError(f"invalid interval [{self.from_year}, {self.to_year}]")
        if not self.noise_std_d > 0:
            raise InfeasibleSpecError("noise_std_d must be positive")
        if self.to_year - self.emergence_margin < self.from_year or self.emergence_margin < MIN_LAG + 1:
            raise InfeasibleSpecError("emergence margin does not fit the interval")
        if self.to_year + 50 > 2100:
            raise InfeasibleSpecError("to_year must leave room for post-interval verb senses (<= 2050)")
        for name, w in (("change_weights", self.change_weights), ("d_weights", self.d_weights)):
            unknown = set(w) - set(FEATURE_NAMES) - {"intercept"}
            if unknown:
                raise InfeasibleSpecError(f"{name}: unknown keys {sorted(unknown)}")
        self.change_weights = _complete(self.change_weights)
        self.d_weights = _complete(self.d_weights)
        self.seed = int(self.seed) & MASK64

    @classmethod
    def from_json(cls, path, **overrides) -> "PlantSpec":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**doc)

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _complete(weights: dict) -> dict:
    out = {"intercept": 0.0}
    out.update({f: 0.0 for f in FEATURE_NAMES})
    out.update({k: float(v) for k, v in weights.items()})
    return out


def _lognormal_moments(log_mean: float, log_sd: float) -> tuple[float, float]:
    m = math.exp(log_mean + log_sd ** 2 / 2)
    return m, m * math.sqrt(math.exp(log_sd ** 2) - 1)


# Population (mean, std) of each latent predictor.
LATENT_MOMENTS = {
    "length": ((LENGTH_RANGE[0] + LENGTH_RANGE[1]) / 2,
               math.sqrt(((LENGTH_RANGE[1] - LENGTH_RANGE[0] + 1) ** 2 - 1) / 12)),
    "accum_freq": _lognormal_moments(BURST_LOG_MEAN, BURST_LOG_SD),
    "recent_freq": _lognormal_moments(LEVEL_LOG_MEAN, LEVEL_LOG_SD),
    "sense_count": (1.0 + MEAN_EXTRA_SENSES, math.sqrt(MEAN_EXTRA_SENSES)),
}


def _linear(weights: dict, z: dict) -> np.ndarray:
    return weights["intercept"] + sum(weights[f] * z[f] for f in FEATURE_NAMES)


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -eta))


def _unique_words(rng: SplitMix64, lengths: np.ndarray) -> list[str]:
    seen: set[str] = set()
    words = []
    for L in lengths:
        while True:
            word = "".join(_ALPHABET[rng.integers(0, 25, int(L))])
            if word not in seen:
                seen.add(word)
                words.append(word)
                break
    return words


def planted_rows(n: int, change_weights: dict, d_weights: dict | None = None,
                 noise_std_d: float = 10.0, seed: int = 0) -> tuple[list[FeatureVector], np.ndarray]:
    """Feature rows drawn directly from the latent distributions.

    Returns the rows and the true conversion probabilities.  Bypasses the
    file formats; used to test the models in isolation.
    """
    cw = _complete(change_weights)
    dw = _complete(d_weights or {"intercept": 40.0})
    rng = SplitMix64(seed)
    length = rng.integers(*LENGTH_RANGE, n)
    accum = np.exp(BURST_LOG_MEAN + BURST_LOG_SD * rng.normal(n))
    recent = np.exp(LEVEL_LOG_MEAN + LEVEL_LOG_SD * rng.normal(n))
    senses = 1 + rng.poisson(MEAN_EXTRA_SENSES, n)
    raw = {"length": length, "accum_freq": accum, "recent_freq": recent, "sense_count": senses}
    z = {f: (raw[f] - LATENT_MOMENTS[f][0]) / LATENT_MOMENTS[f][1] for f in FEATURE_NAMES}
    prob = _sigmoid(_linear(cw, z))
    change = (rng.uniform(n) < prob).astype(int)
    lag = np.maximum(0, np.rint(_linear(dw, z) + noise_std_d * rng.normal(n))).astype(int)
    rows = [
        FeatureVector(word=f"w{i:06d}", ref_year=2000, length=int(length[i]), accum_freq=float(accum[i]),
                      recent_freq=float(recent[i]), sense_count=int(senses[i]), change=int(change[i]),
                      d=int(lag[i]) if change[i] else None)
        for i in range(n)
    ]
    return rows, prob


@dataclass
class SynthData:
    spec: PlantSpec
    words: list[str]
    emergence: np.ndarray
    change: np.ndarray
    d: np.ndarray
    true_prob: np.ndarray
    years: np.ndarray
    totals: np.ndarray
    counts: np.ndarray  # word x year noun occurrences
    senses: list[list[tuple[str, int]]]
    clipped_fraction: float

    def ref_years(self) -> np.ndarray:
        return np.where(self.change == 1, self.emergence + self.d, self.spec.to_year)

    def expected_features(self, window: int) -> list[FeatureVector]:
        """The generator's own feature table, computed from its counts."""
        rel = self.counts / self.totals[None, :]
        refs = self.ref_years()
        y0 = self.years[0]
        rows = []
        for i, word in enumerate(self.words):
            ref = int(refs[i])
            r = rel[i]
            acc = float(math.fsum(r[self.spec.from_year - y0: ref - y0]))
            rec = float(math.fsum(r[max(ref - window, self.spec.from_year) - y0: ref - y0]))
            n_senses = sum(1 for pos, y in self.senses[i] if pos == "noun" and y < ref)
            rows.append(FeatureVector(
                word=word, ref_year=ref, length=sum(ch.isalpha() for ch in word), accum_freq=acc,
                recent_freq=rec, sense_count=n_senses, change=int(self.change[i]),
                d=int(self.d[i]) if self.change[i] else None,
            ))
        return sorted(rows, key=lambda v: v.word)


def simulate(spec: PlantSpec) -> SynthData:
    rng = SplitMix64(spec.seed)
    n = spec.n_words
    lo, hi = spec.from_year, spec.to_year
    lengths = rng.integers(*LENGTH_RANGE, n)
    words = _unique_words(rng, lengths)
    emergence = rng.integers(lo, hi - spec.emergence_margin, n)
    level = np.exp(LEVEL_LOG_MEAN + LEVEL_LOG_SD * rng.normal(n))
    burst = np.exp(BURST_LOG_MEAN + BURST_LOG_SD * rng.normal(n))
    n_senses = 1 + rng.poisson(MEAN_EXTRA_SENSES, n)
    raw = {"length": lengths, "accum_freq": burst, "recent_freq": level, "sense_count": n_senses}
    z = {f: (raw[f] - LATENT_MOMENTS[f][0]) / LATENT_MOMENTS[f][1] for f in FEATURE_NAMES}

    true_prob = _sigmoid(_linear(spec.change_weights, z))
    change = (rng.uniform(n) < true_prob).astype(np.int64)
    lag_draw = np.rint(_linear(spec.d_weights, z) + spec.noise_std_d * rng.normal(n)).astype(np.int64)
    max_lag = hi - emergence
    clipped = (lag_draw < MIN_LAG) | (lag_draw > max_lag)
    n_changed = int(change.sum())
    clipped_fraction = float(clipped[change == 1].sum() / n_changed) if n_changed else 0.0
    if clipped_fraction > 0.5:
        raise InfeasibleSpecError(
            f"{clipped_fraction:.0%} of sampled lags fall outside [{MIN_LAG}, to_year - emergence]")
    d = np.where(change == 1, np.clip(lag_draw, MIN_LAG, max_lag), 0)

    years = np.arange(lo, hi + 1)
    totals = np.rint(TOTAL_BASE * (1.0 + (years - lo) / 50.0)).astype(np.int64)
    noise = np.exp(YEAR_NOISE_SD * rng.normal(n * len(years))).reshape(n, len(years))
    counts = np.rint(level[:, None] * totals[None, :] * noise).astype(np.int64)
    counts[years[None, :] < emergence[:, None]] = 0
    burst_idx = emergence - lo
    counts[np.arange(n), burst_idx] += np.rint(burst * totals[burst_idx]).astype(np.int64)

    refs = np.where(change == 1, emergence + d, hi)
    extra_before = rng.uniform(int((n_senses - 1).sum()))
    later = rng.poisson(1.0, n)
    later_u = rng.uniform(int(later.sum()))
    post_verb = rng.uniform(n)
    post_year = rng.integers(hi + 1, hi + 50, n)
    senses: list[list[tuple[str, int]]] = []
    a = b = 0
    for i in range(n):
        e, ref = int(emergence[i]), int(refs[i])
        entries = [("noun", e)]
        k = int(n_senses[i]) - 1
        # senses strictly between emergence and the reference year
        for u in extra_before[a:a + k]:
            entries.append(("noun", e + 1 + int(u * (ref - e - 1))))
        a += k
        m = int(later[i])
        for u in later_u[b:b + m]:
            entries.append(("noun", ref + int(u * (hi - ref + 1))))
        b += m
        if change[i]:
            entries.append(("verb", ref))
        elif post_verb[i] < 0.3:
            entries.append(("verb", int(post_year[i])))
        senses.append(entries)

    return SynthData(spec, words, emergence, change, d, true_prob, years, totals, counts, senses,
                     clipped_fraction)


def _distractors(spec: PlantSpec, rng: SplitMix64, taken: set[str]) -> list[list[tuple[str, str, int]]]:
    # Words that must fall out of the cohort: too old, or verb before noun.
    n = max(1, spec.n_words // 20)
    out = []
    old = rng.integers(1000, spec.from_year - 1, n) if spec.from_year > 1001 else np.full(n, spec.from_year)
    kinds = rng.uniform(n)
    lengths = rng.integers(*LENGTH_RANGE, n)
    for i in range(n):
        while True:
            word = "".join(_ALPHABET[rng.integers(0, 25, int(lengths[i]))])
            if word not in taken:
                taken.add(word)
                break
        if kinds[i] < 0.5 and spec.from_year > 1001:
            out.append([(word, "noun", int(old[i]))])
        else:
            noun = spec.from_year + 10
            out.append([(word, "verb", noun - 5), (word, "noun", noun)])
    return out


LEXICON_FILE = "lexicon.csv"
NGRAM_FILE = "ngrams.tsv"
TOTALS_FILE = "totals.tsv"
TRUTH_FILE = "truth.csv"
SPEC_FILE = "plant.json"


def write_fixture(data: SynthData, out_dir) -> dict[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    spec = data.spec
    paths = {name: os.path.join(out_dir, fname) for name, fname in
             (("lexicon", LEXICON_FILE), ("ngrams", NGRAM_FILE), ("totals", TOTALS_FILE),
              ("truth", TRUTH_FILE), ("spec", SPEC_FILE))}
    rng = SplitMix64(spec.seed ^ 0xD1B54A32D192ED03)
    distractors = _distractors(spec, rng, set(data.words))

    with open(paths["lexicon"], "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["word", "pos", "start_year"])
        for word, entries in zip(data.words, data.senses):
            for pos, year in entries:
                w.writerow([word, pos, year])
        for entries in distractors:
            for row in entries:
                w.writerow(row)

    years = [str(y) for y in data.years]
    with open(paths["ngrams"], "w", encoding="utf-8", newline="\n") as fh:
        refs = data.ref_years()
        for i, word in enumerate(data.words):
            tok = word + "_NOUN"
            row = data.counts[i]
            start = int(data.emergence[i]) - spec.from_year
            fh.writelines(f"{tok}\t{years[j]}\t{row[j]}\t{max(1, row[j] // 7)}\n"
                          for j in range(start, len(years)))
            if data.change[i]:
                fh.write(f"{word}_VERB\t{refs[i]}\t{max(1, row[refs[i] - spec.from_year] // 20)}\t1\n")
        for entries in distractors:
            word, _, year = entries[-1]
            fh.write(f"{word}_NOUN\t{max(year, spec.from_year)}\t{1000}\t10\n")

    with open(paths["totals"], "w", encoding="utf-8", newline="\n") as fh:
        for y, t in zip(data.years, data.totals):
            fh.write(f"{y}\t{t}\t{t // 300}\t{t // 90000}\n")

    with open(paths["truth"], "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["word", "true_change_prob", "change", "d"])
        for i in np.argsort(np.array(data.words), kind="stable"):
            w.writerow([data.words[i], format_real(float(data.true_prob[i])), int(data.change[i]),
                        int(data.d[i]) if data.change[i] else ""])

    spec.to_json(paths["spec"])
    return paths


def generate(spec: PlantSpec, out_dir) -> tuple[SynthData, dict[str, str]]:
    """Simulate a population and write its fixture files into ``out_dir``."""
    data = simulate(spec)
    return data, write_fixture(data, out_dir)


def ground_truth_check(recovered: list[FitResult], truth: PlantSpec, *,
                       tolerance: float | None = None, sign_threshold: float = 0.5) -> dict:
    """Compare fitted weights with the planted ones.

    A model passes when every planted weight with ``|w| >= sign_threshold``
    is recovered with the same sign and, if ``tolerance`` is given, every
    weight lies within ``tolerance`` of its planted value.
    """
    models = []
    all_ok = True
    for fit in recovered:
        planted = truth.d_weights if fit.spec.target is Target.D else truth.change_weights
        entry = {"target": fit.spec.target.value, "features": list(fit.spec.included), "weights": {}}
        missing = [f for f in fit.spec.included if f not in fit.weights]
        extra = [f for f in fit.weights if f not in fit.spec.included]
        if missing or extra or set(fit.spec.included) - set(planted):
            entry["status"] = "structural_error"
            entry["detail"] = f"mask/weights mismatch: missing={missing} extra={extra}"
            all_ok = False
            models.append(entry)
            continue
        ok = True
        for f in fit.spec.included:
            true_w, est = planted[f], fit.weights[f]
            dev = abs(est - true_w)
            sign_req = abs(true_w) >= sign_threshold
            sign_ok = (not sign_req) or (math.copysign(1.0, est) == math.copysign(1.0, true_w))
            within = tolerance is None or dev <= tolerance
            entry["weights"][f] = {"true": true_w, "estimate": est, "abs_deviation": dev,
                                   "sign_checked": sign_req, "sign_ok": sign_ok, "within_tolerance": within}
            ok &= sign_ok and within
        entry["status"] = "pass" if ok else "fail"
        all_ok &= ok
        models.append(entry)
    return {"passed": all_ok, "tolerance": tolerance, "sign_threshold": sign_threshold, "models": models}
