"""Word features at each noun's reference year.

Four features per noun: letter count, accumulated relative frequency
from the interval start, recent relative frequency over a short window
before the reference year, and the number of noun senses already
attested.  The reference year is the first verb year for converted
nouns and the interval end otherwise; the reference year itself is
never included in any frequency or sense sum.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus_ingest import POS, Index, UndefinedDenominatorError, YearSeries, YearTotals, relative_frequency
from .lexicon import LexemeOutcome, SenseEntry

log = logging.getLogger(__name__)

FEATURE_NAMES = ("length", "accum_freq", "recent_freq", "sense_count")
FEATURE_HEADER = ["word", "ref_year", "length", "accum_freq", "recent_freq", "sense_count", "change", "d"]


@dataclass(frozen=True)
class FeatureVector:
    word: str
    ref_year: int
    length: int
    accum_freq: float
    recent_freq: float
    sense_count: int
    change: int
    d: int | None = None

    def feature(self, name: str) -> float:
        if name not in FEATURE_NAMES:
            raise KeyError(f"unknown feature {name!r}")
        return float(getattr(self, name))


def word_length(word: str) -> int:
    n = sum(1 for ch in word if ch.isalpha())
    if n == 0:
        raise ValueError(f"word {word!r} has no letters")
    return n


def reference_year(outcome: LexemeOutcome, to_year: int) -> int:
    return outcome.verb_first_year if outcome.change else to_year


def _sum_frequency(series: YearSeries, totals: YearTotals, start: int, stop: int) -> float:
    # Sum over the half-open year range [start, stop); only years with
    # occurrences contribute, but zero totals still raise.
    total = 0.0
    for year in sorted(y for y in series.counts if start <= y < stop):
        total += relative_frequency(series, totals, year)
    return total


def accumulated_frequency(series: YearSeries, totals: YearTotals, from_year: int, ref_year: int) -> float:
    if from_year > ref_year:
        raise ValueError(f"from_year {from_year} after ref_year {ref_year}")
    return _sum_frequency(series, totals, from_year, ref_year)


def recent_frequency(series: YearSeries, totals: YearTotals, ref_year: int, window: int) -> float:
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    return _sum_frequency(series, totals, ref_year - window, ref_year)


def sense_count(entries: Iterable[SenseEntry], ref_year: int) -> int:
    return sum(1 for e in entries if e.pos is POS.NOUN and e.start_year < ref_year)


def feature_vector(
    outcome: LexemeOutcome,
    entries: Sequence[SenseEntry],
    series: YearSeries,
    totals: YearTotals,
    from_year: int,
    to_year: int,
    window: int,
) -> FeatureVector:
    ref = reference_year(outcome, to_year)
    return FeatureVector(
        word=outcome.word,
        ref_year=ref,
        length=word_length(outcome.word),
        accum_freq=accumulated_frequency(series, totals, from_year, ref),
        recent_freq=recent_frequency(series, totals, ref, window),
        sense_count=sense_count(entries, ref),
        change=outcome.change,
        d=outcome.d,
    )


def build_feature_table(
    index: Index,
    totals: YearTotals,
    outcomes: Iterable[LexemeOutcome],
    lexicon: Mapping[str, Sequence[SenseEntry]],
    from_year: int,
    to_year: int,
    window: int,
) -> list[FeatureVector]:
    """One vector per outcome, sorted by word.

    Nouns whose series hits a zero corpus total are dropped and counted
    in the log.
    """
    if from_year >= to_year:
        raise ValueError(f"invalid interval [{from_year}, {to_year}]")
    rows = []
    dropped = 0
    for outcome in sorted(outcomes, key=lambda o: o.word):
        series = index.get_series(outcome.word, POS.NOUN)
        try:
            rows.append(feature_vector(outcome, lexicon.get(outcome.word, ()), series, totals, from_year, to_year, window))
        except UndefinedDenominatorError as exc:
            dropped += 1
            log.warning("dropping %s: %s", outcome.word, exc)
    if dropped:
        log.warning("dropped %d nouns with undefined relative frequency", dropped)
    return rows


def format_real(x: float) -> str:
    return format(x, ".17g")


def write_feature_table(rows: Iterable[FeatureVector], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FEATURE_HEADER)
        for r in rows:
            w.writerow([
                r.word, r.ref_year, r.length, format_real(r.accum_freq), format_real(r.recent_freq),
                r.sense_count, r.change, "" if r.d is None else r.d,
            ])


def read_feature_table(path) -> list[FeatureVector]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != FEATURE_HEADER:
            raise ValueError(f"{path}: expected header {','.join(FEATURE_HEADER)}, got {header}")
        rows = []
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            try:
                word, ref, length, acc, rec, senses, change, d = row
                vec = FeatureVector(
                    word=word, ref_year=int(ref), length=int(length), accum_freq=float(acc),
                    recent_freq=float(rec), sense_count=int(senses), change=int(change),
                    d=int(d) if d != "" else None,
                )
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if not (math.isfinite(vec.accum_freq) and math.isfinite(vec.recent_freq)):
                raise ValueError(f"{path}:{lineno}: non-finite frequency")
            if vec.change not in (0, 1) or (vec.change == 1) != (vec.d is not None):
                raise ValueError(f"{path}:{lineno}: inconsistent change/d")
            rows.append(vec)
    return rows

