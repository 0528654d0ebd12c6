"""Streaming ingestion of POS-tagged 1-gram frequency files.

Input lines look like ``mop_NOUN<TAB>1990<TAB>5<TAB>3`` (token with a POS
suffix, year, match count, volume count).  Only words from a supplied
vocabulary are kept, so memory grows with the vocabulary and the number
of distinct years, never with the number of input lines.

The serialized index is a flat ``word<TAB>pos<TAB>year<TAB>count`` file
sorted by (word, pos, year).  Yearly corpus totals travel in the same
file under the reserved word ``*`` with pos ``TOTAL``.
"""
from __future__ import annotations

import enum
import io
import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, NamedTuple

log = logging.getLogger(__name__)

MIN_YEAR = 1000
MAX_YEAR = 2100
TOTALS_WORD = "*"
TOTALS_POS = "TOTAL"


class POS(str, enum.Enum):
    NOUN = "NOUN"
    VERB = "VERB"
    OTHER = "OTHER"


_SUFFIX_POS = {"NOUN": POS.NOUN, "VERB": POS.VERB}


class NgramRecord(NamedTuple):
    token: str
    pos: POS
    year: int
    match_count: int
    volume_count: int


class UndefinedDenominatorError(ZeroDivisionError):
    """A word has occurrences in a year whose corpus total is zero."""


@dataclass(frozen=True)
class YearSeries:
    word: str
    pos: POS
    counts: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "counts", MappingProxyType(dict(self.counts)))

    def count(self, year: int) -> int:
        return self.counts.get(year, 0)

    def __reduce__(self):
        return (YearSeries, (self.word, self.pos, dict(self.counts)))


@dataclass(frozen=True)
class YearTotals:
    totals: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for year, total in self.totals.items():
            if total < 0:
                raise ValueError(f"negative corpus total for {year}: {total}")
        object.__setattr__(self, "totals", MappingProxyType(dict(self.totals)))

    def total(self, year: int) -> int:
        return self.totals.get(year, 0)

    def __reduce__(self):
        return (YearTotals, (dict(self.totals),))


SKIP = None


def _split_token(raw: str) -> tuple[str, POS]:
    base, sep, tag = raw.rpartition("_")
    if not sep:
        return raw, POS.OTHER
    pos = _SUFFIX_POS.get(tag)
    if pos is not None:
        return base, pos
    return (base or raw), POS.OTHER


def parse_ngram_line(line: str) -> NgramRecord | None:
    """Parse one n-gram line; malformed lines give ``None`` (the skip marker)."""
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 4:
        return SKIP
    token, pos = _split_token(parts[0])
    if not token:
        return SKIP
    try:
        year = int(parts[1])
        match_count = int(parts[2])
        volume_count = int(parts[3])
    except ValueError:
        return SKIP
    if not MIN_YEAR <= year <= MAX_YEAR or match_count < 0:
        return SKIP
    return NgramRecord(token, pos, year, match_count, volume_count)


class Index(Mapping):
    """Read-only mapping (word, pos) -> YearSeries plus the skipped-line count."""

    def __init__(self, series: Mapping[tuple[str, POS], YearSeries], skipped: int = 0):
        self._series = dict(series)
        self.skipped = skipped

    def __getitem__(self, key):
        return self._series[key]

    def __iter__(self):
        return iter(self._series)

    def __len__(self):
        return len(self._series)

    def __eq__(self, other):
        if isinstance(other, Index):
            return self._series == other._series
        return NotImplemented

    def get_series(self, word: str, pos: POS = POS.NOUN) -> YearSeries:
        return self._series.get((word, pos)) or YearSeries(word, pos, {})


def _freeze(raw: Mapping[tuple[str, POS], Mapping[int, int]], skipped: int = 0) -> Index:
    return Index(
        {key: YearSeries(key[0], key[1], counts) for key, counts in raw.items()},
        skipped=skipped,
    )


def build_index(records: Iterable[NgramRecord | None], vocabulary: Iterable[str]) -> Index:
    """Sum NOUN/VERB counts per (word, pos, year) for vocabulary words."""
    vocab = frozenset(vocabulary)
    raw: dict[tuple[str, POS], dict[int, int]] = defaultdict(lambda: defaultdict(int))
    skipped = 0
    for rec in records:
        if rec is None:
            skipped += 1
            continue
        if rec.pos is POS.OTHER or rec.token not in vocab:
            continue
        raw[(rec.token, rec.pos)][rec.year] += rec.match_count
    return _freeze(raw, skipped)


def _ingest_lines(lines: Iterable[str], vocab: frozenset[str]) -> tuple[dict, int]:
    # Fused parse + filter: the vocabulary test runs before numeric parsing.
    raw: dict[tuple[str, POS], dict[int, int]] = {}
    skipped = 0
    noun, verb = POS.NOUN, POS.VERB
    for line in lines:
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 4:
            skipped += 1
            continue
        base, sep, tag = parts[0].rpartition("_")
        if not sep:
            base, tag = parts[0], ""
        elif not base and tag not in _SUFFIX_POS:
            base = parts[0]
        if not base:
            skipped += 1
            continue
        try:
            year = int(parts[1])
            count = int(parts[2])
            int(parts[3])
        except ValueError:
            skipped += 1
            continue
        if not MIN_YEAR <= year <= MAX_YEAR or count < 0:
            skipped += 1
            continue
        if base not in vocab:
            continue
        if tag == "NOUN":
            key = (base, noun)
        elif tag == "VERB":
            key = (base, verb)
        else:
            continue
        series = raw.get(key)
        if series is None:
            series = raw[key] = {}
        series[year] = series.get(year, 0) + count
    return raw, skipped


def _ingest_path(path: str, vocab: frozenset[str]) -> tuple[dict, int]:
    with open(path, encoding="utf-8", newline="\n") as fh:
        return _ingest_lines(fh, vocab)


def merge_partials(partials: Iterable[tuple[dict, int]]) -> Index:
    merged: dict[tuple[str, POS], dict[int, int]] = {}
    skipped = 0
    for raw, n_skipped in partials:
        skipped += n_skipped
        for key, counts in raw.items():
            target = merged.setdefault(key, {})
            for year, c in counts.items():
                target[year] = target.get(year, 0) + c
    return _freeze(merged, skipped)


def ingest_files(paths: Iterable[str], vocabulary: Iterable[str], workers: int = 1) -> Index:
    """Stream every n-gram file into one index.

    With ``workers > 1`` files are parsed in separate processes; the
    per-file partial indexes are merged by count addition, so the result
    does not depend on scheduling.
    """
    paths = list(paths)
    vocab = frozenset(vocabulary)
    if workers > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_ingest_path, paths, [vocab] * len(paths)))
    else:
        partials = [_ingest_path(p, vocab) for p in paths]
    index = merge_partials(partials)
    if index.skipped:
        log.info("skipped %d malformed n-gram lines", index.skipped)
    return index


def read_records(path: str) -> Iterator[NgramRecord | None]:
    with open(path, encoding="utf-8", newline="\n") as fh:
        for line in fh:
            yield parse_ngram_line(line)


def load_totals(path: str) -> YearTotals:
    """Read ``year<TAB>total<TAB>pages<TAB>volumes`` lines; extra fields ignored."""
    totals: dict[int, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected at least 2 tab-separated fields")
            try:
                year, total = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-integer field") from exc
            totals[year] = totals.get(year, 0) + total
    return YearTotals(totals)


def relative_frequency(series: YearSeries, totals: YearTotals, year: int) -> float:
    count = series.count(year)
    total = totals.total(year)
    if total == 0:
        if count == 0:
            return 0.0
        raise UndefinedDenominatorError(
            f"{series.word}/{series.pos.value}: {count} occurrences in {year} but corpus total is 0"
        )
    return count / total


def dump_index(index: Index, totals: YearTotals | None, fh: io.TextIOBase) -> None:
    """Write the flat sorted index format."""
    if totals is not None:
        for year in sorted(totals.totals):
            fh.write(f"{TOTALS_WORD}\t{TOTALS_POS}\t{year}\t{totals.totals[year]}\n")
    for word, pos in sorted(index, key=lambda k: (k[0], k[1].value)):
        counts = index[(word, pos)].counts
        for year in sorted(counts):
            fh.write(f"{word}\t{pos.value}\t{year}\t{counts[year]}\n")


def save_index(index: Index, totals: YearTotals | None, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        dump_index(index, totals, fh)


def load_index(path: str) -> tuple[Index, YearTotals]:
    raw: dict[tuple[str, POS], dict[int, int]] = {}
    totals: dict[int, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 tab-separated fields")
            word, pos, year_s, count_s = parts
            try:
                year, count = int(year_s), int(count_s)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-integer field") from exc
            if word == TOTALS_WORD and pos == TOTALS_POS:
                totals[year] = count
                continue
            try:
                key = (word, POS(pos))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: unknown pos {pos!r}") from exc
            raw.setdefault(key, {})[year] = count
    return _freeze(raw), YearTotals(totals)
