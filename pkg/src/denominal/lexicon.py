"""Dated sense lexicon and per-noun conversion outcomes.

The lexicon is a CSV with header ``word,pos,start_year``: one row per
dated sense.  A noun "emerges" at its earliest noun sense; it counts as
converted when a verb sense appears at or after that year and no later
than the end of the study interval.
"""
from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

from .corpus_ingest import MAX_YEAR, MIN_YEAR, POS

LEXICON_HEADER = ["word", "pos", "start_year"]
_POS_LABELS = {"noun": POS.NOUN, "verb": POS.VERB}


class LexiconFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SenseEntry:
    word: str
    pos: POS
    start_year: int

    def __post_init__(self):
        if not self.word:
            raise ValueError("sense entry with empty word")
        if not MIN_YEAR <= self.start_year <= MAX_YEAR:
            raise ValueError(f"{self.word}: start year {self.start_year} outside [{MIN_YEAR}, {MAX_YEAR}]")


@dataclass(frozen=True)
class LexemeOutcome:
    word: str
    noun_emergence_year: int
    verb_first_year: int | None
    change: int
    d: int | None


def parse_pos_label(label: str) -> POS:
    return _POS_LABELS.get(label.strip().lower(), POS.OTHER)


def load_lexicon(path) -> list[SenseEntry]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != LEXICON_HEADER:
            raise LexiconFormatError(f"{path}: expected header {','.join(LEXICON_HEADER)}, got {header}")
        entries = []
        for lineno, row in enumerate(reader, 2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise LexiconFormatError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            word, pos, year = (cell.strip() for cell in row)
            try:
                start_year = int(year)
            except ValueError:
                raise LexiconFormatError(f"{path}:{lineno}: non-integer year {year!r}") from None
            try:
                entries.append(SenseEntry(word, parse_pos_label(pos), start_year))
            except ValueError as exc:
                raise LexiconFormatError(f"{path}:{lineno}: {exc}") from None
    return entries


def group_by_word(entries: Iterable[SenseEntry]) -> dict[str, list[SenseEntry]]:
    grouped: dict[str, list[SenseEntry]] = defaultdict(list)
    for e in entries:
        grouped[e.word].append(e)
    return dict(grouped)


def derive_outcome(entries: Iterable[SenseEntry], from_year: int, to_year: int) -> LexemeOutcome | None:
    """Outcome for one word, or ``None`` when it is outside the cohort.

    Excluded: no noun sense, noun emergence outside [from_year, to_year],
    or a verb sense older than the noun (not a noun-to-verb conversion).
    """
    if from_year >= to_year:
        raise ValueError(f"invalid interval [{from_year}, {to_year}]")
    entries = list(entries)
    if not entries:
        return None
    words = {e.word for e in entries}
    if len(words) != 1:
        raise ValueError(f"entries for several words passed together: {sorted(words)}")
    noun_years = [e.start_year for e in entries if e.pos is POS.NOUN]
    if not noun_years:
        return None
    emerged = min(noun_years)
    if not from_year <= emerged <= to_year:
        return None
    verb_years = [e.start_year for e in entries if e.pos is POS.VERB]
    verb_first = min(verb_years) if verb_years else None
    if verb_first is not None and verb_first < emerged:
        return None
    word = entries[0].word
    if verb_first is None or verb_first > to_year:
        return LexemeOutcome(word, emerged, None, 0, None)
    return LexemeOutcome(word, emerged, verb_first, 1, verb_first - emerged)


def derive_outcomes(
    lexicon: Mapping[str, list[SenseEntry]] | Iterable[SenseEntry], from_year: int, to_year: int
) -> list[LexemeOutcome]:
    """Cohort outcomes for every word, sorted by word."""
    if not isinstance(lexicon, Mapping):
        lexicon = group_by_word(lexicon)
    outcomes = []
    for word in sorted(lexicon):
        outcome = derive_outcome(lexicon[word], from_year, to_year)
        if outcome is not None:
            outcomes.append(outcome)
    return outcomes


def cohort_counts(outcomes: Iterable[LexemeOutcome]) -> tuple[int, int]:
    outcomes = list(outcomes)
    return len(outcomes), sum(o.change for o in outcomes)
