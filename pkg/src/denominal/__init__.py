"""Diachronic feature extraction, statistics and models for noun-to-verb
conversion studies."""
from .corpus_ingest import POS, Index, NgramRecord, YearSeries, YearTotals
from .features import FEATURE_NAMES, FeatureVector
from .lexicon import LexemeOutcome, SenseEntry
from .models import FitResult, ModelSpec, Target

__version__ = "0.1.0"

__all__ = [
    "POS", "Index", "NgramRecord", "YearSeries", "YearTotals",
    "FEATURE_NAMES", "FeatureVector", "LexemeOutcome", "SenseEntry",
    "FitResult", "ModelSpec", "Target",
]
