from pathlib import Path

import pytest

from denominal import corpus_ingest, lexicon

REPO = Path(__file__).resolve().parents[1]
TOY = REPO / "src" / "denominal" / "data" / "toy"
GOLDEN = Path(__file__).resolve().parent / "golden"
DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def toy_paths():
    return {
        "lexicon": TOY / "lexicon.csv",
        "ngrams": TOY / "ngrams.tsv",
        "totals": TOY / "totals.tsv",
    }


@pytest.fixture(scope="session")
def toy_lexicon(toy_paths):
    return lexicon.group_by_word(lexicon.load_lexicon(toy_paths["lexicon"]))


@pytest.fixture(scope="session")
def toy_index(toy_paths, toy_lexicon):
    index = corpus_ingest.ingest_files([str(toy_paths["ngrams"])], set(toy_lexicon))
    totals = corpus_ingest.load_totals(toy_paths["totals"])
    return index, totals


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        terminalreporter.write_line(results[num][1])
