import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from denominal.corpus_ingest import (
    POS,
    NgramRecord,
    UndefinedDenominatorError,
    YearSeries,
    YearTotals,
    build_index,
    dump_index,
    ingest_files,
    load_index,
    parse_ngram_line,
    relative_frequency,
    save_index,
)


def test_parse_line_maps_fields():
    assert parse_ngram_line("mop_NOUN\t1990\t5\t3") == NgramRecord("mop", POS.NOUN, 1990, 5, 3)


def test_parse_line_non_integer_is_skipped():
    assert parse_ngram_line("mop_NOUN\t1990\tfive\t3") is None


def test_parse_line_zero_counts_are_legal():
    assert parse_ngram_line("sauna_VERB\t1950\t0\t0") == NgramRecord("sauna", POS.VERB, 1950, 0, 0)


@pytest.mark.parametrize("line", [
    "mop_NOUN\t1990\t5",
    "mop_NOUN\t1990\t5\t3\t1",
    "_NOUN\t1990\t5\t3",
    "mop_NOUN\t900\t5\t3",
    "mop_NOUN\t1990\t-1\t3",
    "",
])
def test_parse_line_malformed(line):
    assert parse_ngram_line(line) is None


def test_parse_line_other_pos_and_volume_above_match():
    assert parse_ngram_line("mop_ADJ\t1990\t1\t9") == NgramRecord("mop", POS.OTHER, 1990, 1, 9)
    assert parse_ngram_line("mop\t1990\t1\t1").pos is POS.OTHER


def test_build_index_sums_duplicate_years():
    recs = [NgramRecord("mop", POS.NOUN, 1990, 5, 1), NgramRecord("mop", POS.NOUN, 1990, 7, 1)]
    index = build_index(recs, {"mop"})
    assert dict(index[("mop", POS.NOUN)].counts) == {1990: 12}


def test_build_index_filters_vocabulary_and_other():
    recs = [NgramRecord("zebra", POS.NOUN, 1990, 5, 1), NgramRecord("mop", POS.OTHER, 1990, 5, 1)]
    assert len(build_index(recs, {"mop"})) == 0


def test_build_index_empty_stream():
    index = build_index([], {"mop"})
    assert len(index) == 0 and index.skipped == 0


def test_build_index_counts_skips():
    index = build_index([None, NgramRecord("mop", POS.NOUN, 1990, 1, 1), None], {"mop"})
    assert index.skipped == 2


def test_index_is_immutable():
    index = build_index([NgramRecord("mop", POS.NOUN, 1990, 1, 1)], {"mop"})
    with pytest.raises(TypeError):
        index[("mop", POS.NOUN)].counts[1991] = 3
    with pytest.raises(TypeError):
        index[("x", POS.NOUN)] = None


records = st.lists(
    st.builds(NgramRecord, st.sampled_from(["mop", "bike", "zebra"]),
              st.sampled_from([POS.NOUN, POS.VERB, POS.OTHER]),
              st.integers(1990, 1995), st.integers(0, 50), st.integers(0, 5)),
    max_size=60,
)


@settings(max_examples=100)
@given(records, st.randoms(use_true_random=False))
def test_index_order_independent(recs, rnd):
    shuffled = list(recs)
    rnd.shuffle(shuffled)
    assert build_index(recs, {"mop", "bike"}) == build_index(shuffled, {"mop", "bike"})


def test_fused_reader_matches_record_path(tmp_path):
    rnd = random.Random(3)
    lines = []
    for _ in range(2000):
        word = rnd.choice(["mop", "bike", "zebra", "e-mail"])
        tag = rnd.choice(["NOUN", "VERB", "ADJ", ""])
        tok = f"{word}_{tag}" if tag else word
        lines.append(f"{tok}\t{rnd.randint(1980, 2000)}\t{rnd.randint(0, 9)}\t{rnd.randint(0, 9)}\n")
    lines.insert(5, "broken line\n")
    path = tmp_path / "g.tsv"
    path.write_text("".join(lines))
    vocab = {"mop", "bike", "e-mail"}
    fused = ingest_files([str(path)], vocab)
    reference = build_index((parse_ngram_line(l) for l in lines), vocab)
    assert fused == reference
    assert fused.skipped == reference.skipped == 1


def test_parallel_ingest_matches_serial(tmp_path):
    paths = []
    for k in range(3):
        p = tmp_path / f"part{k}.tsv"
        p.write_text("".join(f"mop_NOUN\t{1990 + i % 4}\t{i + k}\t1\n" for i in range(50)))
        paths.append(str(p))
    assert ingest_files(paths, {"mop"}, workers=3) == ingest_files(paths, {"mop"})


def test_relative_frequency_definition():
    series = YearSeries("mop", POS.NOUN, {1990: 5})
    totals = YearTotals({1990: 100, 1991: 100})
    assert relative_frequency(series, totals, 1990) == 0.05
    assert relative_frequency(series, totals, 1991) == 0
    assert relative_frequency(series, YearTotals({}), 1991) == 0


def test_relative_frequency_zero_total_raises():
    with pytest.raises(UndefinedDenominatorError):
        relative_frequency(YearSeries("mop", POS.NOUN, {1990: 5}), YearTotals({1990: 0}), 1990)


@given(st.dictionaries(st.integers(1900, 1910), st.integers(0, 1000)),
       st.dictionaries(st.integers(1900, 1910), st.integers(0, 1000)))
def test_relative_frequency_in_unit_interval(counts, extra):
    totals = YearTotals({y: c + extra.get(y, 0) for y, c in counts.items()})
    series = YearSeries("w", POS.NOUN, counts)
    for y in range(1900, 1911):
        try:
            f = relative_frequency(series, totals, y)
        except UndefinedDenominatorError:
            continue
        assert 0.0 <= f <= 1.0


def test_index_round_trip(tmp_path, toy_index):
    index, totals = toy_index
    path = tmp_path / "index.tsv"
    save_index(index, totals, str(path))
    loaded, loaded_totals = load_index(str(path))
    assert loaded == index
    assert dict(loaded_totals.totals) == dict(totals.totals)
    buf = io.StringIO()
    dump_index(loaded, loaded_totals, buf)
    assert buf.getvalue() == path.read_text()


def test_toy_index_matches_golden(toy_index):
    from conftest import GOLDEN
    index, totals = toy_index
    buf = io.StringIO()
    dump_index(index, totals, buf)
    assert buf.getvalue() == (GOLDEN / "toy_index.tsv").read_text()
    assert index.skipped == 2
