import json
import math

import pytest

from conftest import GOLDEN
from denominal.features import build_feature_table
from denominal.lexicon import derive_outcomes
from denominal.models import D_ABLATION, CHANGE_ABLATION
from denominal.report import AnalysisError, analyze, analyze_window, write_report
from denominal.stats import p_from_r
from denominal.synth import planted_rows


@pytest.fixture(scope="module")
def toy_tables(toy_index, toy_lexicon):
    index, totals = toy_index
    outcomes = derive_outcomes(toy_lexicon, 1500, 2000)
    return {w: build_feature_table(index, totals, outcomes, toy_lexicon, 1500, 2000, w) for w in (1, 2, 3)}


def test_toy_report_matches_golden(tmp_path, toy_tables):
    # Golden values were checked by hand against the toy table, e.g. the
    # length t-test (-2.7333 / sqrt(1/9 + 2.3/5)) and the Cauchy p for df = 1.
    rep = analyze(toy_tables, from_year=1500, to_year=2000)
    paths = write_report(rep, tmp_path / "report.json")
    assert (tmp_path / "report.json").read_bytes() == (GOLDEN / "toy_report.json").read_bytes()
    for block, path in paths.items():
        with open(path, "rb") as fh:
            assert fh.read() == (GOLDEN / f"toy_report.{block}.csv").read_bytes(), block


def test_toy_hand_values(toy_tables):
    w = analyze_window(toy_tables[1], 1)
    assert w["t_test"]["length"]["t"] == pytest.approx(-2.7333333333333 / math.sqrt(1 / 9 + 2.3 / 5), abs=1e-12)
    r = 17 / math.sqrt(2 / 3 * 3246)
    assert w["correlation"]["length"]["r"] == pytest.approx(r, abs=1e-14)
    t = r / math.sqrt(1 - r * r)
    assert w["correlation"]["length"]["p"] == pytest.approx(1 - 2 * math.atan(t) / math.pi, abs=1e-14)


def test_correlation_p_consistent_with_r():
    rows, _ = planted_rows(600, {"intercept": 0.0, "length": -1.0}, {"intercept": 40.0, "recent_freq": 8.0}, seed=4)
    block = analyze_window(rows, 1)
    n_changed = sum(r.change for r in rows)
    for entry in block["correlation"].values():
        assert entry["n"] == n_changed
        assert entry["p"] == p_from_r(entry["r"], n_changed)


def test_group_stats_stderr(toy_tables):
    g = analyze_window(toy_tables[1], 1)["group_stats"]["length"]["unchanged"]
    assert g["stderr"] == pytest.approx(g["std"] / math.sqrt(g["n"]), abs=1e-15)


def test_too_few_changed_rows(toy_tables):
    rows = [r for r in toy_tables[1] if r.word != "bike"]
    with pytest.raises(AnalysisError):
        analyze_window(rows, 1)


def test_mismatched_cohorts_rejected(toy_tables):
    with pytest.raises(AnalysisError):
        analyze({1: toy_tables[1], 2: toy_tables[2][:-1]})


def test_model_blocks_cover_every_mask():
    rows, _ = planted_rows(400, {"intercept": 0.0, "length": -1.0}, {"intercept": 40.0, "recent_freq": 8.0}, seed=2)
    block = analyze_window(rows, 1)["models"]
    assert [tuple(m["features"]) for m in block["d"]] == list(D_ABLATION)
    assert [tuple(m["features"]) for m in block["change"]] == list(CHANGE_ABLATION)
    assert all(m["status"] == "ok" for m in block["d"] + block["change"])


def test_pooled_flag_recorded(tmp_path, toy_tables):
    rep = analyze(toy_tables, pooled=True)
    assert rep["t_test"] == "student_pooled"
    assert rep["windows"][0]["t_test"]["length"]["df"] == 6
    write_report(rep, tmp_path / "r.json")
    assert json.loads((tmp_path / "r.json").read_text())["t_test"] == "student_pooled"
