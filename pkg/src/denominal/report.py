"""Analysis report: cohort counts, correlations, group statistics,
t-tests, model weights and the point data behind the two figures.

The report is a JSON document (``schema: denominal.report``) with one
block per recent-frequency window.  ``write_report`` also emits one flat
CSV per block next to the JSON file for spreadsheet diffing.
"""
from __future__ import annotations

import csv
import json
import math
import os
from typing import Mapping, Sequence

from . import models, stats
from .features import FEATURE_NAMES, FeatureVector, format_real
from .models import ModelError, Target

REPORT_SCHEMA = "denominal.report"
REPORT_VERSION = 1
MIN_CHANGED = 3


class AnalysisError(ValueError):
    pass


def _column(rows: Sequence[FeatureVector], name: str) -> list[float]:
    return [r.feature(name) for r in rows]


def correlation_block(changed: Sequence[FeatureVector]) -> dict:
    d = [float(r.d) for r in changed]
    block = {}
    for f in FEATURE_NAMES:
        try:
            res = stats.pearson(_column(changed, f), d)
            block[f] = {"n": res.n, "r": res.r, "p": res.p_two_tailed}
        except stats.DegenerateDataError as exc:
            block[f] = {"n": len(changed), "error": str(exc)}
    return block


def _group_entry(xs: Sequence[float]) -> dict:
    entry = {"n": len(xs)}
    if len(xs) >= 1:
        entry["mean"] = stats.mean(xs)
    if len(xs) >= 2:
        entry["std"] = stats.mean_std(xs)[1]
        entry["stderr"] = entry["std"] / math.sqrt(len(xs))
    return entry


def group_stats_block(changed, unchanged) -> dict:
    return {f: {"changed": _group_entry(_column(changed, f)),
                "unchanged": _group_entry(_column(unchanged, f))}
            for f in FEATURE_NAMES}


def t_test_block(changed, unchanged, pooled: bool = False) -> dict:
    block = {}
    for f in FEATURE_NAMES:
        entry = {"n_changed": len(changed), "n_unchanged": len(unchanged)}
        try:
            res = stats.welch_t(_column(changed, f), _column(unchanged, f), pooled=pooled)
            entry.update({"t": res.t, "df": res.df, "p": res.p_two_tailed})
        except stats.DegenerateDataError as exc:
            entry["error"] = str(exc)
        block[f] = entry
    return block


def _model_entry(rows, target: Target, mask: tuple[str, ...]) -> dict:
    entry = {"target": target.value, "features": list(mask)}
    try:
        fit = models.fit(rows, models.ModelSpec(target, mask))
    except (ModelError, stats.DegenerateDataError) as exc:
        entry.update({"status": "error", "error": str(exc)})
        return entry
    entry.update({
        "status": "ok" if fit.diagnostics.get("converged") else "not_converged",
        "weights": fit.weights,
        "intercept": fit.intercept,
        "n_rows": fit.n_rows,
        "diagnostics": fit.diagnostics,
    })
    return entry


def model_block(rows: Sequence[FeatureVector]) -> dict:
    return {t.value: [_model_entry(rows, t, m) for m in models.ablation_masks(t)]
            for t in (Target.D, Target.CHANGE)}


def figure1_block(changed: Sequence[FeatureVector]) -> dict:
    return {
        "words": [r.word for r in changed],
        "d": [r.d for r in changed],
        "features": {f: _column(changed, f) for f in FEATURE_NAMES},
    }


def figure2_block(changed, unchanged) -> dict:
    out = {}
    for f in FEATURE_NAMES:
        out[f] = {}
        for label, group in (("changed", changed), ("unchanged", unchanged)):
            e = _group_entry(_column(group, f))
            out[f][label] = {"n": e["n"], "mean": e.get("mean"), "stderr": e.get("stderr")}
    return out


def analyze_window(rows: Sequence[FeatureVector], window: int, *, pooled: bool = False,
                   include_models: bool = True) -> dict:
    rows = sorted(rows, key=lambda r: r.word)
    changed = [r for r in rows if r.change == 1]
    unchanged = [r for r in rows if r.change == 0]
    if len(changed) < MIN_CHANGED:
        raise AnalysisError(f"window {window}: {len(changed)} converted nouns, need >= {MIN_CHANGED}")
    block = {
        "window": window,
        "n_emerged": len(rows),
        "n_changed": len(changed),
        "correlation": correlation_block(changed),
        "group_stats": group_stats_block(changed, unchanged),
        "t_test": t_test_block(changed, unchanged, pooled),
        "figure1": figure1_block(changed),
        "figure2": figure2_block(changed, unchanged),
    }
    if include_models:
        block["models"] = model_block(rows)
    return block


def analyze(tables: Mapping[int, Sequence[FeatureVector]], *, from_year: int | None = None,
            to_year: int | None = None, pooled: bool = False, include_models: bool = True) -> dict:
    """Build the full report from one feature table per window."""
    if not tables:
        raise AnalysisError("no feature tables given")
    windows = [analyze_window(tables[w], w, pooled=pooled, include_models=include_models)
               for w in sorted(tables)]
    first = windows[0]
    for blk in windows[1:]:
        if (blk["n_emerged"], blk["n_changed"]) != (first["n_emerged"], first["n_changed"]):
            raise AnalysisError("feature tables for different windows describe different cohorts")
    return {
        "schema": REPORT_SCHEMA,
        "version": REPORT_VERSION,
        "t_test": "student_pooled" if pooled else "welch",
        "cohort": {"from_year": from_year, "to_year": to_year,
                   "n_emerged": first["n_emerged"], "n_changed": first["n_changed"]},
        "windows": windows,
    }


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format_real(x)
    return str(x)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(x) for x in row])


def block_csv_paths(out_path) -> dict[str, str]:
    stem, _ = os.path.splitext(out_path)
    return {name: f"{stem}.{name}.csv" for name in
            ("cohort", "correlation", "group_stats", "t_test", "models", "figure1", "figure2")}


def _json_safe(obj):
    # JSON has no infinities; spell them out.
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def write_report(report: dict, out_path) -> dict[str, str]:
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_json_safe(report), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    paths = block_csv_paths(out_path)
    c = report["cohort"]
    _write_csv(paths["cohort"], ["from_year", "to_year", "n_emerged", "n_changed"],
               [[c["from_year"], c["to_year"], c["n_emerged"], c["n_changed"]]])
    corr, groups, tt, mods, fig1, fig2 = [], [], [], [], [], []
    for blk in report["windows"]:
        w = blk["window"]
        for f in FEATURE_NAMES:
            e = blk["correlation"][f]
            corr.append([w, f, e["n"], e.get("r"), e.get("p"), e.get("error", "")])
            for label in ("changed", "unchanged"):
                g = blk["group_stats"][f][label]
                groups.append([w, f, label, g["n"], g.get("mean"), g.get("std")])
                s = blk["figure2"][f][label]
                fig2.append([w, f, label, s["n"], s["mean"], s["stderr"]])
            e = blk["t_test"][f]
            tt.append([w, f, e["n_changed"], e["n_unchanged"], e.get("t"), e.get("df"), e.get("p"),
                       e.get("error", "")])
        for target, entries in blk.get("models", {}).items():
            for i, m in enumerate(entries, 1):
                weights = m.get("weights", {})
                cells = [weights.get(f, "") if f in m["features"] else "X" for f in FEATURE_NAMES]
                mods.append([w, target, i, m["status"], m.get("intercept")] + cells + [m.get("error", "")])
        for i, word in enumerate(blk["figure1"]["words"]):
            fig1.append([w, word, blk["figure1"]["d"][i]] +
                        [blk["figure1"]["features"][f][i] for f in FEATURE_NAMES])
    _write_csv(paths["correlation"], ["window", "feature", "n", "r", "p", "error"], corr)
    _write_csv(paths["group_stats"], ["window", "feature", "class", "n", "mean", "std"], groups)
    _write_csv(paths["t_test"], ["window", "feature", "n_changed", "n_unchanged", "t", "df", "p", "error"], tt)
    _write_csv(paths["models"], ["window", "target", "mask", "status", "intercept", *FEATURE_NAMES, "error"], mods)
    _write_csv(paths["figure1"], ["window", "word", "d", *FEATURE_NAMES], fig1)
    _write_csv(paths["figure2"], ["window", "feature", "class", "n", "mean", "stderr"], fig2)
    return paths
