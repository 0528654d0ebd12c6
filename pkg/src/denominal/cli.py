"""Command-line entry point: ``denominal <command> [flags]``.

Exit status is 0 on success and 2 on usage or data errors.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

from . import corpus_ingest, features, lexicon, models, report, synth

log = logging.getLogger("denominal")


class CliError(Exception):
    pass


def _year(s: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a year: {s!r}") from None


def _window(s: str) -> int:
    try:
        w = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a window: {s!r}") from None
    if w not in (1, 2, 3):
        raise argparse.ArgumentTypeError("window must be 1, 2 or 3")
    return w


def _readable(path: str) -> str:
    if not os.path.isfile(path) or not os.access(path, os.R_OK):
        raise CliError(f"cannot read {path}")
    return path


def cmd_ingest(args) -> int:
    for p in args.ngrams + [args.totals, args.lexicon]:
        _readable(p)
    vocab = {e.word for e in lexicon.load_lexicon(args.lexicon)}
    totals = corpus_ingest.load_totals(args.totals)
    index = corpus_ingest.ingest_files(args.ngrams, vocab, workers=args.workers)
    corpus_ingest.save_index(index, totals, args.out)
    print(f"skipped_lines\t{index.skipped}")
    return 0


def cmd_features(args) -> int:
    if args.from_year >= args.to_year:
        raise CliError(f"invalid interval: --from {args.from_year} must be before --to {args.to_year}")
    _readable(args.index)
    _readable(args.lexicon)
    index, totals = corpus_ingest.load_index(args.index)
    grouped = lexicon.group_by_word(lexicon.load_lexicon(args.lexicon))
    outcomes = lexicon.derive_outcomes(grouped, args.from_year, args.to_year)
    rows = features.build_feature_table(index, totals, outcomes, grouped, args.from_year, args.to_year, args.window)
    features.write_feature_table(rows, args.out)
    n_emerged, n_changed = lexicon.cohort_counts(outcomes)
    print(f"n_emerged\t{n_emerged}\nn_changed\t{n_changed}\nrows\t{len(rows)}")
    return 0


def cmd_analyze(args) -> int:
    windows = args.windows or ([1] if len(args.features) == 1 else None)
    if windows is None or len(windows) != len(args.features):
        raise CliError("give one --windows label per --features file")
    if len(set(windows)) != len(windows):
        raise CliError("duplicate window labels")
    tables = {w: features.read_feature_table(_readable(p)) for w, p in zip(windows, args.features)}
    rep = report.analyze(tables, from_year=args.from_year, to_year=args.to_year,
                         pooled=args.pooled, include_models=not args.no_models)
    paths = report.write_report(rep, args.out)
    print(args.out)
    for p in paths.values():
        print(p)
    return 0


def _parse_windows(s: str) -> list[int]:
    try:
        return [_window(x) for x in s.split(",") if x]
    except argparse.ArgumentTypeError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parse_features(s: str) -> list[str]:
    names = [x.strip() for x in s.split(",") if x.strip()]
    unknown = [n for n in names if n not in features.FEATURE_NAMES]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown features: {unknown}")
    return names


def _report_fit(fit: models.FitResult, path: str) -> None:
    fit.save(path)
    if not fit.diagnostics.get("converged", True):
        log.warning("%s: fit did not converge after %s iterations", path, fit.diagnostics.get("iterations"))
    print(path)


def cmd_fit(args) -> int:
    rows = features.read_feature_table(_readable(args.features))
    target = models.Target(args.target)
    if args.ablation:
        if args.exclude:
            raise CliError("--ablation and --exclude are mutually exclusive")
        os.makedirs(args.out, exist_ok=True)
        fits = models.ablation_run(rows, target)
        for i, fit in enumerate(fits, 1):
            _report_fit(fit, os.path.join(args.out, f"{target.value}_mask{i}.json"))
        return 0
    spec = models.ModelSpec.excluding(target, args.exclude or [])
    _report_fit(models.fit(rows, spec), args.out)
    return 0


def cmd_predict(args) -> int:
    fit = models.FitResult.load(_readable(args.model))
    with open(_readable(args.features), encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fieldnames = reader.fieldnames or []
        missing = [f for f in ["word", *fit.spec.included] if f not in fieldnames]
        if missing:
            raise CliError(f"feature table lacks columns required by the model: {missing}")
        out_rows = []
        for lineno, row in enumerate(reader, 2):
            try:
                values = {f: float(row[f]) for f in fit.spec.included}
            except (TypeError, ValueError):
                raise CliError(f"{args.features}:{lineno}: non-numeric feature value") from None
            out_rows.append((row["word"], models.predict(fit, values)))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["word", "prediction"])
        for word, value in out_rows:
            w.writerow([word, features.format_real(value)])
    return 0


def cmd_synth(args) -> int:
    if args.spec:
        spec = synth.PlantSpec.from_json(_readable(args.spec), seed=args.seed, n_words=args.n)
    else:
        spec = synth.PlantSpec(seed=args.seed, n_words=args.n)
    _, paths = synth.generate(spec, args.out)
    for p in paths.values():
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="denominal", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="stream n-gram files into a sorted index")
    p.add_argument("--ngrams", nargs="+", required=True, metavar="PATH")
    p.add_argument("--totals", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("features", help="compute the per-noun feature table")
    p.add_argument("--index", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--from", dest="from_year", type=_year, required=True)
    p.add_argument("--to", dest="to_year", type=_year, required=True)
    p.add_argument("--window", type=_window, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("analyze", help="correlations, t-tests, group stats and model weights")
    p.add_argument("--features", nargs="+", required=True, metavar="CSV")
    p.add_argument("--windows", type=_parse_windows, help="window label per feature file, e.g. 1,2,3")
    p.add_argument("--from", dest="from_year", type=_year, help="interval start, recorded in the report")
    p.add_argument("--to", dest="to_year", type=_year, help="interval end, recorded in the report")
    p.add_argument("--pooled", action="store_true", help="Student pooled-variance t-test instead of Welch")
    p.add_argument("--no-models", action="store_true", help="skip the model blocks")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit", help="fit the lag (d) or conversion (change) model")
    p.add_argument("--features", required=True)
    p.add_argument("--target", choices=["d", "change"], required=True)
    p.add_argument("--exclude", type=_parse_features)
    p.add_argument("--ablation", action="store_true")
    p.add_argument("--out", required=True, help="model file, or directory with --ablation")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="apply a model file to a feature table")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", help="write a synthetic fixture with planted effects")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--spec")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


_DATA_ERRORS = (CliError, OSError, ValueError, KeyError, ArithmeticError)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _DATA_ERRORS as exc:
        print(f"denominal {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
