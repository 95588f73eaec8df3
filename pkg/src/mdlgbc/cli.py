"""Command line: train, predict, crossval, inspect.

Exit codes: 0 success, 1 usage error, 2 data or model-file error, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from .boundary import overlap
from .coding import class_length, data_length, intrusion_length, margin_length
from .dataset import DataError, fit_normalizer, load_csv, normalize, transform
from .evaluation import accuracy, apply_thread_setting, cross_validate, macro_f1
from .model_io import atomic_write_text, load_model, save_model
from .predictor import predict_indices, scores
from .trainer import InvariantError, fit

DEFAULT_SEED = 2035

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INVARIANT = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _label_col(value: str | None):
    return -1 if value is None else value


def cmd_train(args) -> int:
    table = load_csv(args.data, _label_col(args.label_col))
    params = fit_normalizer(table)
    model = fit(transform(table, params), seed=args.seed, keep_trace=bool(args.trace))
    save_model(model, args.model, feature_names=table.feature_names,
               label_column=table.label_name)
    if args.trace:
        atomic_write_text(args.trace, "".join(json.dumps(r.to_dict()) + "\n" for r in model.trace))
    counts = ", ".join(f"{name}={k}" for name, k in zip(model.label_names, model.ball_counts()))
    print(f"classes: {model.C}  stable balls: {counts}  train: {model.train_seconds:.3f}s")
    return EXIT_OK


def cmd_predict(args) -> int:
    model, doc = load_model(args.model)
    label_col = args.label_col if args.label_col is not None else doc.get("label_column")
    table = load_csv(args.data, label_col, optional_label=True)
    if table.d != model.d:
        raise DataError(f"dimension mismatch: model expects d={model.d}, input has d={table.d}")
    X = normalize(table.rows, model.normalization)
    sc = scores(X, model)
    pred = [model.label_names[i] for i in predict_indices(X, model)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["prediction"]
    if args.scores:
        header += [f"score_{name}" for name in model.label_names]
    w.writerow(header)
    for i, label in enumerate(pred):
        row = [label]
        if args.scores:
            row += [repr(float(v)) for v in sc[i]]
        w.writerow(row)
    if args.out:
        atomic_write_text(args.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    if table.has_labels:
        msg = (f"accuracy: {accuracy(table.label_values, pred):.4f}  "
               f"macro-F1: {macro_f1(table.label_values, pred):.4f}  n={table.n}")
        print(msg, file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def _report_paths(report: str) -> tuple[Path, Path, Path]:
    p = Path(report)
    stem = p.with_suffix("") if p.suffix == ".json" else p
    return (p if p.suffix == ".json" else p.with_name(p.name + ".json"),
            stem.with_name(stem.name + ".txt"), stem.with_name(stem.name + ".timings.json"))


def cmd_crossval(args) -> int:
    apply_thread_setting()
    table = load_csv(args.data, _label_col(args.label_col))
    rep = cross_validate(table, k=args.folds, seed=args.seed, name=Path(args.data).stem)
    text = rep.to_text()
    if args.report:
        json_path, text_path, timing_path = _report_paths(args.report)
        atomic_write_text(json_path, rep.to_json())
        atomic_write_text(text_path, text)
        atomic_write_text(timing_path, json.dumps(
            {"folds": [{"fold": f.fold, "train_seconds": f.train_seconds,
                        "predict_seconds": f.predict_seconds} for f in rep.folds],
             "total_seconds": rep.total_seconds}, indent=2) + "\n")
    sys.stdout.write(text)
    print(rep.timings_text())
    return EXIT_OK


def ball_breakdown(model, c: int, k: int) -> dict:
    """Coding terms of a stored ball, recomputed from its summary statistics."""
    b = model.classes[c][k]
    K = model.constants
    has_neg = model.C > 1
    r_eff = max(b.radius, K.eps_r)
    terms = {
        "L_data": float(data_length(b.n, b.variances, K.eps_v)),
        "L_intr": float(intrusion_length(b.n, b.avg_boundary_risk, K.eps_num, has_neg)),
        "L_mar": float(margin_length(b.n, overlap(r_eff, b.center_neg_dist))),
        "L_cls": class_length(float(model.priors[c])),
    }
    terms["L_total"] = sum(terms.values())
    return terms


def cmd_inspect(args) -> int:
    model, _ = load_model(args.model)
    if args.class_ is not None and args.class_ not in model.label_names:
        raise DataError(f"unknown class {args.class_!r}; known: {', '.join(model.label_names)}")
    print(f"format_version {model.format_version}  unit {model.unit}  seed {model.seed}  "
          f"C={model.C}  d={model.d}  r0={model.r0:.6g}")
    for c, (name, balls) in enumerate(zip(model.label_names, model.classes)):
        if args.class_ is not None and name != args.class_:
            continue
        print(f"\nclass {name}  prior {model.priors[c]:.6f}  balls {len(balls)}")
        print(f"{'ball':>4} {'n':>6} {'radius':>10} {'rho_bar':>8} {'weight':>8} "
              f"{'L_data':>11} {'L_intr':>10} {'L_mar':>9} {'L_cls':>7} {'L_total':>11}  center")
        for k, b in enumerate(balls):
            t = ball_breakdown(model, c, k)
            center = " ".join(f"{v:.4f}" for v in b.center)
            print(f"{k:>4} {b.n:>6} {b.radius:>10.5f} {b.avg_boundary_risk:>8.4f} {b.weight:>8.4f} "
                  f"{t['L_data']:>11.3f} {t['L_intr']:>10.3f} {t['L_mar']:>9.3f} "
                  f"{t['L_cls']:>7.3f} {t['L_total']:>11.3f}  [{center}]")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mdlgbc", description="Boundary-aware granular-ball classifier.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("train", help="fit a model on a labeled CSV")
    t.add_argument("--data", required=True)
    t.add_argument("--label-col", help="label column name or index (default: last column)")
    t.add_argument("--model", required=True, help="output model file (JSON)")
    t.add_argument("--seed", type=int, default=DEFAULT_SEED)
    t.add_argument("--trace", help="write per-competition records as JSON lines")
    t.set_defaults(func=cmd_train)

    pr = sub.add_parser("predict", help="label the rows of a CSV")
    pr.add_argument("--model", required=True)
    pr.add_argument("--data", required=True)
    pr.add_argument("--label-col", help="label column to ignore (default: the training one)")
    pr.add_argument("--out", help="output CSV (default: stdout)")
    pr.add_argument("--scores", action="store_true", help="append one score column per class")
    pr.set_defaults(func=cmd_predict)

    cv = sub.add_parser("crossval", help="stratified k-fold cross-validation")
    cv.add_argument("--data", required=True)
    cv.add_argument("--label-col")
    cv.add_argument("--folds", type=int, default=10)
    cv.add_argument("--seed", type=int, default=DEFAULT_SEED)
    cv.add_argument("--report", help="report path; writes .json, .txt and .timings.json")
    cv.set_defaults(func=cmd_crossval)

    ins = sub.add_parser("inspect", help="list the stable balls of a model")
    ins.add_argument("--model", required=True)
    ins.add_argument("--class", dest="class_", help="only this class label")
    ins.set_defaults(func=cmd_inspect)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, OSError) as exc:  # DataError, ModelFormatError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
