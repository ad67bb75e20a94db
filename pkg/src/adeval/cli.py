"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data or contract error.
Relative ``--out`` paths are placed under ``$ADEVAL_OUTPUT_DIR`` when set.
"""
import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import metrics, theory
from .data import DataError, SpecSyntaxError, generate_gaussian_circle, parse_generator_spec, resolve_source, save_csv
from .detectors import DETECTORS, DetectorSpec, ScoredSet
from .experiment import (
    default_jobs,
    difficulty_demo,
    emit_report,
    format_summary,
    repeat_injection_sweep,
    table1,
)
from .protocols import (
    POLICIES,
    PROTOCOLS,
    EvalResult,
    ProtocolConfig,
    parse_bool,
    read_kv,
    run_estimate_sweep,
    run_protocol,
)

OUTPUT_DIR_ENV = "ADEVAL_OUTPUT_DIR"

__all__ = ["main", "build_parser", "parse_generator_spec"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _cell_list(text):
    out = []
    for item in text.split(","):
        which, sep, alpha = item.strip().partition(":")
        if which not in ("easy", "hard") or not sep:
            raise argparse.ArgumentTypeError(f"expected easy:ALPHA or hard:ALPHA, got {item!r}")
        try:
            out.append((which, float(alpha)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"contamination {alpha!r} is not a number") from None
    return tuple(out)


def _add_common(p, jobs=False):
    p.add_argument("--seed", type=int, default=0, help="random seed (base seed for repetitions)")
    p.add_argument("--out", default=None, help="output file (.csv or .json)")
    p.add_argument("--config", default=None, help="key = value file supplying defaults; flags take precedence")
    if jobs:
        p.add_argument("--jobs", type=int, default=default_jobs(), help="worker processes")


def _add_detector(p):
    p.add_argument("--detector", choices=DETECTORS, default="gaussian", help="built-in scorer")
    p.add_argument("--knn-k", type=int, default=5, help="neighbour rank for the knn scorer")
    p.add_argument("--ridge", type=float, default=1e-6, help="variance ridge for the gaussian scorer")


def _add_protocol(p):
    p.add_argument("--data", default=None, help="CSV path or generator spec circle:n_normal,n_anomaly,radius,sigma")
    p.add_argument("--label-column", default="label", help="label column name for CSV input")
    p.add_argument("--protocol", choices=PROTOCOLS, default="recycling", help="evaluation protocol")
    p.add_argument("--beta", type=float, default=0.2, help="test-set fraction")
    p.add_argument("--threshold-policy", choices=POLICIES, default="estimated", help="how the F1 threshold is set")
    p.add_argument("--stratified", action="store_true", default=False, help="stratify the split by class")
    p.add_argument("--no-normalize", action="store_true", default=False, help="skip z-scoring on the clean train set")
    _add_detector(p)


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="adeval", description="Anomaly-detection evaluation protocols and metric bias.",
                     formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("generate", help="write a synthetic circle dataset as CSV", formatter_class=fmt)
    p.add_argument("--spec", default="circle:1600,400,2.5,0.1", help="generator spec")
    _add_common(p)

    p = sub.add_parser("evaluate", help="run one protocol and print the EvalResult as JSON", formatter_class=fmt)
    _add_protocol(p)
    p.add_argument("--scores-csv", default=None, help="score,label CSV of external scores; skips split and fit")
    _add_common(p)

    p = sub.add_parser("sweep-estimate", help="precision/recall/F1 against the estimated contamination",
                       formatter_class=fmt)
    _add_protocol(p)
    p.add_argument("--grid", type=_float_list, default=None, help="comma-separated alpha_hat values")
    p.add_argument("--steps", type=int, default=21, help="evenly spaced alpha_hat values in [0, 1] when --grid is absent")
    _add_common(p)

    p = sub.add_parser("sweep-inject", help="metrics against the number of test anomalies", formatter_class=fmt)
    _add_protocol(p)
    p.add_argument("--counts", type=_int_list, default=[10, 50, 100, 200, 400], help="anomaly counts to inject")
    p.add_argument("--reps", type=int, default=100, help="repetitions")
    _add_common(p, jobs=True)

    p = sub.add_parser("table1", help="four-column protocol comparison", formatter_class=fmt)
    p.add_argument("--data", default="circle:1900,100,2.5,0.1", help="CSV path or generator spec")
    _add_detector(p)
    p.add_argument("--reps", type=int, default=100, help="repetitions")
    p.add_argument("--format", choices=("csv", "json"), default=None, help="report format (default: from --out suffix)")
    _add_common(p, jobs=True)

    p = sub.add_parser("difficulty", help="easy/hard circle datasets at different contaminations",
                       formatter_class=fmt)
    p.add_argument("--easy-radius", type=float, default=2.5, help="circle radius of the easy dataset")
    p.add_argument("--hard-radius", type=float, default=2.1, help="circle radius of the hard dataset")
    p.add_argument("--n", type=int, default=2000, help="samples per dataset")
    p.add_argument("--sigma", type=float, default=0.1, help="noise on the anomaly circle")
    p.add_argument("--cells", type=_cell_list, default="easy:0.05,easy:0.20,hard:0.20",
                   help="comma-separated difficulty:contamination pairs")
    p.add_argument("--beta", type=float, default=0.2, help="test-set fraction")
    p.add_argument("--reps", type=int, default=100, help="repetitions")
    p.add_argument("--format", choices=("csv", "json"), default=None, help="report format (default: from --out suffix)")
    _add_common(p, jobs=True)

    p = sub.add_parser("theory", help="closed-form bias models", formatter_class=fmt)
    p.add_argument("what", choices=("toy-auc", "f1", "f1-surface", "toy-curve", "toy-thresholds"),
                   help="quantity to compute")
    p.add_argument("--p-plus", type=_float_list, default=[0.8], help="anomaly detection rate(s)")
    p.add_argument("--p-minus", type=_float_list, default=[0.8], help="normal detection rate(s)")
    p.add_argument("--alpha", type=_float_list, default=[0.05, 0.1, 0.2, 0.5], help="contamination rate(s)")
    p.add_argument("--steps", type=int, default=101, help="grid size for surfaces and curves")
    _add_common(p)
    parser.subcommands = dict(sub.choices)
    return parser


def _resolve_out(out):
    if out is None:
        return None
    path = Path(out)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _config_from_args(args):
    return ProtocolConfig(
        protocol=args.protocol,
        beta=args.beta,
        threshold_policy=args.threshold_policy,
        detector=DetectorSpec(kind=args.detector, k=args.knn_k, ridge=args.ridge),
        seed=args.seed,
        stratified=args.stratified,
        normalize=not args.no_normalize,
    )


def _need_data(args):
    if not args.data:
        raise UsageError(f"adeval {args.command}: error: --data is required")
    if str(args.data).startswith("circle:"):
        parse_generator_spec(args.data)
    return resolve_source(args.data, seed=args.seed, label_column=args.label_column)


def _write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def load_scores_csv(path):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"score", "label"} <= set(reader.fieldnames):
            raise DataError(f"{path}: expected columns 'score,label'")
        pairs = []
        for lineno, row in enumerate(reader, start=2):
            try:
                s, y = float(row["score"]), float(row["label"])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric score or label") from None
            if y not in (0.0, 1.0):
                raise DataError(f"{path}:{lineno}: label outside {{0, 1}}")
            pairs.append((s, int(y)))
    return ScoredSet.from_pairs(pairs)


def _evaluate_scores(scored, policy):
    alpha = scored.n_pos / len(scored)
    if policy == "optimal":
        thr, _ = metrics.optimal_f1_threshold(scored)
    else:
        thr = metrics.threshold_from_rate(scored, alpha)
    counts = metrics.confusion_at(scored, thr)
    bm = metrics.binary_metrics(counts)
    return EvalResult("scores", 0, bm.f1, bm.precision, bm.recall, metrics.auc(scored), metrics.avpr(scored),
                      thr.value, thr.rule, alpha, alpha, counts, 0, scored.n_neg, scored.n_pos)


def _cmd_generate(args):
    params = parse_generator_spec(args.spec)
    ds = generate_gaussian_circle(**params, seed=args.seed)
    out = _resolve_out(args.out)
    if out is None:
        writer = csv.writer(sys.stdout)
        writer.writerow([f"x{j}" for j in range(ds.dim)] + ["label"])
        for x, y in zip(ds.X, ds.y):
            writer.writerow([repr(float(v)) for v in x] + [int(y)])
    else:
        save_csv(ds, out)
        print(f"wrote {len(ds)} samples ({ds.n_anomalies} anomalies) to {out}")


def _cmd_evaluate(args):
    if args.scores_csv:
        result = _evaluate_scores(load_scores_csv(args.scores_csv), args.threshold_policy)
    else:
        result = run_protocol(_need_data(args), _config_from_args(args))
    text = result.to_json(indent=2)
    print(text)
    out = _resolve_out(args.out)
    if out:
        out.write_text(text + "\n", encoding="utf-8")


def _cmd_sweep_estimate(args):
    grid = args.grid if args.grid is not None else list(np.linspace(0.0, 1.0, args.steps))
    pts = run_estimate_sweep(_need_data(args), _config_from_args(args), grid)
    print(f"{'alpha_hat':>10} {'precision':>10} {'recall':>10} {'f1':>10}")
    for p in pts:
        print(f"{p.alpha_hat:10.4f} {p.precision:10.4f} {p.recall:10.4f} {p.f1:10.4f}")
    out = _resolve_out(args.out)
    if out:
        _write_rows(out, ["alpha_hat", "precision", "recall", "f1"], [[repr(v) for v in p] for p in pts])


def _cmd_sweep_inject(args):
    if not args.data:
        raise UsageError("adeval sweep-inject: error: --data is required")
    if str(args.data).startswith("circle:"):
        parse_generator_spec(args.data)
    else:
        resolve_source(args.data, label_column=args.label_column)
    res = repeat_injection_sweep(args.data, args.beta, args.counts, _config_from_args(args),
                                 repetitions=args.reps, base_seed=args.seed, jobs=args.jobs)
    rows = []
    print(f"{'count':>6} {'F1':>16} {'AVPR':>16} {'AUC':>16}")
    for c, v in res.items():
        if v is None:
            print(f"{c:>6} {'-':>16} {'-':>16} {'-':>16}")
            continue
        print(f"{c:>6}" + "".join(f"{v[m][0]:9.3f} ±{v[m][1]:.3f}" for m in ("f1", "avpr", "auc")))
        for m in ("f1", "auc", "avpr"):
            rows.append([c, m, f"{v[m][0]:.3f}", f"{v[m][1]:.3f}"])
    out = _resolve_out(args.out)
    if out:
        _write_rows(out, ["count", "metric", "mean", "std"], rows)


def _report(summary, args):
    print(format_summary(summary))
    out = _resolve_out(args.out)
    if out:
        fmt = args.format or ("json" if out.suffix.lower() == ".json" else "csv")
        emit_report(summary, fmt, out)


def _cmd_table1(args):
    if str(args.data).startswith("circle:"):
        parse_generator_spec(args.data)
    else:
        resolve_source(args.data)
    det = DetectorSpec(kind=args.detector, k=args.knn_k, ridge=args.ridge)
    _report(table1(args.data, det, repetitions=args.reps, base_seed=args.seed, jobs=args.jobs), args)


def _cmd_difficulty(args):
    summary = difficulty_demo(args.easy_radius, args.hard_radius, args.cells, n_total=args.n, noise_sigma=args.sigma,
                              repetitions=args.reps, beta=args.beta, base_seed=args.seed, jobs=args.jobs)
    _report(summary, args)


def _cmd_theory(args):
    out = _resolve_out(args.out)
    if args.what == "toy-auc":
        print(repr(theory.toy_auc()))
    elif args.what == "f1":
        for pp in args.p_plus:
            for pm in args.p_minus:
                for a in args.alpha:
                    print(f"p_plus={pp:g} p_minus={pm:g} alpha={a:g} f1={theory.f1_closed_form(pp, pm, a)!r}")
    elif args.what == "f1-surface":
        grid = np.linspace(0.0, 1.0, args.steps)
        rows = theory.f1_surface(args.p_plus, args.p_minus, grid)
        header = ("alpha", "p_plus", "p_minus", "f1")
        if out:
            theory.write_table(rows, header, out)
        else:
            print(",".join(header))
            for r in rows:
                print(",".join(repr(v) for v in r))
    elif args.what == "toy-curve":
        grid = np.linspace(0.0, 1.0, args.steps)
        for a in args.alpha:
            rows = theory.toy_f1_curve(a, grid)
            if out:
                path = out if len(args.alpha) == 1 else out.with_name(f"{out.stem}_alpha{a:g}{out.suffix}")
                theory.write_table(rows, ("t", "f1"), path)
            else:
                print(f"# alpha={a:g}\nt,f1")
                for r in rows:
                    print(f"{r[0]!r},{r[1]!r}")
    else:
        print(f"{'alpha':>8} {'t_fpfn':>10} {'f1_fpfn':>10} {'t_opt':>10} {'f1_opt':>10}")
        for a in args.alpha:
            t0 = theory.toy_fpfn_threshold(a)
            t1, f1 = theory.toy_optimal_threshold(a)
            print(f"{a:8.3f} {t0:10.6f} {theory.toy_f1(t0, a):10.6f} {t1:10.6f} {f1:10.6f}")


COMMANDS = {
    "generate": _cmd_generate,
    "evaluate": _cmd_evaluate,
    "sweep-estimate": _cmd_sweep_estimate,
    "sweep-inject": _cmd_sweep_inject,
    "table1": _cmd_table1,
    "difficulty": _cmd_difficulty,
    "theory": _cmd_theory,
}


def _apply_config_file(parser, args, argv):
    if not getattr(args, "config", None):
        return args
    kv = read_kv(args.config)
    sub = parser.subcommands[args.command]
    dests = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in kv.items():
        if key not in dests:
            raise UsageError(f"adeval {args.command}: error: unknown key {key!r} in {args.config}")
        action = dests[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = parse_bool(raw)
        elif action.type is not None:
            try:
                defaults[key] = action.type(raw)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"adeval {args.command}: error: bad value for {key!r}: {exc}") from None
        else:
            defaults[key] = raw
        if action.choices is not None and defaults[key] not in action.choices:
            raise UsageError(f"adeval {args.command}: error: {key!r} must be one of {list(action.choices)}")
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _apply_config_file(parser, args, argv)
        COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except SpecSyntaxError as exc:
        print(f"adeval: usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"adeval: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
