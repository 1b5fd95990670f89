"""Command line entry point: ``pcvaug generate | diagnose | benchmark``.

Exit codes: 0 success, 1 runtime failure, 2 invalid arguments or inputs,
3 (diagnose only) a Procrustean rule check failed.
"""

import argparse
import logging
import os
import sys
import warnings

import numpy as np
import pandas as pd

from . import __version__
from .bench import CellDiverged, ConfigError, load_config, run_experiment, write_outputs
from .dataio import read_csv, read_meta, sidecar_path, write_csv, write_meta
from .diagnostics import (RULE_TOL, RuleReport, check_rules_pls, check_rules_svd,
                          check_rules_svd_per_class)
from .engine import augment, class_plans
from .errors import (BadSegmentCount, ClassTooSmall, CRatioExceeded, ParseError, PcvError,
                     RankDeficient, SchemaMismatch, SegmentRankDeficient, ShapeMismatch,
                     UnknownLevel, NonNumericCell, ZeroVarianceColumn)
from .mixed import encode
from .resampling import SCHEMES, derive_seeds, make_splits

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_RULES = 0, 1, 2, 3


class UsageError(Exception):
    def __init__(self, arg, message):
        self.arg = arg
        super().__init__(f"{arg}: {message}")


def _usage_arg(exc):
    """Map a library error to the command line argument responsible for it."""
    if isinstance(exc, (BadSegmentCount, ClassTooSmall)):
        return "--nseg"
    if isinstance(exc, (SegmentRankDeficient, RankDeficient)):
        return "--nlv"
    if isinstance(exc, (ParseError, UnknownLevel, NonNumericCell, ZeroVarianceColumn)):
        return "--data"
    if isinstance(exc, SchemaMismatch):
        return "--schema"
    return None


def _load(data, schema):
    try:
        table, sch = read_csv(data, schema)
    except FileNotFoundError as exc:
        raise UsageError("--schema" if schema and exc.filename == schema else "--data",
                         f"no such file {exc.filename}") from None
    return encode(table, sch)


def _positive_int(name, value, low=1):
    if value < low:
        raise UsageError(name, f"must be >= {low}, got {value}")


def cmd_generate(args):
    enc = _load(args.data, args.schema)
    _positive_int("--nlv", args.nlv)
    _positive_int("--nsets", args.nsets, 0)
    if args.nlv > min(enc.X.shape):
        raise UsageError("--nlv", f"at most {min(enc.X.shape)} components for a "
                         f"{enc.X.shape[0]}x{enc.X.shape[1]} matrix")
    if args.method == "pls" and enc.y is None and enc.classes is None:
        raise UsageError("--method", "pls needs a response or class column in the schema")
    if args.per_class and (args.method != "svd" or enc.classes is None):
        raise UsageError("--per-class", "needs --method svd and a class column")
    if args.nseg < 2 or args.nseg > enc.X.shape[0]:
        exc = BadSegmentCount(args.nseg, enc.X.shape[0])
        raise UsageError("--nseg", f"BadSegmentCount: {exc}")

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CRatioExceeded)
        aug = augment(enc.X, y=enc.y, classes=enc.classes, method=args.method,
                      ncomp=args.nlv, K=args.nseg, n_sets=args.nsets, seed=args.seed,
                      scheme=args.scheme, standardize=args.standardize,
                      scale_scores=args.scale_scores, per_class=args.per_class,
                      cratio_max=args.cratio_max, jobs=args.jobs)
    for w in caught:
        if issubclass(w.category, CRatioExceeded):
            print(f"warning: {w.message}", file=sys.stderr)

    table = pd.DataFrame(aug.X, columns=enc.names)
    target = enc.schema.target
    if target is not None:
        table[target.name] = aug.y if enc.y is not None else aug.classes
    meta = dict(aug.meta)
    meta.update({"data": args.data, "schema": args.schema, "rows_original": enc.X.shape[0],
                 "rows_total": aug.nrows, "columns": enc.names,
                 "cratio_per_set": [None if p.cratio is None else p.cratio.max_abs
                                    for p in aug.pvsets]})
    write_csv(table, args.out, meta=meta)
    print(f"wrote {aug.nrows} rows x {enc.X.shape[1]} predictors to {args.out} "
          f"({args.nsets} PV-sets, metadata in {sidecar_path(args.out)})")
    return EXIT_OK


def _resolve(args, meta, key, flag, default=None):
    v = getattr(args, key)
    if v is None:
        v = meta.get(key, default)
    if v is None:
        raise UsageError(flag, "not given and not found in the plan/sidecar")
    return v


def cmd_diagnose(args):
    enc = _load(args.data, args.schema)
    plan_path = args.plan or sidecar_path(args.pvset)
    meta = {}
    if args.plan or os.path.exists(plan_path):
        try:
            meta = read_meta(plan_path)
        except FileNotFoundError:
            raise UsageError("--plan", f"no such file {plan_path}") from None
    if args.seed is None and "set_seeds" not in meta:
        raise UsageError("--seed", "give --seed or --plan (no sidecar next to the PV-set)")

    method = _resolve(args, meta, "method", "--method")
    ncomp = int(_resolve(args, {"nlv": meta.get("A")}, "nlv", "--nlv"))
    K = int(_resolve(args, {"nseg": meta.get("K")}, "nseg", "--nseg", 4))
    scheme = _resolve(args, meta, "scheme", "--scheme", "random")
    standardize = bool(_resolve(args, meta, "standardize", "--standardize", False))
    scale_scores = bool(_resolve(args, meta, "scale_scores", "--scale-scores", True))
    cratio_max = float(_resolve(args, meta, "cratio_max", "--cratio-max", 2.0))
    per_class = args.per_class if args.per_class is not None else meta.get("per_class")
    if per_class is None:
        per_class = method == "svd" and enc.classes is not None

    try:
        pv, _ = read_csv(args.pvset)
    except FileNotFoundError:
        raise UsageError("--pvset", f"no such file {args.pvset}") from None
    missing = [n for n in enc.names if n not in pv.columns]
    if missing:
        raise ShapeMismatch(f"PV-set file lacks predictor columns {missing[:5]}")
    P = pv[enc.names].to_numpy(dtype=np.float64)
    n = enc.X.shape[0]
    if P.shape[0] % n:
        raise ShapeMismatch(f"PV-set file has {P.shape[0]} rows, not a multiple of {n}")
    blocks = P.shape[0] // n
    # generate writes the original rows first; a bare PV-set file has none
    start = 1 if blocks > 1 and np.array_equal(P[:n], enc.X) else 0
    n_sets = blocks - start
    if args.seed is not None:
        set_seeds = derive_seeds(args.seed, n_sets)
    else:
        set_seeds = [int(s) for s in meta["set_seeds"]]
        if len(set_seeds) != n_sets:
            raise ShapeMismatch(f"plan lists {len(set_seeds)} sets, file holds {n_sets}")

    report = RuleReport(tol=args.tol)
    for i, s in enumerate(set_seeds):
        Xpv = P[(start + i) * n:(start + i + 1) * n]
        if method == "svd" and per_class:
            sub = check_rules_svd_per_class(enc.X, Xpv, enc.classes,
                                            class_plans(enc.classes, K, s, scheme), ncomp,
                                            scale_scores, standardize, args.tol)
        elif method == "svd":
            sub = check_rules_svd(enc.X, Xpv, make_splits(n, K, s, scheme), ncomp,
                                  scale_scores, standardize, args.tol)
        else:
            y = enc.y
            if y is None:
                y = (enc.classes == np.unique(enc.classes)[-1]).astype(float)
            sub = check_rules_pls(enc.X, y, Xpv, make_splits(n, K, s, scheme), ncomp,
                                  standardize, cratio_max, args.tol)
        for e in sub.entries:
            e["set"] = i
        report.merge(sub)

    for rule in sorted({e["rule"] for e in report.entries}):
        print(f"{rule}: max relative deviation {report.max_dev(rule):.3e} "
              f"(tol {args.tol:g})")
    if report.cratio is not None:
        print(f"c-ratio: max |c_k/c| = {report.cratio.max_abs:.3g}")
    print("PASS" if report.passed else "FAIL")
    if args.report:
        write_meta(report.to_dict(), args.report)
    return EXIT_OK if report.passed else EXIT_RULES


def cmd_benchmark(args):
    try:
        cfg = load_config(args.config)
    except FileNotFoundError:
        raise UsageError("--config", f"no such file {args.config}") from None
    except ConfigError as exc:
        raise UsageError("--config", str(exc)) from None
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    if args.repeats is not None:
        cfg["repeats"] = args.repeats
    try:
        results = run_experiment(cfg)
    except ConfigError as exc:
        raise UsageError("--config", str(exc)) from None
    out = args.out or os.path.join(os.path.dirname(os.path.abspath(args.config)),
                                   f"{cfg['dataset']}_results")
    paths = write_outputs(results, out, figures=not args.no_figures)
    with open(os.path.join(out, "summary.txt")) as fh:
        sys.stdout.write(fh.read())
    print(f"wrote {len(paths)} files to {out}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="pcvaug", description="Procrustes cross-validation "
                                "data augmentation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def method_opts(sp, required):
        sp.add_argument("--method", choices=("svd", "pls"), required=required,
                        default=None)
        sp.add_argument("--nlv", type=int, required=required, default=None,
                        help="number of latent variables A")
        sp.add_argument("--nseg", type=int, default=4 if required else None,
                        help="number of cross-validation segments K (default 4)")
        sp.add_argument("--scheme", choices=SCHEMES, default="random" if required else None)
        sp.add_argument("--standardize", action=argparse.BooleanOptionalAction,
                        default=False if required else None)
        sp.add_argument("--scale-scores", action=argparse.BooleanOptionalAction,
                        default=True if required else None)
        sp.add_argument("--per-class", action=argparse.BooleanOptionalAction, default=None)
        sp.add_argument("--cratio-max", type=float, default=2.0 if required else None)

    g = sub.add_parser("generate", help="write training data stacked with PV-sets")
    g.add_argument("--data", required=True)
    g.add_argument("--schema", default=None)
    method_opts(g, True)
    g.add_argument("--nsets", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--jobs", type=int, default=1)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("diagnose", help="check the Procrustean rules of PV-sets")
    d.add_argument("--data", required=True)
    d.add_argument("--schema", default=None)
    d.add_argument("--pvset", required=True)
    d.add_argument("--plan", default=None,
                   help="sidecar JSON with the generation settings and set seeds")
    d.add_argument("--seed", type=int, default=None)
    method_opts(d, False)
    d.add_argument("--tol", type=float, default=RULE_TOL)
    d.add_argument("--report", default=None, help="write the rule report as JSON")
    d.set_defaults(func=cmd_diagnose)

    b = sub.add_parser("benchmark", help="run an MLP augmentation experiment")
    b.add_argument("--config", required=True)
    b.add_argument("--out", default=None)
    b.add_argument("--jobs", type=int, default=None)
    b.add_argument("--repeats", type=int, default=None)
    b.add_argument("--no-figures", action="store_true")
    b.set_defaults(func=cmd_benchmark)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ShapeMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CellDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except PcvError as exc:
        arg = _usage_arg(exc)
        if arg is not None:
            print(f"error: {arg}: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
