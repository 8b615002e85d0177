"""Command-line entry point: ``costfusion {costmat,fuse,experiment,synth}``."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import dataio
from .core import ISIC_CLASSES, ISIC_SEVERITY, ClassSchema
from .costmat import DEFAULT_HI, DEFAULT_LO, CostMatrixSpec, build_cost_matrix
from .fusion import FusionEngine
from .harness import DEFAULT_N_LIST, DEFAULT_REPETITIONS, Method, run_subset_experiment
from .synth import SyntheticPoolSpec, generate_pool

CLI_METHODS = {"max-voting": "max_voting", "average": "average", "af": "af", "cs-af": "cs_af"}


class CLIError(Exception):
    pass


def _names(s: str) -> list:
    return [x.strip() for x in s.split(",") if x.strip()]


def _ints(s: str) -> list:
    try:
        return [int(x) for x in _names(s)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def _threads(n):
    return n if n is not None else (os.cpu_count() or 1)


def cmd_costmat_build(args):
    schema = ClassSchema.from_severity(_names(args.classes), _names(args.severity))
    if args.reverse:
        schema = schema.reversed()
    spec = CostMatrixSpec(schema, offdiag_scale_min=args.lo, offdiag_scale_max=args.hi,
                          round_offdiag=not args.no_round)
    dataio.write_cost_matrix(args.out, build_cost_matrix(spec))


def cmd_fuse(args):
    method = CLI_METHODS[args.method]
    if method == "cs_af" and not args.cost_matrix:
        raise CLIError("--method cs-af requires --cost-matrix")
    if method == "af" and args.cost_matrix:
        raise CLIError("--method af does not take --cost-matrix (it uses uniform costs); use cs-af")
    manifest = dataio.load_manifest(args.manifest)
    val, test = dataio.load_pool(manifest, renormalize=args.renormalize, workers=_threads(args.threads))
    costs = {}
    if args.cost_matrix:
        costs[Path(args.cost_matrix).stem] = dataio.read_cost_matrix(args.cost_matrix, manifest.schema)
    for p in args.eval_cost_matrix or ():
        costs[Path(p).stem] = dataio.read_cost_matrix(p, manifest.schema)
    cost = costs[Path(args.cost_matrix).stem] if args.cost_matrix else None
    engine = FusionEngine.fit(method, val, cost, args.alpha)
    pred, scores, _ = engine.decide(test.probs)
    out = Path(args.out)
    dataio.write_fused_predictions(out / "predictions.csv", test.sample_ids, pred, scores, manifest.schema)
    if test.labels is not None:
        report = dataio.evaluation_report({args.method: engine}, test, costs)
        if args.format == "json":
            dataio.write_report(report, out / "report.json", "json")
        else:
            dataio.write_report(dataio.per_class_table(report), out / "report.csv", "csv")
    else:
        print("test split has no labels; wrote predictions only", file=sys.stderr)


def cmd_experiment(args):
    manifest = dataio.load_manifest(args.manifest)
    val, test = dataio.load_pool(manifest, workers=_threads(args.threads))
    costs = {}
    for p in _names(args.cost_matrix or ""):
        name = Path(p).stem
        if name in costs:
            raise CLIError(f"two cost matrices share the name {name!r}")
        costs[name] = dataio.read_cost_matrix(p, manifest.schema)
    methods = []
    for m in _names(args.methods):
        if m not in CLI_METHODS:
            raise CLIError(f"unknown method {m!r}; choose from {sorted(CLI_METHODS)}")
        if m == "cs-af":
            if not costs:
                raise CLIError("cs-af needs at least one --cost-matrix")
            methods.extend(Method("cs_af", c) for c in costs)
        else:
            methods.append(Method(CLI_METHODS[m]))
    n_list = args.N if args.N else [n for n in DEFAULT_N_LIST if n <= test.k]
    report = run_subset_experiment(val, test, methods, n_list, args.reps, args.seed, costs, args.alpha,
                                   workers=_threads(args.threads))
    out = Path(args.out_dir)
    dataio.write_report(report.curve_rows(), out / "curves.csv", "csv")
    if args.format == "json":
        dataio.write_report(report.to_dict(), out / "report.json", "json")


def _parse_bias(items, schema: ClassSchema) -> tuple:
    """``CLASSIFIERS:FROM>TO:P`` with CLASSIFIERS like ``0-23`` or ``0,2,4``."""
    out = []
    for item in items or ():
        try:
            clfs, pair, p = item.split(":")
            src, dst = pair.split(">")
            idx = []
            for part in clfs.split(","):
                if "-" in part:
                    a, b = part.split("-")
                    idx.extend(range(int(a), int(b) + 1))
                else:
                    idx.append(int(part))
            for i in idx:
                out.append((i, schema.index(src), schema.index(dst), float(p)))
        except ValueError as e:
            raise CLIError(f"bad --bias {item!r} (expected CLASSIFIERS:FROM>TO:P): {e}") from None
    return tuple(out)


def cmd_synth(args):
    schema = ClassSchema.from_severity(_names(args.classes), _names(args.severity))
    spec = SyntheticPoolSpec(
        seed=args.seed, k=args.k, schema=schema, n_val=args.n_val, n_test=args.n_test,
        accuracy_range=(args.acc_lo, args.acc_hi), sharpness_correct=args.sharpness_correct,
        sharpness_wrong=args.sharpness_wrong, confusion_bias=_parse_bias(args.bias, schema),
    )
    pool = generate_pool(spec, workers=_threads(args.threads))
    print(dataio.write_pool(args.out_dir, pool.val, pool.test))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="costfusion", description="Cost-sensitive active fusion of classifier posteriors.")
    sub = parser.add_subparsers(dest="command", required=True)

    cm = sub.add_parser("costmat", help="cost-matrix tools")
    cm_sub = cm.add_subparsers(dest="costmat_command", required=True)
    b = cm_sub.add_parser("build", help="build a cost matrix from a severity ranking")
    b.add_argument("--classes", default=",".join(ISIC_CLASSES))
    b.add_argument("--severity", default=",".join(ISIC_SEVERITY), help="class names, most severe first")
    b.add_argument("--out", required=True)
    b.add_argument("--reverse", action="store_true", help="use the reversed severity ranking")
    b.add_argument("--lo", type=float, default=DEFAULT_LO)
    b.add_argument("--hi", type=float, default=DEFAULT_HI)
    b.add_argument("--no-round", action="store_true")
    b.set_defaults(func=cmd_costmat_build)

    f = sub.add_parser("fuse", help="fit objective weights on val, fuse the test split")
    f.add_argument("--manifest", required=True)
    f.add_argument("--method", required=True, choices=sorted(CLI_METHODS))
    f.add_argument("--cost-matrix")
    f.add_argument("--eval-cost-matrix", action="append", help="extra cost matrix for total-cost reporting")
    f.add_argument("--alpha", type=float, default=0.5)
    f.add_argument("--renormalize", action="store_true", help="rescale rows that do not sum to one")
    f.add_argument("--format", choices=("json", "csv"), default="json")
    f.add_argument("--threads", type=int)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fuse)

    e = sub.add_parser("experiment", help="random-subset experiment over subset sizes")
    e.add_argument("--manifest", required=True)
    e.add_argument("--methods", default="max-voting,average,af,cs-af")
    e.add_argument("--N", type=_ints, help=f"subset sizes (default {','.join(map(str, DEFAULT_N_LIST))}, capped at k)")
    e.add_argument("--reps", type=int, default=DEFAULT_REPETITIONS)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--cost-matrix", help="comma-separated cost-matrix CSVs; named by file stem")
    e.add_argument("--alpha", type=float, default=0.5)
    e.add_argument("--format", choices=("json", "csv"), default="json")
    e.add_argument("--threads", type=int)
    e.add_argument("--out-dir", required=True)
    e.set_defaults(func=cmd_experiment)

    s = sub.add_parser("synth", help="write a seeded synthetic classifier pool")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--k", type=int, default=48)
    s.add_argument("--classes", default=",".join(ISIC_CLASSES))
    s.add_argument("--severity", default=",".join(ISIC_SEVERITY))
    s.add_argument("--n-val", type=int, default=1600)
    s.add_argument("--n-test", type=int, default=4000)
    s.add_argument("--acc-lo", type=float, default=0.55)
    s.add_argument("--acc-hi", type=float, default=0.85)
    s.add_argument("--sharpness-correct", type=float, default=4.0)
    s.add_argument("--sharpness-wrong", type=float, default=1.5)
    s.add_argument("--bias", action="append", help="CLASSIFIERS:FROM>TO:P, e.g. 0-23:MEL>BKL:0.3 (repeatable)")
    s.add_argument("--threads", type=int)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (CLIError, ValueError, OSError) as e:
        print(f"costfusion: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
