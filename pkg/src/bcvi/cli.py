"""Command-line entry point: ``bcvi generate|run|plot|accuracy``.

Exit codes: 0 success, 2 config, 3 data, 4 clustering, 5 index,
6 Bayesian step, 7 output.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import pipeline
from .clustering import ALGORITHMS, RunOptions, best_of_restarts
from .datasets import clustering_accuracy, generate_mixture, load_csv, write_csv
from .errors import BcviError, ConfigError, DataError, OutputError

# flag name -> config key; every flag value is kept as text and parsed by
# PipelineConfig.from_mapping so files and flags share one grammar
RUN_FLAGS = {
    "data": "CSV file to cluster",
    "label-column": "label column (header name or 1-based index)",
    "algorithm": f"clustering algorithm {ALGORITHMS} (default follows --index)",
    "m": "FCM fuzziness (default 2)",
    "K": "largest cluster count reported (clusterings are fitted up to K+1)",
    "index": f"validity index {pipeline.INDICES}",
    "q": "DB scatter order (default 2)",
    "t": "DB separation order (default 2)",
    "gamma": "WP representative exponent (default m)",
    "prior": "dirichlet or gd",
    "alpha-profile": "flat, small, moderate or large (weights x sqrt(n))",
    "alpha-base": "profile weights 'in-range,out-of-range'",
    "alpha": "explicit comma-separated alpha list",
    "beta": "explicit comma-separated beta list (gd)",
    "restarts": "clustering restarts per k (default 20)",
    "seed": f"master seed (default ${pipeline.SEED_ENV} or 0)",
    "max-iterations": "iteration cap per clustering run",
    "tolerance": "centroid displacement tolerance",
    "top-m": "size of the reported confidence set",
    "workers": "threads used to fit different k concurrently",
    "require-accuracy": "fail when labelled accuracy is below this fraction",
    "report": "write the JSON report here (default: stdout)",
    "plot": "write error-bar CSV (k,mean,lo,hi) here",
    "total-n": "mixture size (when no --data)",
    "mixture-seed": "mixture sampling seed (default: --seed)",
}


def _add_mixture_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--component", action="append", metavar="SPEC",
                   help="mixture component '<shape> <weight> <center> <spread>' (repeatable)")


def _collect(args: argparse.Namespace, keys) -> dict[str, list[str]]:
    out = {}
    for key in keys:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            out[key] = [str(value)]
    if getattr(args, "component", None):
        out["component"] = list(args.component)
    return out


def _merged(args, keys) -> dict[str, list[str]]:
    values = pipeline.read_config_file(args.config) if args.config else {}
    flags = _collect(args, keys)
    if "component" in flags:
        values.pop("component", None)
    if "data" in flags:
        for key in ("component", "total-n", "mixture-seed"):
            values.pop(key, None)
    values.update(flags)
    return values


def cmd_generate(args) -> int:
    values = _merged(args, ["total-n", "mixture-seed", "seed"])
    seed = int(values["seed"][-1]) if "seed" in values else None
    spec = pipeline.mixture_from_mapping(values, seed)
    data = generate_mixture(spec)
    try:
        write_csv(data, args.out)
    except OSError as e:
        raise OutputError(f"cannot write {args.out}: {e}")
    print(f"wrote {data.n} points ({data.p}-D, {len(spec.components)} components) to {args.out}")
    return 0


def cmd_run(args) -> int:
    values = _merged(args, RUN_FLAGS)
    config = pipeline.PipelineConfig.from_mapping(values)
    result = pipeline.run_pipeline(config)
    report = result.report
    if config.report is None:
        sys.stdout.write(report.to_json())
        return 0
    meta = report.metadata
    print(f"{meta['index'].upper()} on {meta['data']} (n={meta['n']}, {meta['algorithm']}), "
          f"{meta['prior']['kind']} prior")
    print(f"{'k':>3} {'index':>14} {'r_k':>9} {'BCVI':>9} {'sd':>9} {'rank':>4}")
    for rec in report.records:
        print(f"{rec.k:>3} {rec.gi_value:>14.6g} {rec.r:>9.4f} {rec.posterior_mean:>9.4f} "
              f"{rec.posterior_sd:>9.4f} {rec.rank:>4}")
    cs = meta["confidence_set"]
    print(f"confidence set {cs['members']} carries posterior mass {cs['mass']:.4f}")
    if meta["accuracy"] is not None:
        print(f"accuracy at k={meta['accuracy_k']}: {meta['accuracy']:.4f}")
    return 0


def cmd_plot(args) -> int:
    try:
        with open(args.report) as fh:
            text = fh.read()
    except OSError as e:
        raise DataError(f"cannot read report {args.report}: {e}")
    report = pipeline.ReportBundle.from_json(text)
    pipeline.emit_plot_data(report, args.out)
    print(f"wrote {len(report.records)} rows to {args.out}")
    return 0


def cmd_accuracy(args) -> int:
    data = load_csv(args.data, args.label_column)
    if data.labels is None:
        raise DataError("accuracy needs a label column")
    k = args.k if args.k is not None else data.n_classes
    seed = args.seed if args.seed is not None else pipeline.default_seed()
    opts = RunOptions(args.max_iterations, args.tolerance, args.restarts, seed)
    cl = best_of_restarts(args.algorithm, data, k, args.m, opts)
    assign = cl.assignments if args.algorithm == "kmeans" else cl.hard_assignments()
    acc = clustering_accuracy(data.labels, assign)
    print(json.dumps({"accuracy": acc, "algorithm": args.algorithm, "k": k, "n": data.n}, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcvi", description="Bayesian cluster validity index")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a labelled mixture to CSV")
    g.add_argument("--config", help="key = value file with component/total-n/mixture-seed")
    _add_mixture_flags(g)
    g.add_argument("--total-n")
    g.add_argument("--mixture-seed")
    g.add_argument("--seed")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="cluster, score, and compute the BCVI report")
    r.add_argument("--config", help="key = value file; flags override it")
    for key, text in RUN_FLAGS.items():
        r.add_argument(f"--{key}", dest=key.replace("-", "_"), help=text)
    _add_mixture_flags(r)
    r.set_defaults(func=cmd_run)

    p = sub.add_parser("plot", help="turn a JSON report into error-bar CSV")
    p.add_argument("report")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    a = sub.add_parser("accuracy", help="clustering accuracy against labels")
    a.add_argument("data")
    a.add_argument("--label-column", required=True)
    a.add_argument("--k", type=int, help="cluster count (default: number of classes)")
    a.add_argument("--algorithm", choices=ALGORITHMS, default="kmeans")
    a.add_argument("--m", type=float, default=2.0)
    a.add_argument("--restarts", type=int, default=20)
    a.add_argument("--seed", type=int)
    a.add_argument("--max-iterations", type=int, default=200)
    a.add_argument("--tolerance", type=float, default=1e-6)
    a.set_defaults(func=cmd_accuracy)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return ConfigError.exit_code if e.code else 0
    try:
        return args.func(args)
    except BcviError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
