"""Command-line interface.

Subcommands:

    run      episodic evaluation over a feature file, emits a report
    predict  fit on one support file, stream a query file, emit verdicts
    ablate   grid over num-threshold x metric (x lambda x escalations)
    inspect  summarize a feature file

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
``NFGCD_JOBS`` sets the default for --jobs.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from .classifier import MetricSpec, fit_support, incorporate_novel, predict as predict_query
from .config import METRIC_ALIASES, ConfigError, RunConfig
from .episodes import prepare_dataset, run_evaluation
from .featurefile import FeatureFileError, read_feature_file
from .metrics import mahalanobis_precision
from .preprocess import reduce_features, select_dims
from .report import emit_report, format_mean_std, render_float

THRESHOLD_CHOICES = ("half", "two-thirds", "three-quarters")
METRIC_CHOICES = ("euc", "cos", "mah")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is exit 1."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _default_jobs() -> int:
    raw = os.environ.get("NFGCD_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_model_flags(p: argparse.ArgumentParser):
    p.add_argument("--metric", choices=METRIC_CHOICES, default="euc")
    p.add_argument("--lambda", dest="ratio", type=float, default=0.4,
                   help="scale iteration ratio in (0,1)")
    p.add_argument("--iters", dest="max_iters", type=int, default=4,
                   help="terminal iteration count")
    p.add_argument("--num-threshold", choices=THRESHOLD_CHOICES, default="half",
                   help="active-class fraction above which an ambiguous query is novel")
    p.add_argument("--sigma-escalations", type=int, default=0,
                   help="times the scale upper bound may be raised before declaring novel")
    p.add_argument("--kernel-excite", type=float, default=1.5)
    p.add_argument("--kernel-inhibit", type=float, default=0.5)
    p.add_argument("--mah-ridge", type=float, default=1e-3)


def _add_preprocess_flags(p: argparse.ArgumentParser):
    p.add_argument("--le-k", type=int, default=15, help="kNN graph neighbors")
    p.add_argument("--le-heat", type=float, default=None,
                   help="heat-kernel scale (default: median kNN distance)")
    p.add_argument("--le-dims", type=int, default=None,
                   help="embedding dimensions (default: capacity rule; 0 disables the embedding)")


def _add_output_flags(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")


def build_parser() -> _Parser:
    parser = _Parser(prog="nfgcd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run_p = sub.add_parser("run", help="episodic evaluation")
    run_p.add_argument("--features", required=True)
    run_p.add_argument("--old", dest="n_old", type=int, default=5)
    run_p.add_argument("--new", dest="n_new", type=int, default=5)
    run_p.add_argument("--shots", type=int, default=10)
    run_p.add_argument("--episodes", type=int, default=600)
    run_p.add_argument("--query-cap", type=int, default=None)
    run_p.add_argument("--per-episode-refit", action="store_true")
    run_p.add_argument("--jobs", type=int, default=_default_jobs())
    _add_model_flags(run_p)
    _add_preprocess_flags(run_p)
    _add_output_flags(run_p)

    pred_p = sub.add_parser("predict", help="fit on a support file and stream a query file")
    pred_p.add_argument("--features", required=True, help="support feature file")
    pred_p.add_argument("--queries", required=True, help="query feature file")
    _add_model_flags(pred_p)
    _add_preprocess_flags(pred_p)
    _add_output_flags(pred_p)

    abl_p = sub.add_parser("ablate", help="grid over thresholds, metrics, lambdas, escalations")
    abl_p.add_argument("--features", required=True)
    abl_p.add_argument("--old", dest="n_old", type=int, default=5)
    abl_p.add_argument("--new", dest="n_new", type=int, default=5)
    abl_p.add_argument("--shots", type=int, default=10)
    abl_p.add_argument("--episodes", type=int, default=600)
    abl_p.add_argument("--query-cap", type=int, default=None)
    abl_p.add_argument("--jobs", type=int, default=_default_jobs())
    abl_p.add_argument("--thresholds", nargs="+", choices=THRESHOLD_CHOICES,
                       default=list(THRESHOLD_CHOICES))
    abl_p.add_argument("--metrics", nargs="+", choices=METRIC_CHOICES,
                       default=list(METRIC_CHOICES))
    abl_p.add_argument("--lambdas", nargs="+", type=float, default=[0.4])
    abl_p.add_argument("--escalations", nargs="+", type=int, default=[0])
    abl_p.add_argument("--iters", dest="max_iters", type=int, default=4)
    abl_p.add_argument("--kernel-excite", type=float, default=1.5)
    abl_p.add_argument("--kernel-inhibit", type=float, default=0.5)
    abl_p.add_argument("--mah-ridge", type=float, default=1e-3)
    _add_preprocess_flags(abl_p)
    _add_output_flags(abl_p)

    ins_p = sub.add_parser("inspect", help="summarize a feature file")
    ins_p.add_argument("--features", required=True)
    ins_p.add_argument("--out", type=str, default=None)
    ins_p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")

    return parser


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        features=args.features,
        episodes=getattr(args, "episodes", 1),
        n_old=getattr(args, "n_old", 5),
        n_new=getattr(args, "n_new", 5),
        shots=getattr(args, "shots", 10),
        query_cap=getattr(args, "query_cap", None),
        metric=METRIC_ALIASES[args.metric],
        kernel_excite=args.kernel_excite,
        kernel_inhibit=args.kernel_inhibit,
        ratio=args.ratio,
        max_iters=args.max_iters,
        num_threshold=args.num_threshold,
        sigma_escalations=args.sigma_escalations,
        le_k=args.le_k,
        le_heat=args.le_heat,
        le_dims=args.le_dims,
        per_episode_refit=getattr(args, "per_episode_refit", False),
        mah_ridge=args.mah_ridge,
        seed=args.seed,
        jobs=getattr(args, "jobs", 1),
        out=args.out,
        fmt=args.fmt,
    ).validate()


def _write_output(data: bytes, out: str | None):
    if out is not None:
        Path(out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))


def _cmd_run(args) -> int:
    config = _config_from_args(args)
    dataset = read_feature_file(config.features)
    report = run_evaluation(dataset, config)
    data = emit_report(report, config.fmt)
    _write_output(data, config.out)
    for name, summary in (("old", report.old), ("new", report.new), ("all", report.all)):
        print(f"{name}: {format_mean_std(summary.mean, summary.std)}")
    return 0


def _cmd_predict(args) -> int:
    config = _config_from_args(args)
    support_set = read_feature_file(config.features)
    query_set = read_feature_file(args.queries)
    if support_set.dim != query_set.dim:
        raise FeatureFileError(
            f"support dimension {support_set.dim} != query dimension {query_set.dim}"
        )

    support = support_set.features.astype(float)
    queries = query_set.features.astype(float)
    dims = config.le_dims
    if dims is None:
        dims = select_dims(support_set.n_classes)
    if dims == 0:
        dims = support_set.dim
    stacked = np.vstack([support, queries]) if query_set.n else support
    reduced, _ = reduce_features(
        stacked, dims=dims, k_neighbors=config.le_k, heat_scale=config.le_heat,
        fit_rows=np.arange(support.shape[0]),
    )
    support, queries = reduced[: support.shape[0]], reduced[support.shape[0] :]

    if config.metric == "mahalanobis":
        metric = MetricSpec("mahalanobis", mahalanobis_precision(support, config.mah_ridge))
    else:
        metric = MetricSpec(config.metric)
    clf = fit_support(
        support, support_set.labels,
        kernel=config.kernel(), metric=metric, ratio=config.ratio,
        max_iters=config.max_iters, novel_fraction=config.novel_fraction,
        sigma_escalations=config.sigma_escalations,
    )

    rows = []
    for i in range(queries.shape[0]):
        outcome = predict_query(clf, queries[i])
        if outcome.is_novel:
            clf, verdict = incorporate_novel(clf, queries[i])
            label = f"novel:{verdict}"
        else:
            cid = clf.classes.class_ids[outcome.class_index]
            label = support_set.class_names[cid] if cid < len(support_set.class_names) else str(cid)
        rows.append(
            {
                "query": i,
                "verdict": label,
                "novel": outcome.is_novel,
                "terminal_rule": outcome.terminal_rule,
                "trace": [[float(render_float(s)), n] for s, n in outcome.trace],
            }
        )

    if config.fmt == "json":
        data = (json.dumps({"config": _jsonable_config(config), "queries": rows},
                           indent=2, sort_keys=True) + "\n").encode()
    else:
        buf = io.StringIO()
        buf.write("query,verdict,novel,terminal_rule,evaluations\n")
        for r in rows:
            buf.write(f"{r['query']},{r['verdict']},{r['novel']},{r['terminal_rule']},{len(r['trace'])}\n")
        data = buf.getvalue().encode()
    _write_output(data, config.out)
    novel_count = sum(1 for r in rows if r["novel"])
    print(f"queries: {len(rows)}, novel: {novel_count}")
    return 0


def _jsonable_config(config: RunConfig) -> dict:
    return {k: v for k, v in config.echo().items()}


def _cmd_ablate(args) -> int:
    base = _config_from_args(_shim_ablate_args(args))
    dataset = read_feature_file(base.features)
    working, extras = prepare_dataset(dataset, base)

    rows = []
    for threshold in args.thresholds:
        for metric in args.metrics:
            for ratio in args.lambdas:
                for esc in args.escalations:
                    cfg = dataclasses.replace(
                        base,
                        num_threshold=threshold,
                        metric=METRIC_ALIASES[metric],
                        ratio=ratio,
                        sigma_escalations=esc,
                    ).validate()
                    report = run_evaluation(working, cfg, prepared=True)
                    rows.append(
                        {
                            "num_threshold": threshold,
                            "metric": METRIC_ALIASES[metric],
                            "lambda": ratio,
                            "sigma_escalations": esc,
                            "old_mean": float(render_float(report.old.mean)),
                            "old_std": float(render_float(report.old.std)),
                            "new_mean": float(render_float(report.new.mean)),
                            "new_std": float(render_float(report.new.std)),
                            "all_mean": float(render_float(report.all.mean)),
                            "all_std": float(render_float(report.all.std)),
                        }
                    )

    if base.fmt == "json":
        payload = {"config": _jsonable_config(base), "grid": rows}
        payload["config"].update(extras)
        data = (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()
    else:
        buf = io.StringIO()
        buf.write("num_threshold,metric,lambda,sigma_escalations,"
                  "old_mean,old_std,new_mean,new_std,all_mean,all_std\n")
        for r in rows:
            buf.write(
                f"{r['num_threshold']},{r['metric']},{render_float(r['lambda'])},"
                f"{r['sigma_escalations']},{render_float(r['old_mean'])},{render_float(r['old_std'])},"
                f"{render_float(r['new_mean'])},{render_float(r['new_std'])},"
                f"{render_float(r['all_mean'])},{render_float(r['all_std'])}\n"
            )
        data = buf.getvalue().encode()
    _write_output(data, base.out)
    print(f"grid rows: {len(rows)}")
    return 0


def _shim_ablate_args(args):
    """ablate has grid flags instead of single model flags; fill the singles for RunConfig."""
    ns = argparse.Namespace(**vars(args))
    ns.metric = args.metrics[0]
    ns.ratio = args.lambdas[0]
    ns.num_threshold = args.thresholds[0]
    ns.sigma_escalations = args.escalations[0]
    return ns


def _cmd_inspect(args) -> int:
    dataset = read_feature_file(args.features)
    counts = dataset.class_counts()
    if args.fmt == "json":
        payload = {
            "path": args.features,
            "samples": dataset.n,
            "dim": dataset.dim,
            "classes": [
                {"index": i, "name": name, "count": int(counts[i])}
                for i, name in enumerate(dataset.class_names)
            ],
        }
        data = (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()
    else:
        buf = io.StringIO()
        buf.write("index,name,count\n")
        for i, name in enumerate(dataset.class_names):
            buf.write(f"{i},{name},{int(counts[i])}\n")
        data = buf.getvalue().encode()
    _write_output(data, args.out)
    print(f"samples: {dataset.n}, dim: {dataset.dim}, classes: {dataset.n_classes}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "predict": _cmd_predict,
    "ablate": _cmd_ablate,
    "inspect": _cmd_inspect,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"nfgcd: {exc}", file=sys.stderr)
        return 1
    except (FeatureFileError, OSError, ValueError) as exc:
        print(f"nfgcd: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_cli())
