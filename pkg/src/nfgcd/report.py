"""Report serialization: JSON and CSV with fixed float rendering.

Floats are rendered with six decimal places everywhere so that report
bytes are reproducible across runs and platforms (golden-file friendly).
"""

from __future__ import annotations

import io
import json

from .episodes import EvaluationReport


def render_float(x: float) -> str:
    return f"{x:.6f}"


def format_mean_std(mean: float, std: float) -> str:
    return f"{render_float(mean)} ± {render_float(std)}"


def _rounded(x: float) -> float:
    return float(render_float(x))


def report_to_dict(report: EvaluationReport) -> dict:
    episodes = []
    for i, s in enumerate(report.per_episode):
        episodes.append(
            {
                "index": i,
                "old_acc": _rounded(s.old_acc),
                "new_acc": _rounded(s.new_acc),
                "all_acc": _rounded(s.all_acc),
                "n_old_queries": s.n_old_queries,
                "n_new_queries": s.n_new_queries,
                "n_minted": s.n_minted,
                "vacuous_old": s.vacuous_old,
                "vacuous_new": s.vacuous_new,
            }
        )
    aggregate = {}
    for name, summary in (("old", report.old), ("new", report.new), ("all", report.all)):
        aggregate[name] = {
            "mean": _rounded(summary.mean),
            "std": _rounded(summary.std),
            "formatted": format_mean_std(summary.mean, summary.std),
        }
    return {
        "config": _jsonable(report.config_echo),
        "episodes": episodes,
        "aggregate": aggregate,
        "single_episode": report.single_episode,
    }


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float):
        return _rounded(value)
    if hasattr(value, "item"):  # numpy scalars
        return _jsonable(value.item())
    return value


def report_to_json_bytes(report: EvaluationReport) -> bytes:
    text = json.dumps(report_to_dict(report), indent=2, sort_keys=True)
    return (text + "\n").encode("utf-8")


def report_to_csv_bytes(report: EvaluationReport) -> bytes:
    """Per-episode rows plus one aggregate row per accuracy metric."""
    buf = io.StringIO()
    buf.write("episode,old_acc,new_acc,all_acc\n")
    for i, s in enumerate(report.per_episode):
        buf.write(
            f"{i},{render_float(s.old_acc)},{render_float(s.new_acc)},{render_float(s.all_acc)}\n"
        )
    for name, summary in (("old_acc", report.old), ("new_acc", report.new), ("all_acc", report.all)):
        buf.write(
            f"aggregate,{name},{render_float(summary.mean)},{render_float(summary.std)}\n"
        )
    return buf.getvalue().encode("utf-8")


def emit_report(report: EvaluationReport, fmt: str) -> bytes:
    if fmt == "json":
        return report_to_json_bytes(report)
    if fmt == "csv":
        return report_to_csv_bytes(report)
    raise ValueError(f"unknown report format {fmt!r}")


def parse_report_json(data: bytes) -> dict:
    return json.loads(data.decode("utf-8"))
