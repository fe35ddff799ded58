"""Episodic evaluation: sampling, sequential prediction, and accuracy scoring.

An episode draws a handful of "old" classes (with a labeled support set)
and "new" classes (queries only). The query stream is processed strictly
in order: a novel verdict mints a fresh pseudo-class and is incorporated
into the classifier before the next query, so stream order matters and
is fixed by the episode seed.

Scoring follows the usual discovery protocol: old-class queries must
receive their true class id; new-class queries are scored after an
optimal one-to-one assignment between minted pseudo-classes and true new
classes (assignment-based matching is an evaluation-protocol choice, not
part of the classifier). Old queries predicted as a pseudo-class count
as errors, as do new queries predicted as an old class.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .classifier import fit_support, incorporate_novel, predict
from .config import RunConfig
from .featurefile import FeatureSet
from .metrics import MetricSpec, mahalanobis_precision
from .preprocess import reduce_features, select_dims


@dataclass(frozen=True)
class EpisodeSpec:
    n_old: int = 5
    n_new: int = 5
    shots: int = 10
    seed: int = 0
    query_cap: Optional[int] = None

    def __post_init__(self):
        if self.n_old < 1:
            raise ValueError(f"n_old must be >= 1, got {self.n_old}")
        if self.n_new < 0:
            raise ValueError(f"n_new must be >= 0, got {self.n_new}")
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")


@dataclass(frozen=True)
class Episode:
    """One sampled task: support rows from old classes, a shuffled mixed query stream."""

    support_features: np.ndarray
    support_labels: np.ndarray
    query_features: np.ndarray
    query_labels: np.ndarray
    query_is_new: np.ndarray
    support_ids: np.ndarray  # dataset row indices
    query_ids: np.ndarray
    old_classes: tuple[int, ...]
    new_classes: tuple[int, ...]
    seed: int


def sample_episode(dataset: FeatureSet, spec: EpisodeSpec, rng=None) -> Episode:
    """Draw one episode; deterministic given the dataset and ``spec.seed``."""
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    labels = dataset.labels
    classes = np.unique(labels)
    needed = spec.n_old + spec.n_new
    if classes.size < needed:
        raise ValueError(
            f"dataset has {classes.size} classes, episode needs {needed} "
            f"({spec.n_old} old + {spec.n_new} new)"
        )
    drawn = rng.permutation(classes)[:needed]
    old = drawn[: spec.n_old]
    new = drawn[spec.n_old :]

    support_rows: list[np.ndarray] = []
    query_rows: list[np.ndarray] = []
    for c in old:
        rows = np.flatnonzero(labels == c)
        if rows.size < spec.shots + 1:
            raise ValueError(
                f"old class {c} has {rows.size} samples, need at least {spec.shots + 1}"
            )
        perm = rng.permutation(rows)
        support_rows.append(perm[: spec.shots])
        rest = perm[spec.shots :]
        if spec.query_cap is not None:
            rest = rest[: spec.query_cap]
        query_rows.append(rest)
    for c in new:
        rows = rng.permutation(np.flatnonzero(labels == c))
        if spec.query_cap is not None:
            rows = rows[: spec.query_cap]
        query_rows.append(rows)

    support_idx = np.concatenate(support_rows)
    query_idx = np.concatenate(query_rows) if query_rows else np.empty(0, dtype=np.intp)
    query_idx = query_idx[rng.permutation(query_idx.size)]

    new_set = set(new.tolist())
    query_labels = labels[query_idx]
    return Episode(
        support_features=dataset.features[support_idx].astype(float),
        support_labels=labels[support_idx].copy(),
        query_features=dataset.features[query_idx].astype(float),
        query_labels=query_labels.copy(),
        query_is_new=np.asarray([int(l) in new_set for l in query_labels], dtype=bool),
        support_ids=support_idx.copy(),
        query_ids=query_idx.copy(),
        old_classes=tuple(int(c) for c in old),
        new_classes=tuple(int(c) for c in new),
        seed=spec.seed,
    )


@dataclass(frozen=True)
class QueryRecord:
    query_id: int
    true_label: int
    is_new: bool
    verdict: int  # class id, or the minted pseudo id for novel verdicts
    was_novel: bool
    terminal_rule: str
    trace: tuple[tuple[float, int], ...]


@dataclass(frozen=True)
class EpisodeResult:
    records: tuple[QueryRecord, ...]
    minted_ids: tuple[int, ...]


def _resolve_dims(config: RunConfig, n_classes: int, input_dim: int) -> int:
    """Target dimension; --le-dims 0 disables the embedding (standardize only)."""
    dims = config.le_dims
    if dims is None:
        dims = select_dims(n_classes)
    if dims == 0:
        return input_dim
    return dims


def run_episode(episode: Episode, config: RunConfig) -> EpisodeResult:
    """Fit on the support set and stream the queries, incorporating novelties as they appear."""
    support = episode.support_features
    queries = episode.query_features
    if config.per_episode_refit:
        support, queries = _reduce_episode(support, queries, episode, config)

    if config.metric == "mahalanobis":
        metric = MetricSpec("mahalanobis", mahalanobis_precision(support, config.mah_ridge))
    else:
        metric = MetricSpec(config.metric)

    clf = fit_support(
        support,
        episode.support_labels,
        kernel=config.kernel(),
        metric=metric,
        ratio=config.ratio,
        max_iters=config.max_iters,
        novel_fraction=config.novel_fraction,
        sigma_escalations=config.sigma_escalations,
    )
    # pseudo ids start past every id the dataset can produce
    records = []
    minted = []
    for i in range(queries.shape[0]):
        q = queries[i]
        outcome = predict(clf, q)
        if outcome.is_novel:
            clf, verdict = incorporate_novel(clf, q)
            minted.append(verdict)
        else:
            verdict = clf.classes.class_ids[outcome.class_index]
        records.append(
            QueryRecord(
                query_id=int(episode.query_ids[i]),
                true_label=int(episode.query_labels[i]),
                is_new=bool(episode.query_is_new[i]),
                verdict=int(verdict),
                was_novel=outcome.is_novel,
                terminal_rule=outcome.terminal_rule,
                trace=outcome.trace,
            )
        )
    return EpisodeResult(records=tuple(records), minted_ids=tuple(minted))


def _reduce_episode(support, queries, episode: Episode, config: RunConfig):
    """Transductive per-episode reduction; statistics are fitted on support rows only."""
    stacked = np.vstack([support, queries]) if queries.size else support
    dims = _resolve_dims(
        config, len(episode.old_classes) + len(episode.new_classes), stacked.shape[1]
    )
    reduced, _ = reduce_features(
        stacked,
        dims=dims,
        k_neighbors=config.le_k,
        heat_scale=config.le_heat,
        fit_rows=np.arange(support.shape[0]),
    )
    return reduced[: support.shape[0]], reduced[support.shape[0] :]


@dataclass(frozen=True)
class EpisodeScore:
    old_acc: float
    new_acc: float
    all_acc: float
    n_old_queries: int
    n_new_queries: int
    n_minted: int
    vacuous_old: bool
    vacuous_new: bool


def hungarian_match(profit) -> list[tuple[int, int]]:
    """Maximum-total-profit one-to-one assignment on a rectangular matrix."""
    m = np.asarray(profit, dtype=float)
    if m.size == 0:
        return []
    rows, cols = linear_sum_assignment(m, maximize=True)
    return list(zip(rows.tolist(), cols.tolist()))


def score_episode(result: EpisodeResult, episode: Episode) -> EpisodeScore:
    """Old/New/All accuracy with optimal pseudo-class matching for the new classes."""
    records = result.records
    old_records = [r for r in records if not r.is_new]
    new_records = [r for r in records if r.is_new]

    correct_old = sum(1 for r in old_records if r.verdict == r.true_label)

    minted = list(result.minted_ids)
    minted_index = {pid: i for i, pid in enumerate(minted)}
    true_new = list(episode.new_classes)
    true_index = {cid: j for j, cid in enumerate(true_new)}
    contingency = np.zeros((len(minted), len(true_new)), dtype=float)
    for r in new_records:
        if r.verdict in minted_index:  # predictions as old classes stay out of the table
            contingency[minted_index[r.verdict], true_index[r.true_label]] += 1
    correct_new = int(
        sum(contingency[i, j] for i, j in hungarian_match(contingency))
    )

    n_old, n_new = len(old_records), len(new_records)
    old_acc = correct_old / n_old if n_old else 1.0
    new_acc = correct_new / n_new if n_new else 1.0
    total = n_old + n_new
    all_acc = (correct_old + correct_new) / total if total else 1.0
    return EpisodeScore(
        old_acc=old_acc,
        new_acc=new_acc,
        all_acc=all_acc,
        n_old_queries=n_old,
        n_new_queries=n_new,
        n_minted=len(minted),
        vacuous_old=n_old == 0,
        vacuous_new=n_new == 0,
    )


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std: float


@dataclass(frozen=True)
class EvaluationReport:
    per_episode: tuple[EpisodeScore, ...]
    old: MetricSummary
    new: MetricSummary
    all: MetricSummary
    single_episode: bool  # std is 0 by convention, not an observation
    config_echo: dict


def aggregate(scores, config_echo: dict | None = None) -> EvaluationReport:
    """Mean and sample standard deviation (n-1) of each accuracy over episodes."""
    scores = tuple(scores)
    if not scores:
        raise ValueError("need at least one episode score to aggregate")

    def summary(values):
        arr = np.asarray(values, dtype=float)
        std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        return MetricSummary(mean=float(arr.mean()), std=std)

    return EvaluationReport(
        per_episode=scores,
        old=summary([s.old_acc for s in scores]),
        new=summary([s.new_acc for s in scores]),
        all=summary([s.all_acc for s in scores]),
        single_episode=len(scores) == 1,
        config_echo=dict(config_echo or {}),
    )


def _run_indexed(args) -> tuple[int, EpisodeScore]:
    dataset, config, index = args
    spec = EpisodeSpec(
        n_old=config.n_old,
        n_new=config.n_new,
        shots=config.shots,
        seed=config.seed + index,
        query_cap=config.query_cap,
    )
    episode = sample_episode(dataset, spec)
    return index, score_episode(run_episode(episode, config), episode)


def prepare_dataset(dataset: FeatureSet, config: RunConfig) -> tuple[FeatureSet, dict]:
    """Dataset-level reduction applied once, ahead of episode sampling."""
    dims = _resolve_dims(config, dataset.n_classes, dataset.dim)
    reduced, info = reduce_features(
        dataset.features.astype(float),
        dims=dims,
        k_neighbors=config.le_k,
        heat_scale=config.le_heat,
    )
    extras = {
        "resolved_dims": info.output_dim,
        "le_applied": info.le_applied,
        "le_bridged": info.bridged,
    }
    return replace(dataset, features=reduced.astype(np.float32)), extras


def run_evaluation(
    dataset: FeatureSet, config: RunConfig, *, prepared: bool = False
) -> EvaluationReport:
    """Full episodic evaluation: reduce once (unless refitting per episode), then loop."""
    working = dataset
    echo = config.echo()
    if not config.per_episode_refit and not prepared:
        working, extras = prepare_dataset(dataset, config)
        echo.update(extras)

    jobs = [(working, config, i) for i in range(config.episodes)]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            indexed = list(pool.map(_run_indexed, jobs))
    else:
        indexed = [_run_indexed(j) for j in jobs]
    indexed.sort(key=lambda pair: pair[0])
    return aggregate([score for _, score in indexed], config_echo=echo)
