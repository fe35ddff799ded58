"""Static neural-field classifier with online novel-class incorporation.

Two coupled fields do the work. The sample field keeps one neuron per
stored feature vector (support samples first, incorporated novelties
appended after); a query excites or inhibits those neurons through the
difference-of-Gaussians kernel. The class field keeps one neuron per
registered class, driven through fixed binary links from the sample
neurons of that class; there is no lateral interaction at the class
level.

Prediction adapts the interaction scale inside (0, 1]: too small a scale
activates nothing, too large a scale activates several classes, so the
scale is moved by a fixed ratio between the tightest known bounds until
exactly one class remains active or the iteration budget runs out. A
query that activates nothing at the upper bound, or that still activates
more classes than the configured fraction of the registry at the end, is
declared novel. Incorporating a novel sample appends one sample neuron
and one class neuron and touches nothing else, so earlier classes keep
their activations bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .kernel import KernelParams, activation, dog_kernel
from .metrics import MetricSpec, metric_distances

# Unit external drive attached to every query; enters the sample field
# through the activation nonlinearity as a constant gain.
QUERY_DRIVE = 1.0

ZERO_ACTIVE = "zero-active"
UNIQUE_ACTIVE = "unique-active"
ARGMAX = "argmax"
MAJORITY_NOVEL = "majority-novel"

# Fraction-of-registry thresholds for the ambiguous-terminal novelty rule.
NOVEL_FRACTIONS = {"half": 0.5, "two-thirds": 2.0 / 3.0, "three-quarters": 0.75}


@dataclass(frozen=True)
class SampleField:
    """Append-only store of sample positions; rows [0, n_support) came from the support set."""

    positions: np.ndarray
    n_support: int

    @property
    def sources(self) -> tuple[str, ...]:
        """Per-neuron origin tag, in storage order."""
        m = self.positions.shape[0]
        return tuple(
            f"support:{i}" if i < self.n_support else f"novel:{i - self.n_support}"
            for i in range(m)
        )


@dataclass(frozen=True)
class ClassField:
    """Class registry plus the per-class lists of linked sample-neuron indices."""

    class_ids: tuple[int, ...]
    links: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class PredictionOutcome:
    """Verdict for one query plus the (sigma, active-count) trace that produced it."""

    class_index: Optional[int]
    trace: tuple[tuple[float, int], ...]
    terminal_rule: str

    @property
    def is_novel(self) -> bool:
        return self.class_index is None


@dataclass(frozen=True)
class NfClassifier:
    samples: SampleField
    classes: ClassField
    kernel: KernelParams
    metric: MetricSpec
    ratio: float = 0.4
    max_iters: int = 4
    novel_fraction: float = 0.5
    sigma_escalations: int = 0

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"ratio must be in (0, 1), got {self.ratio}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.sigma_escalations < 0:
            raise ValueError(f"sigma_escalations must be >= 0, got {self.sigma_escalations}")
        if not 0.0 < self.novel_fraction <= 1.0:
            raise ValueError(f"novel_fraction must be in (0, 1], got {self.novel_fraction}")

    @property
    def n_samples(self) -> int:
        return self.samples.positions.shape[0]

    @property
    def n_classes(self) -> int:
        return len(self.classes.class_ids)

    @property
    def dim(self) -> int:
        return self.samples.positions.shape[1]


def fit_support(
    features,
    labels,
    *,
    kernel: KernelParams | None = None,
    metric: MetricSpec | None = None,
    ratio: float = 0.4,
    max_iters: int = 4,
    novel_fraction: float = 0.5,
    sigma_escalations: int = 0,
) -> NfClassifier:
    """Memorize the support set: one sample neuron per row, one class neuron per distinct label.

    A sample neuron is linked to exactly the class neuron of its label.
    Registry order follows first appearance in ``labels``.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError(f"support features must be a non-empty 2-D array, got shape {x.shape}")
    if y.shape != (x.shape[0],):
        raise ValueError(f"labels shape {y.shape} does not match {x.shape[0]} support rows")
    if not np.all(np.isfinite(x)):
        raise ValueError("support features must be finite")

    class_ids: list[int] = []
    members: dict[int, list[int]] = {}
    for i, label in enumerate(y.tolist()):
        if label not in members:
            class_ids.append(label)
            members[label] = []
        members[label].append(i)
    links = tuple(np.asarray(members[c], dtype=np.intp) for c in class_ids)

    return NfClassifier(
        samples=SampleField(positions=x.copy(), n_support=x.shape[0]),
        classes=ClassField(class_ids=tuple(class_ids), links=links),
        kernel=kernel if kernel is not None else KernelParams(),
        metric=metric if metric is not None else MetricSpec(),
        ratio=ratio,
        max_iters=max_iters,
        novel_fraction=novel_fraction,
        sigma_escalations=sigma_escalations,
    )


def sample_activations(clf: NfClassifier, query, sigma: float) -> np.ndarray:
    """Activation of every sample neuron for one query at the given interaction scale.

    Positive exactly for neurons closer than the excitatory radius.
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    q = np.asarray(query, dtype=float)
    if q.shape != (clf.dim,):
        raise ValueError(f"query shape {q.shape} does not match field dimension {clf.dim}")
    dists = metric_distances(clf.metric, clf.samples.positions, q)
    strength = dog_kernel(dists, clf.kernel.with_sigma(sigma))
    return activation(strength * activation(QUERY_DRIVE))


def class_activations(clf: NfClassifier, sample_acts: np.ndarray) -> np.ndarray:
    """Activation of every class neuron given the sample-field activations."""
    u = np.asarray(sample_acts, dtype=float)
    if u.shape != (clf.n_samples,):
        raise ValueError(f"expected {clf.n_samples} sample activations, got shape {u.shape}")
    sums = np.array([u[idx].sum() for idx in clf.classes.links])
    return activation(sums)


def count_active(class_acts) -> int:
    """Number of strictly positive class activations."""
    return int(np.sum(np.asarray(class_acts) > 0.0))


def _evaluate(clf: NfClassifier, query, sigma: float) -> tuple[np.ndarray, int]:
    v = class_activations(clf, sample_activations(clf, query, sigma))
    return v, count_active(v)


def predict(clf: NfClassifier, query) -> PredictionOutcome:
    """Classify one query, adapting the interaction scale.

    Starts at sigma = 1 (also the upper bound). No active class at the
    upper bound means novel, after the configured number of upper-bound
    escalations (each divides the bound by ``ratio``). Otherwise the
    scale is iterated at most ``max_iters`` times: more than one active
    class pulls the upper bound down, none pulls the lower bound up,
    exactly one stops early. At the end the query is assigned the
    highest-activation class when the active count is within
    ``novel_fraction`` of the registry size, and declared novel when
    above it. Ties in the argmax resolve to the lowest registry index.
    """
    if clf.n_classes < 1:
        raise ValueError("classifier has no registered classes")

    sigma_min, sigma_max, sigma = 0.0, 1.0, 1.0
    trace: list[tuple[float, int]] = []

    v, num = _evaluate(clf, query, sigma)
    trace.append((sigma, num))

    escalations = 0
    while num == 0 and escalations < clf.sigma_escalations:
        sigma_max = sigma_max / clf.ratio
        sigma = sigma_max
        v, num = _evaluate(clf, query, sigma)
        trace.append((sigma, num))
        escalations += 1

    if num == 0:
        return PredictionOutcome(None, tuple(trace), ZERO_ACTIVE)

    for _ in range(clf.max_iters):
        if num > 1:
            sigma_max = sigma
            sigma = sigma_min + clf.ratio * (sigma_max - sigma_min)
        if num == 0:
            sigma_min = sigma
            sigma = sigma_max - clf.ratio * (sigma_max - sigma_min)
        v, num = _evaluate(clf, query, sigma)
        trace.append((sigma, num))
        if num == 1:
            break

    threshold = clf.novel_fraction * clf.n_classes
    if num == 0:
        # The scale search can end with nothing active; nothing to assign,
        # so the query is treated like any other non-activating input.
        return PredictionOutcome(None, tuple(trace), ZERO_ACTIVE)
    if num <= threshold:
        rule = UNIQUE_ACTIVE if num == 1 else ARGMAX
        return PredictionOutcome(int(np.argmax(v)), tuple(trace), rule)
    return PredictionOutcome(None, tuple(trace), MAJORITY_NOVEL)


def incorporate_novel(clf: NfClassifier, query) -> tuple[NfClassifier, int]:
    """Register a novel sample: append one sample neuron and one linked class neuron.

    Returns the extended classifier and the freshly minted class id
    (max existing id + 1). The input classifier is left untouched, and
    the surviving neurons keep their activations exactly, for any query.
    """
    q = np.asarray(query, dtype=float)
    if q.shape != (clf.dim,):
        raise ValueError(f"query shape {q.shape} does not match field dimension {clf.dim}")
    new_id = int(max(clf.classes.class_ids)) + 1
    new_index = clf.n_samples
    samples = SampleField(
        positions=np.vstack([clf.samples.positions, q[None, :]]),
        n_support=clf.samples.n_support,
    )
    classes = ClassField(
        class_ids=clf.classes.class_ids + (new_id,),
        links=clf.classes.links + (np.asarray([new_index], dtype=np.intp),),
    )
    return replace(clf, samples=samples, classes=classes), new_id
