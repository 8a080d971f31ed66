"""Training sets, regression fitting, and released models.

The published artifact of the pipeline is a small regression model
trained on noisy workload answers.  Prediction is pure post-processing:
it reads no private data and consumes no privacy budget, so a released
model can answer unlimited fresh queries.

The linear model is homogeneous: a linear counting query with an empty
coefficient vector answers exactly zero, so the intercept slot of the
released weight vector is pinned at 0.0 and only the per-bin weights
are fitted.  That is what makes a model trained on noiseless singleton
answers reproduce the histogram itself (the fitted weights are the bin
frequencies) and answer every 0/1 query exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .mechanisms import NoisyAnswerSet
from .workload import Workload, range_query

__all__ = [
    "TrainingSet",
    "ModelMeta",
    "PublishedModel",
    "select_training_set",
    "fit_linear",
    "fit_rbf",
    "rbf_kernel",
    "median_pairwise_distance",
    "predict",
    "save_model",
    "load_model",
]

SELECTION_STRATEGIES = ("singleton", "greedy_cover", "random_m")
MODEL_KINDS = ("linear", "rbf")

DEFAULT_LINEAR_RIDGE = 1e-6
DEFAULT_RBF_RIDGE = 1e-3


@dataclass(frozen=True)
class TrainingSet:
    """Query features paired with (noisy) target answers.

    features is the (m x d) coefficient matrix of the training queries;
    targets are the corresponding released answers.  sensitivity and
    epsilon record how the targets were produced, and seed the noise
    stream that produced them.
    """

    features: np.ndarray
    targets: np.ndarray
    sensitivity: float
    epsilon: float
    seed: int | None = None

    def __post_init__(self):
        features = np.array(self.features, dtype=float)
        targets = np.array(self.targets, dtype=float)
        if features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if features.shape[0] < 1:
            raise ValueError("a training set needs at least one query")
        if targets.shape != (features.shape[0],):
            raise ValueError(
                f"{targets.size} targets for {features.shape[0]} training queries"
            )
        features.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "targets", targets)

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @classmethod
    def from_noisy_answers(cls, result: NoisyAnswerSet) -> "TrainingSet":
        return cls(
            features=result.workload.matrix,
            targets=result.answers,
            sensitivity=result.sensitivity_used,
            epsilon=result.epsilon_used,
            seed=result.seed,
        )


@dataclass(frozen=True)
class ModelMeta:
    """Release provenance stored inside a published model."""

    epsilon_consumed: float
    training_m: int
    sensitivity: float
    seed: int | None = None
    mu: float | None = None

    def to_dict(self) -> dict:
        return {
            "epsilon_consumed": self.epsilon_consumed,
            "training_m": self.training_m,
            "sensitivity": self.sensitivity,
            "seed": self.seed,
            "mu": self.mu,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelMeta":
        return cls(
            epsilon_consumed=float(data["epsilon_consumed"]),
            training_m=int(data["training_m"]),
            sensitivity=float(data["sensitivity"]),
            seed=None if data.get("seed") is None else int(data["seed"]),
            mu=None if data.get("mu") is None else float(data["mu"]),
        )


@dataclass(frozen=True)
class PublishedModel:
    """A released regression model over a d-bin query domain.

    linear: weights has length d+1, weights[0] is the (always zero)
    intercept slot and weights[1:] multiply the query coefficients.
    rbf: weights are the kernel coefficients, one per stored center row,
    and width_u is the kernel width.
    """

    kind: str
    d: int
    weights: np.ndarray
    centers: np.ndarray | None = None
    width_u: float | None = None
    meta: ModelMeta | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.d < 1:
            raise ValueError("d must be at least 1")
        weights = np.array(self.weights, dtype=float)
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        if self.kind == "linear":
            if weights.shape != (self.d + 1,):
                raise ValueError(
                    f"linear model over d={self.d} needs {self.d + 1} weights, "
                    f"got {weights.size}"
                )
            if self.centers is not None or self.width_u is not None:
                raise ValueError("linear models carry no centers or width")
        else:
            if self.centers is None or self.width_u is None:
                raise ValueError("rbf models need centers and width_u")
            centers = np.array(self.centers, dtype=float)
            if centers.ndim != 2 or centers.shape != (weights.size, self.d):
                raise ValueError(
                    f"rbf centers must be ({weights.size} x {self.d}), "
                    f"got {centers.shape}"
                )
            if not self.width_u > 0:
                raise ValueError("width_u must be positive")
            centers.setflags(write=False)
            object.__setattr__(self, "centers", centers)


def select_training_set(
    pool: Workload,
    strategy: str,
    m: int | None = None,
    seed: int | None = None,
) -> Workload:
    """Choose the training queries whose answers will be purchased.

    singleton      the d single-bin queries, built directly (the pool
                   only fixes the domain size).
    greedy_cover   repeatedly take, among pool queries that still cover
                   an uncovered bin, the one touching the fewest bins
                   overall (least correlated with everything else),
                   breaking ties by most new bins covered and then by
                   lowest pool index, until every bin is covered.
    random_m       m pool queries sampled uniformly with replacement,
                   deterministic given the seed.
    """
    if strategy not in SELECTION_STRATEGIES:
        raise ValueError(
            f"unknown selection strategy {strategy!r}; expected one of "
            f"{SELECTION_STRATEGIES}"
        )
    d = pool.d

    if strategy == "singleton":
        return Workload(d, [range_query(i, i, d) for i in range(d)])

    if pool.m == 0:
        raise ValueError("the pool must contain at least one query")

    if strategy == "greedy_cover":
        support = pool.matrix != 0
        sizes = support.sum(axis=1)
        covered = np.zeros(d, dtype=bool)
        chosen: list[int] = []
        while not covered.all():
            gains = (support & ~covered).sum(axis=1)
            if gains.max() == 0:
                missing = [int(j) for j in np.flatnonzero(~covered)]
                raise ValueError(f"pool cannot cover bins {missing}")
            candidates = np.flatnonzero(gains > 0)
            idx = int(min(candidates, key=lambda i: (sizes[i], -gains[i], i)))
            chosen.append(idx)
            covered |= support[idx]
        return Workload(d, [pool[i] for i in chosen])

    # random_m
    if m is None or int(m) < 1:
        raise ValueError("random_m needs m >= 1")
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, pool.m, size=int(m))
    return Workload(d, [pool[int(i)] for i in picks])


def fit_linear(training: TrainingSet, ridge: float = DEFAULT_LINEAR_RIDGE) -> PublishedModel:
    """Ridge-regress per-bin weights onto the training answers.

    Solves min over v of ||F v - y||^2 + ridge * ||v||^2 through the
    normal equations; with ridge = 0 a rank-deficient system falls back
    to the minimum-norm least-squares solution.  The released weight
    vector is [0.0, v]: the intercept slot stays zero because linear
    query answers are homogeneous in the bins.
    """
    ridge = float(ridge)
    if ridge < 0 or math.isnan(ridge):
        raise ValueError("ridge must be non-negative")
    features = training.features
    targets = training.targets
    if ridge > 0:
        gram = features.T @ features + ridge * np.eye(training.d)
        v = np.linalg.solve(gram, features.T @ targets)
    else:
        v, *_ = np.linalg.lstsq(features, targets, rcond=None)
    weights = np.concatenate(([0.0], v))
    meta = ModelMeta(
        epsilon_consumed=training.epsilon,
        training_m=training.m,
        sensitivity=training.sensitivity,
        seed=training.seed,
    )
    return PublishedModel(kind="linear", d=training.d, weights=weights, meta=meta)


def rbf_kernel(a: np.ndarray, b: np.ndarray, width_u: float) -> np.ndarray:
    """Gaussian kernel matrix k(x, y) = exp(-||x - y||^2 / (2 u^2))."""
    if not width_u > 0:
        raise ValueError("width_u must be positive")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    return np.exp(-np.maximum(sq, 0.0) / (2.0 * width_u * width_u))


def median_pairwise_distance(features: np.ndarray) -> float:
    """Median Euclidean distance between distinct feature rows.

    The usual bandwidth heuristic for the rbf width.  Falls back to 1.0
    when every pairwise distance is zero (all rows identical or a single
    row).
    """
    features = np.asarray(features, dtype=float)
    n = features.shape[0]
    if n < 2:
        return 1.0
    diffs = features[:, None, :] - features[None, :, :]
    dists = np.sqrt((diffs * diffs).sum(axis=2))
    upper = dists[np.triu_indices(n, k=1)]
    positive = upper[upper > 0]
    if positive.size == 0:
        return 1.0
    return float(np.median(positive))


def fit_rbf(
    training: TrainingSet,
    width_u: float | None = None,
    ridge: float = DEFAULT_RBF_RIDGE,
) -> PublishedModel:
    """Kernel ridge regression with a Gaussian kernel over query features.

    Solves (K + ridge I) alpha = y where K is the kernel matrix of the
    training queries; the training feature rows become the stored
    centers.  width_u defaults to the median pairwise distance between
    training features.  The mean of the training answers is kept in the
    model metadata as mu.
    """
    ridge = float(ridge)
    if not ridge > 0 or math.isnan(ridge):
        raise ValueError("ridge must be positive for the kernel fit")
    if width_u is None:
        width_u = median_pairwise_distance(training.features)
    width_u = float(width_u)
    if not width_u > 0 or math.isnan(width_u):
        raise ValueError("width_u must be positive")
    kernel = rbf_kernel(training.features, training.features, width_u)
    alpha = np.linalg.solve(kernel + ridge * np.eye(training.m), training.targets)
    meta = ModelMeta(
        epsilon_consumed=training.epsilon,
        training_m=training.m,
        sensitivity=training.sensitivity,
        seed=training.seed,
        mu=float(training.targets.mean()),
    )
    return PublishedModel(
        kind="rbf",
        d=training.d,
        weights=alpha,
        centers=training.features,
        width_u=width_u,
        meta=meta,
    )


def predict(model: PublishedModel, workload: Workload) -> np.ndarray:
    """Answer a workload from the released model alone.

    Pure post-processing: touches no histogram and no budget ledger, so
    it can be called any number of times at zero privacy cost.
    """
    if workload.d != model.d:
        raise ValueError(f"workload has d={workload.d}, model has d={model.d}")
    if workload.m == 0:
        return np.zeros(0)
    if model.kind == "linear":
        return model.weights[0] + workload.matrix @ model.weights[1:]
    kernel = rbf_kernel(workload.matrix, model.centers, model.width_u)
    return kernel @ model.weights


def save_model(model: PublishedModel, path) -> None:
    """Serialize a model to JSON with full float precision."""
    doc = {
        "kind": model.kind,
        "d": model.d,
        "weights": [float(w) for w in model.weights],
        "centers": None
        if model.centers is None
        else [[float(c) for c in row] for row in model.centers],
        "width_u": model.width_u,
        "meta": None if model.meta is None else model.meta.to_dict(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path) -> PublishedModel:
    """Read a model written by :func:`save_model`, validating its shape."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not a valid model file: {exc}") from None
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: not a valid model file: expected an object")
    try:
        kind = doc["kind"]
        d = int(doc["d"])
        weights = doc["weights"]
        centers = doc.get("centers")
        width_u = doc.get("width_u")
        meta = doc.get("meta")
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: not a valid model file: {exc}") from None
    try:
        return PublishedModel(
            kind=kind,
            d=d,
            weights=np.asarray(weights, dtype=float),
            centers=None if centers is None else np.asarray(centers, dtype=float),
            width_u=None if width_u is None else float(width_u),
            meta=None if meta is None else ModelMeta.from_dict(meta),
        )
    except (ValueError, TypeError, KeyError) as exc:
        raise ValueError(f"{path}: not a valid model file: {exc}") from None


def with_meta_seed(model: PublishedModel, seed: int | None) -> PublishedModel:
    """Copy of the model with the metadata seed replaced."""
    if model.meta is None:
        return model
    return replace(model, meta=replace(model.meta, seed=seed))
