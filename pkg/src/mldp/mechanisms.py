"""Randomized release mechanisms and privacy-budget accounting.

Every mechanism here is a deterministic function of its inputs and an
integer seed, charges its full declared epsilon to a budget ledger
before sampling any noise, and satisfies epsilon-differential privacy
with respect to single-record (+/-1 in one bin) neighbors.

Passing ``epsilon=math.inf`` turns every noise scale into zero while
leaving all code paths intact.  That mode exists so tests can check
exactness properties; the command-line interface refuses it.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .histogram import Histogram
from .workload import Workload, evaluate_workload, workload_sensitivity

__all__ = [
    "InsufficientBudgetError",
    "PrivacyBudget",
    "NoisyAnswerSet",
    "SyntheticHistogram",
    "laplace_sample",
    "laplace_batch",
    "mwem_publish",
    "strategy_mechanism",
    "clamp_nonnegative",
    "save_noisy_answers",
]

# Synthetic estimates are ordinary histograms with fractional bins.
SyntheticHistogram = Histogram

# Tikhonov term that keeps the strategy reconstruction well-posed.
_RECONSTRUCTION_RIDGE = 1e-9

STRATEGIES = ("identity", "hierarchical")


class InsufficientBudgetError(RuntimeError):
    """Raised when a charge would push a ledger past its total epsilon."""


class PrivacyBudget:
    """Append-only epsilon ledger with a hard total.

    Charges are strictly positive and recorded as (label, epsilon)
    entries; a charge that would exceed the total (beyond a relative
    float tolerance of 1e-9) raises InsufficientBudgetError and leaves
    the ledger untouched.
    """

    __slots__ = ("_total", "_charges")

    def __init__(self, epsilon_total: float):
        epsilon_total = float(epsilon_total)
        if not epsilon_total > 0 or math.isnan(epsilon_total):
            raise ValueError("epsilon_total must be positive")
        self._total = epsilon_total
        self._charges: list[tuple[str, float]] = []

    @property
    def epsilon_total(self) -> float:
        return self._total

    @property
    def ledger(self) -> tuple[tuple[str, float], ...]:
        return tuple(self._charges)

    @property
    def spent(self) -> float:
        return math.fsum(eps for _, eps in self._charges)

    @property
    def remaining(self) -> float:
        if math.isinf(self._total):
            return math.inf
        return max(0.0, self._total - self.spent)

    def charge(self, label: str, epsilon: float) -> None:
        epsilon = float(epsilon)
        if not epsilon > 0 or math.isnan(epsilon):
            raise ValueError("charges must be strictly positive")
        if not math.isinf(self._total):
            slack = 1e-9 * max(1.0, self._total)
            if self.spent + epsilon > self._total + slack:
                raise InsufficientBudgetError(
                    f"charge {epsilon} for {label!r} exceeds remaining "
                    f"budget {self.remaining} of {self._total}"
                )
        self._charges.append((str(label), epsilon))

    def __repr__(self):
        return (
            f"PrivacyBudget(total={self._total}, spent={self.spent}, "
            f"charges={len(self._charges)})"
        )


@dataclass(frozen=True)
class NoisyAnswerSet:
    """Noisy answers to a workload plus the release parameters used.

    ``sensitivity_used`` is the sensitivity that scaled the noise: the
    joint workload sensitivity for direct Laplace answering, or the
    strategy sensitivity when the answers were reconstructed from a
    strategy's noisy measurements.
    """

    workload: Workload
    answers: np.ndarray
    sensitivity_used: float
    epsilon_used: float
    seed: int | None
    mechanism: str = "laplace"

    def __post_init__(self):
        answers = np.array(self.answers, dtype=float)
        if answers.ndim != 1 or answers.size != self.workload.m:
            raise ValueError(
                f"{answers.size} answers for a workload of {self.workload.m} queries"
            )
        answers.setflags(write=False)
        object.__setattr__(self, "answers", answers)


def laplace_sample(scale: float, rng) -> float:
    """One draw from Laplace(0, scale); exactly 0.0 when scale is 0."""
    scale = float(scale)
    if scale < 0 or math.isnan(scale):
        raise ValueError("scale must be non-negative")
    if scale == 0:
        return 0.0
    return float(rng.laplace(0.0, scale))


def _laplace_noise(scale: float, size: int, rng) -> np.ndarray:
    if scale < 0:
        raise ValueError("scale must be non-negative")
    if scale == 0:
        return np.zeros(size)
    return rng.laplace(0.0, scale, size=size)


def _noise_scale(sensitivity: float, epsilon: float) -> float:
    if math.isinf(epsilon):
        return 0.0
    return sensitivity / epsilon


def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not epsilon > 0 or math.isnan(epsilon):
        raise ValueError("epsilon must be positive")
    return epsilon


def clamp_nonnegative(answers: np.ndarray) -> np.ndarray:
    """Post-processing that floors released answers at zero."""
    return np.maximum(np.asarray(answers, dtype=float), 0.0)


def laplace_batch(
    workload: Workload,
    hist: Histogram,
    budget: PrivacyBudget,
    epsilon: float,
    seed: int | None,
    *,
    clamp: bool = False,
) -> NoisyAnswerSet:
    """Answer a whole workload in one epsilon-DP Laplace release.

    Every answer gets independent Laplace noise with scale S/epsilon
    where S is the joint workload sensitivity, and the budget is charged
    exactly ``epsilon`` once, before sampling.  An empty workload
    returns empty answers and charges nothing.
    """
    if workload.d != hist.d:
        raise ValueError(f"workload has d={workload.d}, histogram has d={hist.d}")
    epsilon = _check_epsilon(epsilon)
    sensitivity = workload_sensitivity(workload)
    if workload.m == 0:
        return NoisyAnswerSet(workload, np.zeros(0), sensitivity, epsilon, seed)
    budget.charge(f"laplace batch m={workload.m}", epsilon)
    rng = np.random.default_rng(seed)
    scale = _noise_scale(sensitivity, epsilon)
    answers = evaluate_workload(workload, hist) + _laplace_noise(scale, workload.m, rng)
    if clamp:
        answers = clamp_nonnegative(answers)
    return NoisyAnswerSet(workload, answers, sensitivity, epsilon, seed)


def _exponential_mechanism(scores: np.ndarray, epsilon: float, rng) -> int:
    """Sample an index with probability proportional to exp(eps*score/2).

    Scores are max-shifted before exponentiation to avoid overflow.  In
    the noise-disabled (infinite epsilon) mode this degenerates to the
    argmax with ties broken by lowest index.
    """
    if math.isinf(epsilon):
        return int(np.argmax(scores))
    weights = np.exp(0.5 * epsilon * (scores - scores.max()))
    return int(rng.choice(scores.size, p=weights / weights.sum()))


def mwem_publish(
    workload: Workload,
    hist: Histogram,
    epsilon: float,
    rounds: int,
    seed: int | None,
    *,
    budget: PrivacyBudget | None = None,
    mw_iters: int = 20,
    on_round=None,
) -> tuple[SyntheticHistogram, np.ndarray]:
    """Multiplicative-weights release of a synthetic histogram.

    Starts from the uniform histogram with the true total.  Each of the
    ``rounds`` rounds spends epsilon/(2*rounds) selecting the currently
    worst-approximated workload query through the exponential mechanism
    (score = absolute error of the synthetic answer) and another
    epsilon/(2*rounds) measuring the selected query with Laplace noise
    at sensitivity 1.  The synthetic bins are then refit to the full
    measurement history with ``mw_iters`` passes of the multiplicative
    weights update

        bins_j <- bins_j * exp(coeffs[j] * (measured - estimate) / (2 * total))

    renormalized to the true total after every pass, which keeps the
    bins positive and the total constant.  Returns the final synthetic
    histogram and its answers to the workload.

    ``on_round`` (if given) is called with (round_index, bins_copy)
    after each round, for instrumentation.
    """
    if workload.d != hist.d:
        raise ValueError(f"workload has d={workload.d}, histogram has d={hist.d}")
    if workload.m == 0:
        raise ValueError("the workload must contain at least one query")
    rounds = int(rounds)
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    if mw_iters < 1:
        raise ValueError("mw_iters must be at least 1")
    epsilon = _check_epsilon(epsilon)
    total = hist.total
    if total <= 0:
        raise ValueError("the histogram must contain at least one record")
    if budget is None:
        budget = PrivacyBudget(epsilon)

    eps_round = epsilon / (2 * rounds)
    measurement_scale = _noise_scale(1.0, eps_round)
    rng = np.random.default_rng(seed)
    matrix = workload.matrix
    truth = evaluate_workload(workload, hist)
    bins = np.full(hist.d, total / hist.d)
    history: list[tuple[int, float]] = []

    for t in range(rounds):
        scores = np.abs(matrix @ bins - truth)
        budget.charge(f"mwem select round {t + 1}", eps_round)
        picked = _exponential_mechanism(scores, eps_round, rng)
        budget.charge(f"mwem measure round {t + 1}", eps_round)
        measured = truth[picked] + _laplace_noise(measurement_scale, 1, rng)[0]
        history.append((picked, measured))
        for _ in range(mw_iters):
            for qi, value in history:
                estimate = matrix[qi] @ bins
                bins = bins * np.exp(matrix[qi] * ((value - estimate) / (2.0 * total)))
                bins *= total / bins.sum()
        if on_round is not None:
            on_round(t, bins.copy())

    synthetic = Histogram(bins)
    return synthetic, evaluate_workload(workload, synthetic)


def _strategy_matrix(strategy: str, d: int) -> tuple[np.ndarray, float, int]:
    """Measurement matrix, its sensitivity, and the padded domain size."""
    if strategy == "identity":
        return np.eye(d), 1.0, d
    if strategy == "hierarchical":
        padded = 1
        while padded < d:
            padded *= 2
        levels = int(math.log2(padded)) + 1
        rows = []
        length = padded
        while length >= 1:
            for k in range(padded // length):
                row = np.zeros(padded)
                row[k * length : (k + 1) * length] = 1.0
                rows.append(row)
            length //= 2
        # Every bin lies in exactly one interval per level.
        return np.stack(rows), float(levels), padded
    raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


def strategy_mechanism(
    workload: Workload,
    strategy: str,
    hist: Histogram,
    epsilon: float,
    seed: int | None,
    *,
    budget: PrivacyBudget | None = None,
    clamp: bool = False,
) -> NoisyAnswerSet:
    """Answer a workload through a fixed measurement strategy.

    The strategy workload A (singleton bins, or the dyadic interval tree
    over the domain padded to a power of two) is measured with Laplace
    noise scaled to A's own sensitivity, a bin estimate is reconstructed
    by regularized least squares, and the requested workload is answered
    exactly on that estimate.  Charges exactly ``epsilon``.
    """
    if workload.d != hist.d:
        raise ValueError(f"workload has d={workload.d}, histogram has d={hist.d}")
    epsilon = _check_epsilon(epsilon)
    matrix, strategy_sensitivity, padded = _strategy_matrix(strategy, hist.d)
    if budget is None:
        budget = PrivacyBudget(epsilon)
    budget.charge(f"strategy {strategy}", epsilon)

    padded_bins = np.zeros(padded)
    padded_bins[: hist.d] = hist.bins
    rng = np.random.default_rng(seed)
    scale = _noise_scale(strategy_sensitivity, epsilon)
    measured = matrix @ padded_bins + _laplace_noise(scale, matrix.shape[0], rng)

    gram = matrix.T @ matrix + _RECONSTRUCTION_RIDGE * np.eye(padded)
    estimate = np.linalg.solve(gram, matrix.T @ measured)

    answers = workload.matrix @ estimate[: hist.d]
    if clamp:
        answers = clamp_nonnegative(answers)
    return NoisyAnswerSet(
        workload,
        answers,
        sensitivity_used=strategy_sensitivity,
        epsilon_used=epsilon,
        seed=seed,
        mechanism=f"strategy-{strategy}",
    )


def save_noisy_answers(result: NoisyAnswerSet, path) -> None:
    """Write answers as (query_id, answer) CSV plus a JSON sidecar.

    The sidecar ``<path minus extension>.meta.json`` records epsilon,
    the sensitivity used, the seed, and the mechanism name.
    """
    from pathlib import Path

    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", "answer"])
        for i, value in enumerate(result.answers):
            writer.writerow([i, repr(float(value))])
    meta = {
        "epsilon": result.epsilon_used,
        "sensitivity": result.sensitivity_used,
        "seed": result.seed,
        "mechanism": result.mechanism,
    }
    with open(path.with_suffix(".meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
