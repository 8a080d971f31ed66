"""Benchmark harness: mean-absolute-error sweeps across mechanisms.

Three sweeps: training-set size, test-set size, and privacy budget.
Every number in a report is a pure function of (config, base_seed):
trial t uses trial_seed = base_seed + t, and each random decision inside
a trial draws from an independent child seed derived by a documented
hash rule, so no mechanism ever observes another's noise stream and
re-running a config reproduces the report byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._version import __version__
from .histogram import Histogram, generate_simulated_histogram, load_histogram_csv
from .learning import MODEL_KINDS, SELECTION_STRATEGIES, predict
from .mechanisms import PrivacyBudget, laplace_batch, mwem_publish, strategy_mechanism
from .pipeline import MldpConfig, mldp_publish, training_workload_for
from .seeds import derive_seed
from .workload import (
    Workload,
    all_range_queries,
    evaluate_workload,
    random_range_workload,
)

__all__ = [
    "MECHANISMS",
    "SWEEP_VARIABLES",
    "mae",
    "DatasetSpec",
    "ExperimentConfig",
    "ReportRow",
    "ExperimentReport",
    "run_training_size_sweep",
    "run_test_size_sweep",
    "run_epsilon_sweep",
    "run_sweep",
    "emit_report",
    "read_report_csv",
]

MECHANISMS = ("mldp", "laplace", "mwem", "strategy-identity", "strategy-hier")
SWEEP_VARIABLES = ("training_m", "test_m", "epsilon")

SEED_RULE = (
    "trial_seed = base_seed + trial; every random object inside a trial uses "
    "derive_seed(trial_seed, name[, grid_index]) where derive_seed is the first "
    "8 bytes of sha256('base|part|part...'); the grid index is included exactly "
    "when the object depends on the swept variable (it is omitted for the "
    "held-out test workload in the training_m and epsilon sweeps, for the "
    "trained model in the test_m sweep, and for mechanisms unaffected by the "
    "training size in the training_m sweep, which therefore repeat identical "
    "rows across that grid)."
)


def mae(predicted, truth) -> float:
    """Mean absolute error between two equal-length answer vectors."""
    predicted = np.asarray(predicted, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if predicted.shape != truth.shape or predicted.ndim != 1:
        raise ValueError(
            f"shape mismatch: predicted {predicted.shape}, truth {truth.shape}"
        )
    if predicted.size == 0:
        raise ValueError("mae of empty answer vectors is undefined")
    return float(np.mean(np.abs(predicted - truth)))


@dataclass(frozen=True)
class DatasetSpec:
    """Where the histogram comes from: a CSV path or a simulation spec."""

    path: str | None = None
    d: int | None = None
    max_count: int | None = None
    seed: int | None = None

    def __post_init__(self):
        simulated = (self.d, self.max_count, self.seed)
        if self.path is not None:
            if any(v is not None for v in simulated):
                raise ValueError("dataset spec takes a path or simulation fields, not both")
        elif any(v is None for v in simulated):
            raise ValueError("simulated dataset spec needs d, max_count and seed")

    def load(self) -> Histogram:
        if self.path is not None:
            return load_histogram_csv(self.path)
        return generate_simulated_histogram(self.d, self.max_count, self.seed)

    def to_dict(self) -> dict:
        if self.path is not None:
            return {"path": self.path}
        return {"simulated": {"d": self.d, "max_count": self.max_count, "seed": self.seed}}

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetSpec":
        if not isinstance(data, dict):
            raise ValueError("dataset spec must be an object")
        extra = set(data) - {"path", "simulated"}
        if extra:
            raise ValueError(f"unknown dataset keys {sorted(extra)}")
        if "path" in data and "simulated" in data:
            raise ValueError("dataset spec takes a path or simulation fields, not both")
        if "path" in data:
            return cls(path=str(data["path"]))
        if "simulated" in data:
            sim = data["simulated"]
            try:
                return cls(
                    d=int(sim["d"]),
                    max_count=int(sim["max_count"]),
                    seed=int(sim["seed"]),
                )
            except (KeyError, TypeError) as exc:
                raise ValueError(f"bad simulated dataset spec: {exc}") from None
        raise ValueError("dataset spec needs 'path' or 'simulated'")


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: dataset, mechanisms, swept grid, fixed parameters.

    The swept variable's fixed field is ignored at the swept grid
    points (epsilon during an epsilon sweep, and so on).  Round-trips
    through to_dict/from_dict and therefore through JSON.
    """

    dataset: DatasetSpec
    mechanisms: tuple[str, ...]
    sweep_variable: str
    grid: tuple[float, ...]
    epsilon: float = 1.0
    training_m: int = 100
    test_m: int = 500
    selection: str = "singleton"
    learner: str = "linear"
    ridge: float | None = None
    width_u: float | None = None
    rounds: int = 10
    trials: int = 20
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mechanisms", tuple(self.mechanisms))
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        if not self.mechanisms:
            raise ValueError("mechanisms must not be empty")
        unknown = [m for m in self.mechanisms if m not in MECHANISMS]
        if unknown:
            raise ValueError(f"unknown mechanisms {unknown}; expected subset of {MECHANISMS}")
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ValueError(
                f"unknown sweep variable {self.sweep_variable!r}; expected one of "
                f"{SWEEP_VARIABLES}"
            )
        if not self.grid:
            raise ValueError("grid must not be empty")
        if self.sweep_variable == "epsilon":
            if any(not (v > 0 and math.isfinite(v)) for v in self.grid):
                raise ValueError("epsilon grid values must be finite and positive")
        else:
            if any(v < 1 or v != int(v) for v in self.grid):
                raise ValueError(f"{self.sweep_variable} grid values must be integers >= 1")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be finite and positive")
        if self.training_m < 1 or self.test_m < 1:
            raise ValueError("training_m and test_m must be at least 1")
        if self.selection not in SELECTION_STRATEGIES:
            raise ValueError(f"unknown selection {self.selection!r}")
        if self.learner not in MODEL_KINDS:
            raise ValueError(f"unknown learner {self.learner!r}")
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset.to_dict(),
            "mechanisms": list(self.mechanisms),
            "sweep_variable": self.sweep_variable,
            "grid": list(self.grid),
            "epsilon": self.epsilon,
            "training_m": self.training_m,
            "test_m": self.test_m,
            "selection": self.selection,
            "learner": self.learner,
            "ridge": self.ridge,
            "width_u": self.width_u,
            "rounds": self.rounds,
            "trials": self.trials,
            "base_seed": self.base_seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ValueError("experiment config must be an object")
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        missing = {"dataset", "mechanisms", "sweep_variable", "grid"} - set(data)
        if missing:
            raise ValueError(f"missing config keys {sorted(missing)}")
        kwargs = dict(data)
        kwargs["dataset"] = DatasetSpec.from_dict(data["dataset"])
        kwargs["mechanisms"] = tuple(data["mechanisms"])
        kwargs["grid"] = tuple(data["grid"])
        for key in ("training_m", "test_m", "rounds", "trials", "base_seed"):
            if key in kwargs:
                kwargs[key] = int(kwargs[key])
        return cls(**kwargs)


@dataclass(frozen=True)
class ReportRow:
    """Aggregated MAE of one mechanism at one grid point."""

    mechanism: str
    grid_index: int
    grid_value: float
    mean_mae: float
    std_mae: float
    trial_seeds: tuple[int, ...]
    trial_maes: tuple[float, ...]
    train_test_overlap: float | None = None

    def to_dict(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "grid_index": self.grid_index,
            "grid_value": self.grid_value,
            "mean_mae": self.mean_mae,
            "std_mae": self.std_mae,
            "trial_seeds": list(self.trial_seeds),
            "trial_maes": list(self.trial_maes),
            "train_test_overlap": self.train_test_overlap,
        }


@dataclass(frozen=True)
class ExperimentReport:
    """Sweep results plus everything needed to reproduce them."""

    config: dict
    sweep_variable: str
    grid: tuple[float, ...]
    rows: tuple[ReportRow, ...]
    code_version: str = __version__
    seed_rule: str = SEED_RULE

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "code_version": self.code_version,
            "seed_rule": self.seed_rule,
            "sweep_variable": self.sweep_variable,
            "grid": list(self.grid),
            "rows": [row.to_dict() for row in self.rows],
        }

    def row(self, mechanism: str, grid_index: int) -> ReportRow:
        for r in self.rows:
            if r.mechanism == mechanism and r.grid_index == grid_index:
                return r
        raise KeyError(f"no row for ({mechanism!r}, {grid_index})")


class _Collector:
    """Accumulates per-trial MAEs keyed by (mechanism, grid index)."""

    def __init__(self, mechanisms, grid):
        self.grid = grid
        self.maes = {(m, i): [] for m in mechanisms for i in range(len(grid))}
        self.seeds = {(m, i): [] for m in mechanisms for i in range(len(grid))}
        self.overlaps = {(m, i): [] for m in mechanisms for i in range(len(grid))}

    def add(self, mechanism, grid_index, seed, value, overlap=None):
        self.maes[(mechanism, grid_index)].append(float(value))
        self.seeds[(mechanism, grid_index)].append(int(seed))
        if overlap is not None:
            self.overlaps[(mechanism, grid_index)].append(float(overlap))

    def rows(self, mechanisms) -> tuple[ReportRow, ...]:
        rows = []
        for mech in mechanisms:
            for i, value in enumerate(self.grid):
                maes = self.maes[(mech, i)]
                overlaps = self.overlaps[(mech, i)]
                rows.append(
                    ReportRow(
                        mechanism=mech,
                        grid_index=i,
                        grid_value=float(value),
                        mean_mae=float(np.mean(maes)),
                        std_mae=float(np.std(maes, ddof=1)) if len(maes) > 1 else 0.0,
                        trial_seeds=tuple(self.seeds[(mech, i)]),
                        trial_maes=tuple(maes),
                        train_test_overlap=float(np.mean(overlaps)) if overlaps else None,
                    )
                )
        return tuple(rows)


def _baseline_mae(mechanism, test, truth, hist, epsilon, rounds, seed) -> float:
    """One run of a non-mldp mechanism against one test workload."""
    budget = PrivacyBudget(epsilon)
    if mechanism == "laplace":
        result = laplace_batch(test, hist, budget, epsilon, seed)
        return mae(result.answers, truth)
    if mechanism == "mwem":
        _, answers = mwem_publish(test, hist, epsilon, rounds, seed, budget=budget)
        return mae(answers, truth)
    if mechanism == "strategy-identity":
        result = strategy_mechanism(test, "identity", hist, epsilon, seed, budget=budget)
        return mae(result.answers, truth)
    if mechanism == "strategy-hier":
        result = strategy_mechanism(test, "hierarchical", hist, epsilon, seed, budget=budget)
        return mae(result.answers, truth)
    raise ValueError(f"unknown mechanism {mechanism!r}")


def _mldp_config(config: ExperimentConfig, epsilon: float, m: int | None, seed: int) -> MldpConfig:
    return MldpConfig(
        epsilon=epsilon,
        selection=config.selection,
        m=m,
        learner=config.learner,
        ridge=config.ridge,
        width_u=config.width_u,
        seed=seed,
    )


def _overlap_count(training: Workload, test: Workload) -> int:
    """How many test queries also appear in the training workload."""
    keys = {q.coeffs.tobytes() for q in training}
    return sum(1 for q in test if q.coeffs.tobytes() in keys)


def _fixed_m(config: ExperimentConfig) -> int | None:
    return config.training_m if config.selection == "random_m" else None


def run_training_size_sweep(config: ExperimentConfig) -> ExperimentReport:
    """MAE versus training-set size m.

    The model is retrained per grid point with m queries drawn by
    random_m selection from the full contiguous-range pool; every trial
    keeps one fixed held-out test workload of test_m random ranges, so
    mechanisms that never see the training set produce one row repeated
    across the grid.
    """
    if config.sweep_variable != "training_m":
        raise ValueError(f"config sweeps {config.sweep_variable!r}, not 'training_m'")
    if "mldp" in config.mechanisms and config.selection != "random_m":
        raise ValueError("the training-size sweep varies m, which needs random_m selection")
    hist = config.dataset.load()
    pool = all_range_queries(hist.d)
    grid = [int(v) for v in config.grid]
    collector = _Collector(config.mechanisms, config.grid)

    for t in range(config.trials):
        trial_seed = config.base_seed + t
        test = random_range_workload(
            hist.d, config.test_m, derive_seed(trial_seed, "test-workload")
        )
        truth = evaluate_workload(test, hist)
        for mech in config.mechanisms:
            if mech == "mldp":
                for i, m in enumerate(grid):
                    seed = derive_seed(trial_seed, "mldp", i)
                    mc = _mldp_config(config, config.epsilon, m, seed)
                    model = mldp_publish(hist, mc, PrivacyBudget(config.epsilon), pool=pool)
                    overlap = _overlap_count(
                        training_workload_for(hist.d, mc, pool), test
                    )
                    collector.add(mech, i, seed, mae(predict(model, test), truth), overlap)
            else:
                seed = derive_seed(trial_seed, mech)
                value = _baseline_mae(
                    mech, test, truth, hist, config.epsilon, config.rounds, seed
                )
                for i in range(len(grid)):
                    collector.add(mech, i, seed, value)

    return ExperimentReport(
        config=config.to_dict(),
        sweep_variable=config.sweep_variable,
        grid=config.grid,
        rows=collector.rows(config.mechanisms),
    )


def run_test_size_sweep(config: ExperimentConfig) -> ExperimentReport:
    """MAE versus test-workload size.

    Each trial trains one model and reuses it across every test size;
    the test workload is redrawn per grid point.  Baselines answer each
    test workload directly.
    """
    if config.sweep_variable != "test_m":
        raise ValueError(f"config sweeps {config.sweep_variable!r}, not 'test_m'")
    hist = config.dataset.load()
    pool = all_range_queries(hist.d)
    grid = [int(v) for v in config.grid]
    collector = _Collector(config.mechanisms, config.grid)

    for t in range(config.trials):
        trial_seed = config.base_seed + t
        model = None
        model_seed = None
        training = None
        if "mldp" in config.mechanisms:
            model_seed = derive_seed(trial_seed, "mldp")
            mc = _mldp_config(config, config.epsilon, _fixed_m(config), model_seed)
            model = mldp_publish(hist, mc, PrivacyBudget(config.epsilon), pool=pool)
            training = training_workload_for(hist.d, mc, pool)
        for i, m_t in enumerate(grid):
            test = random_range_workload(
                hist.d, m_t, derive_seed(trial_seed, "test-workload", i)
            )
            truth = evaluate_workload(test, hist)
            for mech in config.mechanisms:
                if mech == "mldp":
                    collector.add(
                        mech,
                        i,
                        model_seed,
                        mae(predict(model, test), truth),
                        _overlap_count(training, test),
                    )
                else:
                    seed = derive_seed(trial_seed, mech, i)
                    collector.add(
                        mech,
                        i,
                        seed,
                        _baseline_mae(
                            mech, test, truth, hist, config.epsilon, config.rounds, seed
                        ),
                    )

    return ExperimentReport(
        config=config.to_dict(),
        sweep_variable=config.sweep_variable,
        grid=config.grid,
        rows=collector.rows(config.mechanisms),
    )


def run_epsilon_sweep(config: ExperimentConfig) -> ExperimentReport:
    """MAE versus privacy budget epsilon.

    Every mechanism is re-run at each epsilon with a fresh independent
    budget; the test workload of test_m random ranges is fixed per trial
    and its exact answers are computed once and shared.
    """
    if config.sweep_variable != "epsilon":
        raise ValueError(f"config sweeps {config.sweep_variable!r}, not 'epsilon'")
    hist = config.dataset.load()
    pool = all_range_queries(hist.d)
    collector = _Collector(config.mechanisms, config.grid)

    for t in range(config.trials):
        trial_seed = config.base_seed + t
        test = random_range_workload(
            hist.d, config.test_m, derive_seed(trial_seed, "test-workload")
        )
        truth = evaluate_workload(test, hist)
        for i, epsilon in enumerate(config.grid):
            for mech in config.mechanisms:
                seed = derive_seed(trial_seed, mech, i)
                if mech == "mldp":
                    mc = _mldp_config(config, epsilon, _fixed_m(config), seed)
                    model = mldp_publish(hist, mc, PrivacyBudget(epsilon), pool=pool)
                    collector.add(
                        mech,
                        i,
                        seed,
                        mae(predict(model, test), truth),
                        _overlap_count(training_workload_for(hist.d, mc, pool), test),
                    )
                else:
                    collector.add(
                        mech,
                        i,
                        seed,
                        _baseline_mae(
                            mech, test, truth, hist, epsilon, config.rounds, seed
                        ),
                    )

    return ExperimentReport(
        config=config.to_dict(),
        sweep_variable=config.sweep_variable,
        grid=config.grid,
        rows=collector.rows(config.mechanisms),
    )


_RUNNERS = {
    "training_m": run_training_size_sweep,
    "test_m": run_test_size_sweep,
    "epsilon": run_epsilon_sweep,
}


def run_sweep(config: ExperimentConfig) -> ExperimentReport:
    """Dispatch to the runner for the config's sweep variable."""
    return _RUNNERS[config.sweep_variable](config)


def emit_report(report: ExperimentReport, path, fmt: str | None = None) -> None:
    """Write a report as JSON (verbatim) or CSV (plot-ready statistics).

    fmt defaults to the path's extension.  The JSON body is byte-stable:
    re-running the same config and seed writes the identical file.  The
    CSV carries the config echo and provenance as '#' comment lines,
    then one row per (mechanism, grid point, statistic).
    """
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower()
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}; expected 'csv' or 'json'")
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
        return
    lines = [
        f"# config: {json.dumps(report.config, separators=(',', ':'))}",
        f"# code_version: {report.code_version}",
        f"# seed_rule: {report.seed_rule}",
        f"# sweep_variable: {report.sweep_variable}",
        "mechanism,grid_value,statistic,value",
    ]
    for row in report.rows:
        stats = [("mean_mae", row.mean_mae), ("std_mae", row.std_mae)]
        if row.train_test_overlap is not None:
            stats.append(("train_test_overlap", row.train_test_overlap))
        for name, value in stats:
            lines.append(f"{row.mechanism},{row.grid_value!r},{name},{value!r}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_report_csv(path) -> dict:
    """Parse a CSV report back into its comments and statistic rows."""
    comments: dict[str, str] = {}
    rows = []
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    for line in lines:
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            comments[key] = value
        elif line != "mechanism,grid_value,statistic,value":
            mechanism, grid_value, statistic, value = line.split(",")
            rows.append(
                {
                    "mechanism": mechanism,
                    "grid_value": float(grid_value),
                    "statistic": statistic,
                    "value": float(value),
                }
            )
    if "config" not in comments:
        raise ValueError(f"{path}: missing config comment line")
    return {
        "config": json.loads(comments["config"]),
        "code_version": comments.get("code_version"),
        "seed_rule": comments.get("seed_rule"),
        "sweep_variable": comments.get("sweep_variable"),
        "rows": rows,
    }
