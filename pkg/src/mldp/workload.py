"""Linear counting queries and query workloads.

A query is a real coefficient vector over the histogram bins; its answer
is the dot product with the bin counts.  Because neighboring histograms
differ by +/-1 in a single bin, the joint L1 sensitivity of a workload
is the largest column sum of absolute coefficients: moving one record
perturbs the full answer vector by exactly one (signed) column.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .histogram import Histogram, neighbor

__all__ = [
    "LinearQuery",
    "Workload",
    "range_query",
    "evaluate",
    "evaluate_workload",
    "workload_sensitivity",
    "brute_force_sensitivity",
    "all_range_queries",
    "all_subset_queries",
    "random_range_workload",
    "save_workload_csv",
    "load_workload_csv",
]

_KINDS = ("range", "subset", "general")

# all_subset_queries(d) materializes 2^d - 1 coefficient vectors.
_MAX_SUBSET_D = 20


class LinearQuery:
    """One linear query: answer(h) = coeffs . bins.

    ``kind`` is a format tag ("range", "subset" or "general"); range
    queries additionally carry their inclusive bin bounds ``lo..hi`` and
    must have 0/1 indicator coefficients matching those bounds.
    """

    __slots__ = ("_coeffs", "kind", "lo", "hi")

    def __init__(self, coeffs, kind: str = "general", lo=None, hi=None):
        arr = np.array(coeffs, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("coeffs must be a non-empty one-dimensional sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        if kind not in _KINDS:
            raise ValueError(f"unknown query kind {kind!r}")
        if kind == "range":
            if lo is None or hi is None:
                raise ValueError("range queries need lo and hi")
            lo, hi = int(lo), int(hi)
            if not (0 <= lo <= hi < arr.size):
                raise ValueError(f"invalid range [{lo}, {hi}] for d={arr.size}")
            indicator = np.zeros(arr.size)
            indicator[lo : hi + 1] = 1.0
            if not np.array_equal(arr, indicator):
                raise ValueError("range query coefficients must be the 0/1 indicator of [lo, hi]")
        else:
            if lo is not None or hi is not None:
                raise ValueError("lo/hi only apply to range queries")
            if kind == "subset" and not np.all((arr == 0) | (arr == 1)):
                raise ValueError("subset query coefficients must be 0/1")
        arr.setflags(write=False)
        self._coeffs = arr
        self.kind = kind
        self.lo = lo
        self.hi = hi

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def d(self) -> int:
        return self._coeffs.size

    def __eq__(self, other):
        if not isinstance(other, LinearQuery):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self._coeffs, other._coeffs)

    def __hash__(self):
        return hash((self.kind, self._coeffs.tobytes()))

    def __repr__(self):
        if self.kind == "range":
            return f"LinearQuery(range [{self.lo}, {self.hi}], d={self.d})"
        return f"LinearQuery({self.kind}, d={self.d})"


class Workload:
    """Immutable ordered collection of queries over a common bin domain."""

    __slots__ = ("_d", "_queries", "_matrix")

    def __init__(self, d: int, queries):
        d = int(d)
        if d < 1:
            raise ValueError("d must be at least 1")
        queries = tuple(queries)
        for i, q in enumerate(queries):
            if not isinstance(q, LinearQuery):
                raise TypeError(f"query {i} is not a LinearQuery")
            if q.d != d:
                raise ValueError(f"query {i} has d={q.d}, workload has d={d}")
        if queries:
            matrix = np.stack([q.coeffs for q in queries])
        else:
            matrix = np.zeros((0, d))
        matrix.setflags(write=False)
        self._d = d
        self._queries = queries
        self._matrix = matrix

    @property
    def d(self) -> int:
        return self._d

    @property
    def m(self) -> int:
        return len(self._queries)

    @property
    def queries(self) -> tuple[LinearQuery, ...]:
        return self._queries

    @property
    def matrix(self) -> np.ndarray:
        """Read-only (m x d) coefficient matrix, one row per query."""
        return self._matrix

    def __len__(self):
        return len(self._queries)

    def __iter__(self):
        return iter(self._queries)

    def __getitem__(self, i) -> LinearQuery:
        return self._queries[i]

    def __eq__(self, other):
        if not isinstance(other, Workload):
            return NotImplemented
        return self._d == other._d and self._queries == other._queries

    def __hash__(self):
        return hash((self._d, self._queries))

    def __repr__(self):
        return f"Workload(d={self.d}, m={self.m})"


def range_query(lo: int, hi: int, d: int) -> LinearQuery:
    """The contiguous range-count query over bins lo..hi (inclusive)."""
    d = int(d)
    if d < 1:
        raise ValueError("d must be at least 1")
    lo, hi = int(lo), int(hi)
    if lo > hi:
        raise ValueError(f"inverted range [{lo}, {hi}]")
    if lo < 0 or hi >= d:
        raise ValueError(f"range [{lo}, {hi}] out of bounds for d={d}")
    coeffs = np.zeros(d)
    coeffs[lo : hi + 1] = 1.0
    return LinearQuery(coeffs, kind="range", lo=lo, hi=hi)


def evaluate(query: LinearQuery, hist: Histogram) -> float:
    """Exact (noise-free) answer of one query on a histogram."""
    if query.d != hist.d:
        raise ValueError(f"query has d={query.d}, histogram has d={hist.d}")
    return float(query.coeffs @ hist.bins)


def evaluate_workload(workload: Workload, hist: Histogram) -> np.ndarray:
    """Exact answers of every query in the workload, in workload order."""
    if workload.d != hist.d:
        raise ValueError(f"workload has d={workload.d}, histogram has d={hist.d}")
    return workload.matrix @ hist.bins


def workload_sensitivity(workload: Workload) -> float:
    """Joint L1 sensitivity of answering the whole workload at once.

    Equals max over bins j of sum_i |coeffs_i[j]|, the worst-case L1
    change of the answer vector when one record moves one bin by one.
    An empty workload has sensitivity 0.
    """
    if workload.m == 0:
        return 0.0
    return float(np.abs(workload.matrix).sum(axis=0).max())


def brute_force_sensitivity(workload: Workload, hist: Histogram) -> float:
    """Sensitivity measured by enumerating all +/-1 single-bin neighbors.

    Exists as an independent check on :func:`workload_sensitivity`: it
    walks every legal neighbor of ``hist`` and takes the largest L1
    change of the exact answer vector.  Removal neighbors are skipped
    for bins without a whole record to remove.
    """
    if workload.d != hist.d:
        raise ValueError(f"workload has d={workload.d}, histogram has d={hist.d}")
    if workload.m == 0:
        return 0.0
    base = evaluate_workload(workload, hist)
    worst = 0.0
    for j in range(hist.d):
        for delta in (1, -1):
            if delta == -1 and hist.bins[j] < 1:
                continue
            shifted = evaluate_workload(workload, neighbor(hist, j, delta))
            worst = max(worst, float(np.abs(shifted - base).sum()))
    return worst


def all_range_queries(d: int) -> Workload:
    """All d(d+1)/2 contiguous range queries, longest first, then by lo."""
    if d < 1:
        raise ValueError("d must be at least 1")
    queries = []
    for length in range(d, 0, -1):
        for lo in range(0, d - length + 1):
            queries.append(range_query(lo, lo + length - 1, d))
    return Workload(d, queries)


def all_subset_queries(d: int) -> Workload:
    """All 2^d - 1 non-empty 0/1 subset-sum queries.

    Ordered by the subset's binary mask (mask bit i selects bin i), so
    for d=2 the order is [1,0], [0,1], [1,1].  Guarded at d <= 20: the
    workload has 2^d - 1 rows of d coefficients.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    if d > _MAX_SUBSET_D:
        raise ValueError(
            f"d={d} would materialize 2^{d} - 1 queries; limit is d <= {_MAX_SUBSET_D}"
        )
    queries = []
    for mask in range(1, 1 << d):
        coeffs = [(mask >> i) & 1 for i in range(d)]
        queries.append(LinearQuery(coeffs, kind="subset"))
    return Workload(d, queries)


def random_range_workload(d: int, m: int, seed: int) -> Workload:
    """m random contiguous range queries, deterministic given the seed.

    Each query draws lo and hi independently and uniformly from the bin
    indices and orders them, so duplicates are possible (and inevitable
    for small d).
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    if m < 1:
        raise ValueError("m must be at least 1")
    rng = np.random.default_rng(seed)
    a = rng.integers(0, d, size=m)
    b = rng.integers(0, d, size=m)
    lows = np.minimum(a, b)
    highs = np.maximum(a, b)
    return Workload(d, [range_query(int(lo), int(hi), d) for lo, hi in zip(lows, highs)])


def save_workload_csv(workload: Workload, path) -> None:
    """Write a workload as CSV with columns kind, lo, hi, coeffs.

    The coeffs column always holds the full space-separated coefficient
    vector, so the file is self-contained; lo/hi are filled for range
    queries only.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "lo", "hi", "coeffs"])
        for q in workload:
            lo = "" if q.lo is None else q.lo
            hi = "" if q.hi is None else q.hi
            writer.writerow([q.kind, lo, hi, " ".join(repr(float(c)) for c in q.coeffs)])


def load_workload_csv(path) -> Workload:
    """Read a workload written by :func:`save_workload_csv`."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = tuple(c.strip().lower() for c in rows[0])
    if header != ("kind", "lo", "hi", "coeffs"):
        raise ValueError(f"{path}: expected header 'kind,lo,hi,coeffs'")
    if len(rows) == 1:
        raise ValueError(f"{path}: no data rows")
    queries = []
    d = None
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != 4:
            raise ValueError(f"{path}: row {i}: expected 4 columns, got {len(row)}")
        kind, lo_raw, hi_raw, coeff_raw = (c.strip() for c in row)
        try:
            coeffs = [float(c) for c in coeff_raw.split()]
        except ValueError:
            raise ValueError(f"{path}: row {i}: bad coefficient list") from None
        if not coeffs:
            raise ValueError(f"{path}: row {i}: empty coefficient list")
        if d is None:
            d = len(coeffs)
        elif len(coeffs) != d:
            raise ValueError(
                f"{path}: row {i}: expected {d} coefficients, got {len(coeffs)}"
            )
        lo = int(lo_raw) if lo_raw else None
        hi = int(hi_raw) if hi_raw else None
        try:
            queries.append(LinearQuery(coeffs, kind=kind, lo=lo, hi=hi))
        except ValueError as exc:
            raise ValueError(f"{path}: row {i}: {exc}") from None
    return Workload(d, queries)
