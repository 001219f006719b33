"""Replicated simulation of the field maximum with deterministic seeding.

Every replication draws one cost matrix, solves for the maximum, minimum
and greedy values, and records the field mean together with the residual
maximum (the maximum minus the field mean, whose two parts are
independent).  Statistics stream through mergeable central-moment
accumulators, and per-replication seeds come from a pinned SplitMix64
ladder, so results are bit-identical for a given master seed no matter how
replications are scheduled across workers.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from graf.combinatorics import log_factorial
from graf.field import SEED_MAX, sample_cost_matrix
from graf.solvers import greedy_assignment, solve_max_exact, solve_min_exact

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
#: SplitMix64 stream increment (the 64-bit golden ratio).
_GAMMA = 0x9E3779B97F4A7C15

#: Replications per scheduling block.  The block partition and the merge
#: order are fixed, which makes results independent of the worker count.
BLOCK_REPLICATIONS = 4096


def _splitmix64(z: int) -> int:
    z &= _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def derive_seed(root: int, *path: int) -> int:
    """Derive a child seed from ``root`` along an index path.

    Each step applies the SplitMix64 finalizer to
    ``root + (index + 1) * 0x9E3779B97F4A7C15`` modulo 2**64.  Replication
    ``k`` of a study uses ``derive_seed(master, k)``; nested studies extend
    the path, so seed streams never collide.
    """
    if not 0 <= root <= SEED_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {root}")
    s = root
    for index in path:
        if index < 0:
            raise ValueError("seed path indices must be non-negative")
        s = _splitmix64((s + (index + 1) * _GAMMA) & _MASK64)
    return s


@dataclass
class RunningStats:
    """Streaming central moments: count, mean, and 2nd-4th moment sums.

    ``m2``..``m4`` are sums of powers of deviations from the running mean;
    merging two accumulators reproduces the single-stream result up to
    roundoff.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    def push(self, x: float) -> None:
        n1 = self.count
        self.count = n = n1 + 1
        delta = x - self.mean
        delta_n = delta / n
        delta_n2 = delta_n * delta_n
        term1 = delta * delta_n * n1
        self.mean += delta_n
        self.m4 += (
            term1 * delta_n2 * (n * n - 3 * n + 3)
            + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3
        )
        self.m3 += term1 * delta_n * (n - 2) - 3.0 * delta_n * self.m2
        self.m2 += term1

    @property
    def variance(self) -> float:
        """Unbiased sample variance; requires at least two observations."""
        if self.count < 2:
            raise ValueError("variance needs at least 2 observations")
        return self.m2 / (self.count - 1)

    @property
    def mean_std_error(self) -> float:
        return math.sqrt(self.variance / self.count)

    @property
    def variance_std_error(self) -> float:
        """Standard error of the sample variance via the fourth moment."""
        n = self.count
        if n < 2:
            raise ValueError("variance standard error needs at least 2 observations")
        m4c = self.m4 / n
        s2 = self.variance
        var_of_var = (m4c - s2 * s2 * (n - 3) / (n - 1)) / n
        return math.sqrt(max(var_of_var, 0.0))

    def summary(self) -> "StatSummary":
        return StatSummary(
            mean=self.mean,
            variance=self.variance,
            mean_std_error=self.mean_std_error,
            variance_std_error=self.variance_std_error,
        )


def merge_stats(a: RunningStats, b: RunningStats) -> RunningStats:
    """Combine two accumulators as if their streams were concatenated."""
    if a.count == 0:
        return RunningStats(b.count, b.mean, b.m2, b.m3, b.m4)
    if b.count == 0:
        return RunningStats(a.count, a.mean, a.m2, a.m3, a.m4)
    na, nb = a.count, b.count
    n = na + nb
    delta = b.mean - a.mean
    d2 = delta * delta
    mean = a.mean + delta * nb / n
    m2 = a.m2 + b.m2 + d2 * na * nb / n
    m3 = (
        a.m3
        + b.m3
        + d2 * delta * na * nb * (na - nb) / (n * n)
        + 3.0 * delta * (na * b.m2 - nb * a.m2) / n
    )
    m4 = (
        a.m4
        + b.m4
        + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n**3)
        + 6.0 * d2 * (na * na * b.m2 + nb * nb * a.m2) / (n * n)
        + 4.0 * delta * (na * b.m3 - nb * a.m3) / n
    )
    return RunningStats(n, mean, m2, m3, m4)


@dataclass
class RunningCovariance:
    """Streaming covariance accumulator for a pair of statistics."""

    count: int = 0
    mean_x: float = 0.0
    mean_y: float = 0.0
    comoment: float = 0.0

    def push(self, x: float, y: float) -> None:
        self.count += 1
        dx = x - self.mean_x
        self.mean_x += dx / self.count
        self.mean_y += (y - self.mean_y) / self.count
        # dx uses the pre-update mean, the y factor the post-update mean.
        self.comoment += dx * (y - self.mean_y)

    @property
    def covariance(self) -> float:
        if self.count < 2:
            raise ValueError("covariance needs at least 2 observations")
        return self.comoment / (self.count - 1)

    def merge(self, other: "RunningCovariance") -> "RunningCovariance":
        if self.count == 0:
            return RunningCovariance(
                other.count, other.mean_x, other.mean_y, other.comoment
            )
        if other.count == 0:
            return RunningCovariance(self.count, self.mean_x, self.mean_y, self.comoment)
        na, nb = self.count, other.count
        n = na + nb
        dx = other.mean_x - self.mean_x
        dy = other.mean_y - self.mean_y
        return RunningCovariance(
            count=n,
            mean_x=self.mean_x + dx * nb / n,
            mean_y=self.mean_y + dy * nb / n,
            comoment=self.comoment + other.comoment + dx * dy * na * nb / n,
        )


@dataclass(frozen=True)
class FieldSample:
    """One replication: solved extremes and the mean/residual split."""

    n: int
    seed: int
    max_value: float
    min_value: float
    greedy_value: float
    field_mean: float
    residual_max: float


def run_replication(n: int, seed: int) -> FieldSample:
    """Sample one cost matrix and solve it.

    ``field_mean`` is the average field value over all assignments, which
    collapses to ``sum_ij c(i, j) / (n * sqrt(n))``; ``residual_max`` is the
    maximum minus the field mean.
    """
    c = sample_cost_matrix(n, seed)
    max_value = solve_max_exact(c).field_value
    min_value = solve_min_exact(c).field_value
    greedy_value = greedy_assignment(c).field_value
    field_mean = float(c.entries.sum()) / (n * math.sqrt(n))
    return FieldSample(
        n=n,
        seed=seed,
        max_value=max_value,
        min_value=min_value,
        greedy_value=greedy_value,
        field_mean=field_mean,
        residual_max=max_value - field_mean,
    )


@dataclass(frozen=True)
class StatSummary:
    """Mean and variance of one statistic with their standard errors."""

    mean: float
    variance: float
    mean_std_error: float
    variance_std_error: float


@dataclass(frozen=True)
class EstimateReport:
    """Replicated estimates for one size.

    ``ratio`` is the estimated mean maximum divided by ``sqrt(2 log(n!))``;
    ``greedy_violations`` counts replications where the greedy value
    exceeded the solved maximum (always 0 unless the solver is broken).
    """

    n: int
    replications: int
    master_seed: int
    max_value: StatSummary
    min_value: StatSummary
    greedy_value: StatSummary
    field_mean: StatSummary
    residual_max: StatSummary
    ratio: float
    ratio_std_error: float
    cov_field_mean_residual: float
    greedy_violations: int


_STAT_KEYS = ("max_value", "min_value", "greedy_value", "field_mean", "residual_max")


@dataclass
class _BlockAccum:
    stats: dict[str, RunningStats] = dataclass_field(
        default_factory=lambda: {key: RunningStats() for key in _STAT_KEYS}
    )
    cov: RunningCovariance = dataclass_field(default_factory=RunningCovariance)
    greedy_violations: int = 0

    def push(self, sample: FieldSample) -> None:
        for key in _STAT_KEYS:
            self.stats[key].push(getattr(sample, key))
        self.cov.push(sample.field_mean, sample.residual_max)
        if sample.greedy_value > sample.max_value:
            self.greedy_violations += 1

    def merge(self, other: "_BlockAccum") -> "_BlockAccum":
        return _BlockAccum(
            stats={key: merge_stats(self.stats[key], other.stats[key]) for key in _STAT_KEYS},
            cov=self.cov.merge(other.cov),
            greedy_violations=self.greedy_violations + other.greedy_violations,
        )


def _accumulate_block(args: tuple[int, int, int, int]) -> _BlockAccum:
    n, master_seed, start, stop = args
    accum = _BlockAccum()
    for k in range(start, stop):
        accum.push(run_replication(n, derive_seed(master_seed, k)))
    return accum


def estimate(
    n: int, replications: int, master_seed: int, workers: int = 1
) -> EstimateReport:
    """Replicated moment estimates for the extremes at size ``n``.

    Replication ``k`` uses ``derive_seed(master_seed, k)``.  Replications
    are processed in fixed blocks of :data:`BLOCK_REPLICATIONS` merged in
    block order, so the report does not depend on ``workers``.
    """
    if replications < 2:
        raise ValueError("need at least 2 replications")
    if workers < 1:
        raise ValueError("worker count must be at least 1")
    blocks = [
        (n, master_seed, start, min(start + BLOCK_REPLICATIONS, replications))
        for start in range(0, replications, BLOCK_REPLICATIONS)
    ]
    logger.info(
        "estimate: n=%d replications=%d blocks=%d workers=%d",
        n,
        replications,
        len(blocks),
        workers,
    )
    if workers == 1 or len(blocks) == 1:
        accums = map(_accumulate_block, blocks)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            accums = iter(list(pool.map(_accumulate_block, blocks)))
    total = _BlockAccum()
    for accum in accums:
        total = total.merge(accum)
    scale = math.sqrt(2.0 * log_factorial(n))
    max_summary = total.stats["max_value"].summary()
    ratio = max_summary.mean / scale if scale > 0.0 else math.nan
    ratio_se = max_summary.mean_std_error / scale if scale > 0.0 else math.nan
    return EstimateReport(
        n=n,
        replications=replications,
        master_seed=master_seed,
        max_value=max_summary,
        min_value=total.stats["min_value"].summary(),
        greedy_value=total.stats["greedy_value"].summary(),
        field_mean=total.stats["field_mean"].summary(),
        residual_max=total.stats["residual_max"].summary(),
        ratio=ratio,
        ratio_std_error=ratio_se,
        cov_field_mean_residual=total.cov.covariance,
        greedy_violations=total.greedy_violations,
    )


def ratio_table(
    n_list: list[int], replications: int, master_seed: int, workers: int = 1
) -> list[EstimateReport]:
    """One :func:`estimate` per size, for the convergence study of the
    ratio mean-maximum / ``sqrt(2 log(n!))``.

    The estimate for size ``n`` runs under ``derive_seed(master_seed, n)``,
    so rows are independent of each other and of the list order.
    """
    if any(n < 2 for n in n_list):
        raise ValueError("ratio table sizes must be at least 2")
    return [
        estimate(n, replications, derive_seed(master_seed, n), workers=workers)
        for n in n_list
    ]


def ks_statistic(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic ``sup |F_a - F_b|``."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


def ks_critical_value(n_a: int, n_b: int, alpha: float) -> float:
    """Smirnov asymptotic critical value ``c(alpha) * sqrt((n_a+n_b)/(n_a*n_b))``
    with ``c(alpha) = sqrt(-ln(alpha/2)/2)``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) * math.sqrt((n_a + n_b) / (n_a * n_b))


@dataclass(frozen=True)
class SymmetryReport:
    """KS comparison of the negated minimum sample against the maximum sample."""

    n: int
    replications: int
    statistic: float
    critical_value: float
    alpha: float
    passed: bool


def symmetry_check(
    n: int, replications: int, master_seed: int, alpha: float = 0.01
) -> SymmetryReport:
    """Test that the negated minimum matches the maximum in distribution.

    Draws two disjoint replication streams (paths ``(0, k)`` and ``(1, k)``
    under the master seed), compares ``{-min}`` against ``{max}`` with the
    two-sample KS statistic, and checks it against the asymptotic critical
    value at level ``alpha``.
    """
    if replications < 100:
        raise ValueError("symmetry check needs at least 100 replications")
    max_values = np.empty(replications)
    neg_min_values = np.empty(replications)
    for k in range(replications):
        max_values[k] = run_replication(n, derive_seed(master_seed, 0, k)).max_value
        neg_min_values[k] = -run_replication(n, derive_seed(master_seed, 1, k)).min_value
    statistic = ks_statistic(neg_min_values, max_values)
    critical = ks_critical_value(replications, replications, alpha)
    return SymmetryReport(
        n=n,
        replications=replications,
        statistic=statistic,
        critical_value=critical,
        alpha=alpha,
        passed=statistic < critical,
    )
