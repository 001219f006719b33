"""Assignment solvers: exhaustive, exact O(n^3), and greedy.

``solve_max_exact`` delegates to scipy's dense shortest-augmenting-path
solver (Jonker-Volgenant style with dual potentials), which handles
real-valued costs exactly; the exhaustive solver doubles as its oracle for
small sizes.  The greedy construction walks the rows in order and takes the
best still-unused column, which lower-bounds the maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from graf._permutations import raw_sum_blocks
from graf.field import CostMatrix, Permutation

#: Exhaustive search walks n! assignments; 10! keeps it in the seconds range.
BRUTE_FORCE_N_MAX = 10


@dataclass(frozen=True)
class SolveResult:
    """An assignment with its raw cost sum and normalized field value."""

    assignment: Permutation
    raw_sum: float
    field_value: float


def _result(entries: np.ndarray, columns: np.ndarray) -> SolveResult:
    n = entries.shape[0]
    raw = float(entries[np.arange(n), columns].sum())
    return SolveResult(
        assignment=Permutation.from_zero_based(columns),
        raw_sum=raw,
        field_value=raw / math.sqrt(n),
    )


def solve_max_bruteforce(c: CostMatrix) -> SolveResult:
    """Maximize the raw cost sum by exhaustive enumeration.

    Ties resolve to the lexicographically smallest one-line notation.
    """
    if c.n > BRUTE_FORCE_N_MAX:
        raise ValueError(
            f"brute force is capped at n={BRUTE_FORCE_N_MAX}; use solve_max_exact"
        )
    best = -math.inf
    best_row: np.ndarray | None = None
    for _, rows, sums in raw_sum_blocks(c.entries):
        j = int(np.argmax(sums))
        # Strict improvement keeps the first (lexicographically smallest) argmax.
        if sums[j] > best:
            best = float(sums[j])
            best_row = rows[j].copy()
    assert best_row is not None
    return SolveResult(
        assignment=Permutation.from_zero_based(best_row),
        raw_sum=best,
        field_value=best / math.sqrt(c.n),
    )


def solve_max_exact(c: CostMatrix) -> SolveResult:
    """Maximum-sum assignment via the O(n^3) dense solver.

    The optimal value matches exhaustive search exactly; which optimal
    assignment is returned under ties is implementation-defined.
    """
    _, columns = linear_sum_assignment(c.entries, maximize=True)
    return _result(c.entries, columns)


def solve_min_exact(c: CostMatrix) -> SolveResult:
    """Minimum-sum assignment; the maximizer of the negated matrix."""
    _, columns = linear_sum_assignment(c.entries)
    return _result(c.entries, columns)


def greedy_assignment(c: CostMatrix) -> SolveResult:
    """Row-by-row greedy: row ``i`` takes its best still-unused column.

    Ties resolve to the smallest available column index.
    """
    n = c.n
    entries = c.entries
    available = list(range(n))
    columns = np.empty(n, dtype=np.intp)
    for i in range(n):
        # argmax picks the first maximum; available stays sorted ascending.
        pick = int(np.argmax(entries[i, available]))
        columns[i] = available.pop(pick)
    return _result(entries, columns)
