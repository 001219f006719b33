"""Closed-form bounds for the field maximum and near-maximal sets.

``mu_k`` denotes the expected maximum of ``k`` independent standard
Gaussians, computed by adaptive quadrature.  The remaining quantities are
elementary transforms of ``log(n!)``: the mean upper bound
``sqrt(2 (1 - 1/n) log(n!))``, the greedy lower bound
``n**-0.5 * sum_{i<=n} mu_i``, the variance lower bound ``1/n``, and the
two near-maximal-set bound shapes with caller-supplied constants.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

from scipy.integrate import quad
from scipy.special import log_ndtr

from graf.combinatorics import ball_size, log_factorial

_LOG_SQRT_TWO_PI = 0.5 * math.log(2.0 * math.pi)

#: Integration window: the standard normal density is below 1e-31 outside.
_QUAD_RANGE = 12.0
_QUAD_TOL = 1e-12
#: Contract accuracy for mu_k.
MU_ABS_TOL = 1e-10

_mu_cache: dict[int, float] = {1: 0.0}
_mu_lock = threading.Lock()


def expected_max_iid_gaussian(k: int) -> float:
    """Expected maximum ``mu_k`` of ``k`` i.i.d. standard Gaussians.

    Evaluates ``integral of x * k * phi(x) * Phi(x)**(k-1)`` over
    ``[-12, 12]`` with adaptive quadrature to absolute tolerance 1e-10.
    Values are memoized; the cache is safe for concurrent use.
    """
    if k < 1:
        raise ValueError("sample count must be at least 1")
    with _mu_lock:
        cached = _mu_cache.get(k)
    if cached is not None:
        return cached

    log_k = math.log(k)

    def integrand(x: float) -> float:
        return x * math.exp(
            log_k - 0.5 * x * x - _LOG_SQRT_TWO_PI + (k - 1) * log_ndtr(x)
        )

    # The integrand peaks near sqrt(2 log k); hint the subdivision there.
    peak = min(_QUAD_RANGE - 0.5, math.sqrt(2.0 * log_k)) if k > 1 else 0.0
    value, abserr = quad(
        integrand,
        -_QUAD_RANGE,
        _QUAD_RANGE,
        epsabs=_QUAD_TOL,
        epsrel=_QUAD_TOL,
        limit=200,
        points=[peak],
    )
    if abserr > MU_ABS_TOL:
        raise ArithmeticError(
            f"quadrature for mu_{k} did not converge: estimated error {abserr:.3e}"
        )
    with _mu_lock:
        _mu_cache.setdefault(k, float(value))
    return float(value)


def asymptotic_max_scale(k: int) -> float:
    """``sqrt(2 log k)``, the leading-order growth of ``mu_k``.

    For ratio displays only; ``expected_max_iid_gaussian`` is the accurate
    quantity.
    """
    if k < 1:
        raise ValueError("sample count must be at least 1")
    return math.sqrt(2.0 * math.log(k))


def upper_bound_expected_max(n: int) -> float:
    """Mean upper bound ``sqrt(2 (1 - 1/n) log(n!))`` for the field maximum."""
    if n < 1:
        raise ValueError("size must be at least 1")
    return math.sqrt(2.0 * (1.0 - 1.0 / n) * log_factorial(n))


def trivial_upper_bound_expected_max(n: int) -> float:
    """The generic bound ``sqrt(2 log(n!))`` for any unit-variance field."""
    if n < 1:
        raise ValueError("size must be at least 1")
    return math.sqrt(2.0 * log_factorial(n))


def greedy_lower_bound(n: int) -> float:
    """Expected greedy value ``n**-0.5 * sum_{i=1..n} mu_i``.

    Lower-bounds the expected field maximum; the row-by-row greedy
    construction attains it in expectation.
    """
    if n < 1:
        raise ValueError("size must be at least 1")
    return math.fsum(expected_max_iid_gaussian(i) for i in range(1, n + 1)) / math.sqrt(n)


def variance_lower_bound(n: int) -> float:
    """Variance lower bound ``1/n`` (the variance of the field mean)."""
    if n < 1:
        raise ValueError("size must be at least 1")
    return 1.0 / n


@dataclass(frozen=True)
class BoundsRow:
    """All closed-form mean/variance bounds evaluated at one size."""

    n: int
    upper_E: float
    trivial_upper_E: float
    greedy_lower_E: float
    var_lower: float


def bounds_row(n: int) -> BoundsRow:
    return BoundsRow(
        n=n,
        upper_E=upper_bound_expected_max(n),
        trivial_upper_E=trivial_upper_bound_expected_max(n),
        greedy_lower_E=greedy_lower_bound(n),
        var_lower=variance_lower_bound(n),
    )


def nearmax_regime_threshold(n: int) -> float:
    """Regime boundary ``(2 n log n)**-0.5`` for the near-maximal-set bound."""
    if n < 2:
        raise ValueError("size must be at least 2")
    return 1.0 / math.sqrt(2.0 * n * math.log(n))


@dataclass(frozen=True)
class NearMaxBound:
    """One evaluation of the near-maximal-set bound.

    ``regime`` is ``"small"`` when ``epsilon <= (2 n log n)**-0.5`` (the
    boundary counts as small) and ``"large"`` otherwise; the universal
    constants are supplied by the caller, never invented here.
    """

    n: int
    epsilon: float
    regime: str
    bound_value: float
    c_small: float
    c_large: float


def nearmax_theorem_bound(
    n: int, eps: float, c_small: float = 1.0, c_large: float = 1.0
) -> NearMaxBound:
    """Bound on the expected log-size of the near-maximal set.

    ``c_small * (n log n)**(3/4)`` in the small-epsilon regime and
    ``c_large * sqrt(eps) * n log n`` in the large-epsilon regime.
    """
    if n < 2:
        raise ValueError("size must be at least 2")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    if c_small <= 0.0 or c_large <= 0.0:
        raise ValueError("bound constants must be positive")
    nlogn = n * math.log(n)
    if eps <= nearmax_regime_threshold(n):
        return NearMaxBound(n, eps, "small", c_small * nlogn**0.75, c_small, c_large)
    return NearMaxBound(n, eps, "large", c_large * math.sqrt(eps) * nlogn, c_small, c_large)


def chatterjee_bound(n: int, eps: float, m: float, c: float = 1.0) -> float:
    """Optimized near-maximal-set bound with the ball-size relaxation.

    Minimizes ``delta * n * log(n) + c * max(eps * m**2, m) / delta`` over
    ``delta`` in ``(0, 1)``: with ``K = c * max(eps * m**2, m)`` the interior
    minimizer is ``delta* = sqrt(K / (n log n))`` with value
    ``2 * sqrt(K * n * log(n))``; if ``delta* >= 1`` the boundary limit
    ``n log n + K`` applies (both forms coincide at ``delta* = 1``).
    """
    if n < 1:
        raise ValueError("size must be at least 1")
    if m <= 0.0:
        raise ValueError("mean bound m must be positive")
    if c <= 0.0:
        raise ValueError("constant must be positive")
    nlogn = n * math.log(n)
    k_term = c * max(eps * m * m, m)
    if nlogn == 0.0 or k_term >= nlogn:
        return nlogn + k_term
    return 2.0 * math.sqrt(k_term * nlogn)


def chatterjee_bound_exact(
    n: int,
    eps: float,
    m: float,
    c: float = 1.0,
    delta_grid: list[float] | None = None,
) -> float:
    """Grid variant using exact ball sizes instead of the relaxation.

    ``log(ball_size(n, delta))`` is a step function of ``delta``, so the
    infimum is taken over a grid; the default grid holds the step's right
    endpoints ``k/n`` plus a point next to 1, which dominate any refinement.
    Requires ``n <= 20`` (exact counting).
    """
    if m <= 0.0:
        raise ValueError("mean bound m must be positive")
    if c <= 0.0:
        raise ValueError("constant must be positive")
    if delta_grid is None:
        delta_grid = [k / n for k in range(1, n)] + [1.0 - 1e-12]
    if not delta_grid:
        raise ValueError("delta grid must be non-empty")
    k_term = c * max(eps * m * m, m)
    best = math.inf
    for delta in delta_grid:
        if not 0.0 < delta < 1.0:
            raise ValueError(f"grid delta must lie in (0, 1), got {delta}")
        value = math.log(ball_size(n, delta)) + k_term / delta
        best = min(best, value)
    return best
