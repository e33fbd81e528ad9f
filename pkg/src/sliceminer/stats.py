"""Numerically stable hypergeometric and confidence-interval kernels.

The lower-tail p-value answers: if ``draws`` records were sampled without
replacement from a test set of ``population`` records containing
``successes`` correct predictions, how likely is it to see at most
``observed`` correct ones?  Everything is computed in log space through
log-gamma; the tail is summed term by term, never approximated by a normal.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from scipy.special import ndtri

from . import _kernels

__all__ = [
    "ConfidenceInterval",
    "log_choose",
    "hypergeom_pmf",
    "hypergeom_lower_pvalue",
    "wilson_interval",
]


class ConfidenceInterval(NamedTuple):
    low: float
    high: float


def log_choose(n: int, r: int) -> float:
    """Natural log of the binomial coefficient C(n, r).

    Small r (or n - r) sums the r term logs directly, which keeps exp(result)
    within ~1e-13 of the exact integer even at n = 10**6; the general case
    falls back to a log-gamma difference (~1e-9 at that scale, where the
    result itself is too large for full double precision anyway).
    """
    if r < 0 or n < 0:
        raise ValueError(f"log_choose requires nonnegative arguments, got ({n}, {r})")
    if r > n:
        raise ValueError(f"log_choose requires r <= n, got ({n}, {r})")
    r = min(r, n - r)
    if r <= 64:
        return math.fsum(math.log((n - r + i) / i) for i in range(1, r + 1))
    return math.lgamma(n + 1) - math.lgamma(r + 1) - math.lgamma(n - r + 1)


def _validate_params(population: int, successes: int, draws: int,
                     observed: int | None = None) -> None:
    if not 0 <= successes <= population:
        raise ValueError(f"need 0 <= successes <= population, got {successes}/{population}")
    if not 0 < draws <= population:
        raise ValueError(f"need 0 < draws <= population, got {draws}/{population}")
    if observed is not None:
        if not 0 <= observed <= draws:
            raise ValueError(f"need 0 <= observed <= draws, got {observed}/{draws}")
        if observed > successes:
            raise ValueError(f"observed {observed} exceeds successes {successes}")
        if draws - observed > population - successes:
            raise ValueError(
                f"{draws - observed} failures in the sample exceed "
                f"{population - successes} in the population")


def hypergeom_pmf(population: int, successes: int, draws: int, x: int) -> float:
    """Pr(X = x) for X hypergeometric; 0 outside the support."""
    _validate_params(population, successes, draws)
    return _kernels.hypergeom_pmf(population, successes, draws, x)


def hypergeom_lower_pvalue(population: int, successes: int, draws: int,
                           observed: int) -> float:
    """Pr(X <= observed): the lower-tailed significance of a slice."""
    _validate_params(population, successes, draws, observed)
    p = _kernels.hypergeom_lower_tail(population, successes, draws, observed)
    return min(max(p, 0.0), 1.0)


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> ConfidenceInterval:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("wilson_interval requires at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError(f"need 0 <= successes <= trials, got {successes}/{trials}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must be in (0, 1), got {level}")
    z = float(ndtri(0.5 + level / 2.0))
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2.0 * trials)) / denom
    margin = z * math.sqrt(phat * (1.0 - phat) / trials
                           + z2 / (4.0 * trials * trials)) / denom
    low = 0.0 if successes == 0 else max(0.0, center - margin)
    high = 1.0 if successes == trials else min(1.0, center + margin)
    return ConfidenceInterval(low, high)
