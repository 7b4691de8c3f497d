from __future__ import annotations

import math
import typing as t

import numpy as np
from scipy import stats


def wilson_interval(
    successes: int, trials: int, confidence: float = 0.95
) -> tuple[float, float]:
    """Wilson score interval of a binomial proportion."""

    if trials <= 0:
        return 0.0, 1.0

    interval = stats.binomtest(successes, trials).proportion_ci(
        confidence_level=confidence, method="wilson"
    )

    return max(0.0, float(interval.low)), min(1.0, float(interval.high))


def within_binomial_sigmas(
    successes: int, trials: int, probability: float, sigmas: float = 3.0
) -> bool:
    expected = trials * probability
    sigma = math.sqrt(trials * probability * (1 - probability))
    if sigma == 0:
        return successes == round(expected)

    return abs(successes - expected) <= sigmas * sigma


def proportionality_pvalue(
    counts: t.Sequence[int], weights: t.Sequence[float]
) -> float:
    """Chi-square p-value of counts against weight-proportional draws."""

    observed = np.asarray(counts, dtype=np.float64)
    expected = np.asarray(weights, dtype=np.float64)
    expected = expected / expected.sum() * observed.sum()

    return float(stats.chisquare(observed, expected).pvalue)


def intervals_overlap(
    left: tuple[float, float], right: tuple[float, float]
) -> bool:
    return left[0] <= right[1] and right[0] <= left[1]


def percentile(values: t.Sequence[float], q: float) -> float:
    if not len(values):
        return 0.0

    return float(np.percentile(np.asarray(values), q))
