"""Empirical CDFs and lower-tail order statistics."""

import numpy as np

MIN_LIKELY_SAMPLES = 20


def empirical_cdf(samples):
    """Sorted values and their step probabilities ``i / N``, ``i = 1..N``."""
    values = np.sort(np.asarray(samples, dtype=float).ravel())
    n = values.size
    if n == 0:
        raise ValueError("empirical_cdf needs at least one sample")
    return values, np.arange(1, n + 1) / n


def lower_quantile_rank(n: int, percent: int) -> int:
    """1-based rank ``ceil(percent / 100 * n)``, computed in integers."""
    return max(1, -(-n * percent // 100))


def likely_95(samples) -> float:
    """Value delivered to at least 95% of samples: the order statistic at rank ceil(0.05 N)."""
    values = np.asarray(samples, dtype=float).ravel()
    n = values.size
    if n < MIN_LIKELY_SAMPLES:
        raise ValueError(f"likely_95 needs at least {MIN_LIKELY_SAMPLES} samples, got {n}")
    rank = lower_quantile_rank(n, 5)
    return float(np.partition(values, rank - 1)[rank - 1])


def downsample_cdf(values, probabilities, max_points: int = 2000):
    """Keep at most ``max_points`` CDF steps at evenly spaced probabilities.

    The kept ranks are ``ceil(j N / max_points)`` for ``j = 1..max_points``,
    so the last point (probability 1) is always present.
    """
    n = len(values)
    if n <= max_points:
        return values, probabilities
    ranks = -(-np.arange(1, max_points + 1) * n // max_points)
    return values[ranks - 1], probabilities[ranks - 1]


def interquartile_range(samples) -> float:
    q25, q75 = np.percentile(np.asarray(samples, dtype=float).ravel(), [25, 75])
    return float(q75 - q25)
