"""Shared generators for the test suite: random series, volumes, and flows."""
from __future__ import annotations

import numpy as np

from chainlife import FlowMatrix, build_cost_series, single_exponent_series
from chainlife.cost import CostSeries


def random_series(rng: np.random.Generator, max_terms: int = 3) -> CostSeries:
    """Valid cost series with 1..max_terms exponents in [1, 4]."""
    k = int(rng.integers(1, max_terms + 1))
    weights = rng.uniform(0.2, 1.0, size=k)
    exponents = rng.uniform(1.0, 4.0, size=k)
    return build_cost_series(
        [(float(w), float(a)) for w, a in zip(weights, exponents)],
        auto_normalize=True,
    )


def unit_region_volumes(rng: np.random.Generator, n: int) -> tuple[float, ...]:
    """Draw from the always-feasible box: each volume in [1, 1.5), total under 1.5 n."""
    while True:
        q = 1.0 + rng.uniform(0.0, 0.5, size=n)
        if q.sum() < 1.5 * n - 1e-9:
            return tuple(float(v) for v in q)


def random_positive_volumes(rng: np.random.Generator, n: int) -> tuple[float, ...]:
    return tuple(float(v) for v in rng.uniform(0.1, 3.0, size=n))


def random_feasible_flow(rng: np.random.Generator, n: int, volumes) -> FlowMatrix:
    """Random conservative flow toward the collector.

    Each node forwards its generated plus received data, split with random
    weights over all strictly closer receivers, so conservation holds by
    construction and no loops can form.
    """
    carry = [0.0] * (n + 1)
    entries: dict[tuple[int, int], float] = {}
    for i in range(n, 0, -1):
        load = float(volumes[i - 1]) + carry[i]
        weights = rng.random(i) + 1e-3
        weights /= weights.sum()
        for j in range(i):
            amount = load * float(weights[j])
            if amount > 0.0:
                entries[(i, j)] = entries.get((i, j), 0.0) + amount
                carry[j] += amount
    return FlowMatrix(n, entries)


def small_exponents() -> tuple[float, ...]:
    return (1.0, 1.5, 2.0, 3.0)


def series_for(a: float) -> CostSeries:
    return single_exponent_series(a)
