"""Independent brute-force oracles used to freeze expected test values.

Everything here is deliberately written without the package's own code paths
(pure Python, math.fsum) so the tests compare two genuinely different
implementations.
"""

from __future__ import annotations

import math
from typing import Sequence


def pearson_direct(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment coefficient straight from the definition, via fsum."""
    n = len(x)
    assert n == len(y) and n >= 2
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    sxy = math.fsum((xi - mx) * (yi - my) for xi, yi in zip(x, y))
    sxx = math.fsum((xi - mx) ** 2 for xi in x)
    syy = math.fsum((yi - my) ** 2 for yi in y)
    return sxy / math.sqrt(sxx * syy)


def two_pass_stats(values: Sequence[float]) -> tuple[float, float, float, float]:
    """(min, max, mean, population std) computed in two explicit passes."""
    n = len(values)
    assert n >= 1
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / n
    return (min(values), max(values), mean, math.sqrt(var))


def sweep_direct(
    pollutant: Sequence[float | None],
    cases: Sequence[float | None],
    max_delay: int,
    min_overlap: int = 3,
) -> dict[int, float]:
    """PCC per delay by explicit pair enumeration; None marks a gap bucket."""
    out: dict[int, float] = {}
    n = len(pollutant)
    assert n == len(cases)
    for delay in range(max_delay + 1):
        xs: list[float] = []
        ys: list[float] = []
        for t in range(n - delay):
            p, c = pollutant[t], cases[t + delay]
            if p is None or c is None:
                continue
            xs.append(p)
            ys.append(c)
        if len(xs) < min_overlap:
            continue
        sxx = math.fsum((v - math.fsum(xs) / len(xs)) ** 2 for v in xs)
        syy = math.fsum((v - math.fsum(ys) / len(ys)) ** 2 for v in ys)
        if sxx == 0.0 or syy == 0.0:
            continue
        out[delay] = pearson_direct(xs, ys)
    return out
