"""Summation of countable nonnegative series with divergence detection.

Used for mixing measures and jump laws given by a countable family of
atoms.  Terms are summed in doubling blocks [N, 2N); for a power-law tail
term(n) ~ c n^{-p} the block sums are asymptotically geometric with ratio
2^{1-p}, so a stabilized block ratio near 1 signals divergence (p <= 1)
while a ratio bounded below 1 admits an asymptotically exact geometric
tail estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

CONVERGED = "converged"
DIVERGED = "diverged"
INCONCLUSIVE = "inconclusive"

_FIRST_BLOCK = 64
_MAX_TERMS = 1 << 21
_DIVERGENCE_RATIO = 0.97
_EXTRAPOLATION_RATIO = 0.95
_DIVERGENCE_STREAK = 3


@dataclass(frozen=True)
class SeriesSum:
    value: float
    status: str
    n_terms: int


def sum_series(term: Callable[[int], float], tol: float = 1e-7,
               start: int = 1) -> SeriesSum:
    """Sum `term(n)` for n = start, start+1, ... with term(n) >= 0.

    Convergence is declared either directly (a block falls below
    tol * total) or through the geometric tail extrapolation when the
    block ratios have settled: successive extrapolated totals agreeing to
    tol are the stopping criterion.
    """
    total = 0.0
    n = start
    upper = start + _FIRST_BLOCK
    blocks: list[float] = []
    streak = 0
    extrapolated = None
    while n < start + _MAX_TERMS:
        block = 0.0
        while n < upper:
            t = float(term(n))
            if t < 0:
                raise ValueError(f"series term {n} is negative: {t}")
            block += t
            n += 1
        total += block
        blocks.append(block)
        if not (total < float("inf")):
            return SeriesSum(value=float("inf"), status=DIVERGED, n_terms=n - start)
        if block <= tol * max(total, 1.0):
            return SeriesSum(value=total, status=CONVERGED, n_terms=n - start)
        if len(blocks) >= 2 and blocks[-2] > 0:
            ratio = block / blocks[-2]
            if ratio >= _DIVERGENCE_RATIO:
                streak += 1
            else:
                streak = 0
            if streak >= _DIVERGENCE_STREAK:
                return SeriesSum(value=float("inf"), status=DIVERGED, n_terms=n - start)
            if ratio <= _EXTRAPOLATION_RATIO and len(blocks) >= 3:
                cand = total + block * ratio / (1.0 - ratio)
                if extrapolated is not None and \
                        abs(cand - extrapolated) <= tol * max(abs(cand), 1.0):
                    return SeriesSum(value=cand, status=CONVERGED, n_terms=n - start)
                extrapolated = cand
            else:
                extrapolated = None
        upper = start + 2 * (upper - start)
    return SeriesSum(value=total, status=INCONCLUSIVE, n_terms=n - start)
