"""Numerical kernels: standard normal CDF and adaptive Gauss-Legendre quadrature."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_GL_ORDER = 10
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


class QuadratureError(ArithmeticError):
    """Adaptive quadrature ran out of subdivisions before meeting its tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tolerance: float = 1e-10
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.abs_tolerance >= 1e-14):
            raise ValueError(f"abs_tolerance must be >= 1e-14, got {self.abs_tolerance}")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise ValueError(f"max_subdivisions must be a positive integer, got {self.max_subdivisions}")


DEFAULT_QUADRATURE = QuadratureSpec()


def normal_cdf(x: float) -> float:
    """Standard normal CDF via erfc, accurate in both tails."""
    return 0.5 * math.erfc(-x * _INV_SQRT2)


def normal_interval(lo: float, hi: float) -> float:
    """P(lo < Z <= hi) for standard normal Z; infinite bounds allowed.

    Differences are taken on the side of zero where the CDF values are small,
    so narrow bands far in a tail keep their relative accuracy.
    """
    if hi <= lo:
        return 0.0
    if lo >= 0.0:
        return normal_cdf(-lo) - normal_cdf(-hi)
    if hi <= 0.0:
        return normal_cdf(hi) - normal_cdf(lo)
    # straddles zero: both pieces are >= 0.5 apart from tails, no cancellation
    return 1.0 - normal_cdf(lo) - normal_cdf(-hi)


def _panel(f: Callable[[float], float], a: float, b: float) -> float:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    xs = mid + half * _GL_NODES
    ys = np.fromiter((f(float(x)) for x in xs), dtype=float, count=_GL_ORDER)
    return half * float(np.dot(_GL_WEIGHTS, ys))


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    breakpoints: Sequence[float] = (),
) -> float:
    """Integrate ``f`` over ``[a, b]`` with globally adaptive Gauss-Legendre panels.

    Each panel is estimated with a 10-point rule and compared against the
    same rule on its two halves; the panel with the largest discrepancy is
    split until the summed error estimate is below ``spec.abs_tolerance``.
    ``breakpoints`` inside ``(a, b)`` seed the initial partition, which is
    how discontinuous integrands (piecewise-constant drift levels) should be
    passed in.

    Raises
    ------
    QuadratureError
        If the tolerance is not met within ``spec.max_subdivisions`` splits.
    """
    if b < a:
        raise ValueError(f"integration bounds must satisfy a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0

    edges = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    heap = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        heap.append(_refined_panel(f, lo, hi))
    heapq.heapify(heap)

    splits = 0
    while True:
        total_err = math.fsum(-item[0] for item in heap)
        if total_err <= spec.abs_tolerance:
            break
        if splits >= spec.max_subdivisions:
            raise QuadratureError(
                f"quadrature did not converge on [{a}, {b}]: error estimate "
                f"{total_err:.3e} > {spec.abs_tolerance:.3e} after {splits} subdivisions"
            )
        _, lo, hi, _ = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        heapq.heappush(heap, _refined_panel(f, lo, mid))
        heapq.heappush(heap, _refined_panel(f, mid, hi))
        splits += 1

    return math.fsum(item[3] for item in heap)


def _refined_panel(f, lo, hi):
    mid = 0.5 * (lo + hi)
    coarse = _panel(f, lo, hi)
    fine = _panel(f, lo, mid) + _panel(f, mid, hi)
    # heap entries: (-error, lo, hi, value) so the worst panel pops first
    return (-abs(fine - coarse), lo, hi, fine)
