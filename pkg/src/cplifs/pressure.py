"""Cylinder-sum pressure, natural dimension by bisection, and simple oracles.

Cylinder lengths are measured relative to the supporting interval.  The
normalisation does not change the limit superior defining the pressure but
removes the ``s*log|I|/n`` bias of the finite-n estimate, which matters for
systems living on a tiny interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BracketFailure, DegenerateFit
from .ifs_core import DEFAULT_BUDGET, Cplifs, Interval, check_budget, cylinder_arrays, cylinder_levels


@dataclass(frozen=True)
class PressureCurve:
    s_grid: tuple
    phi_values: tuple
    depth: int

    def rows(self):
        return [(s, p, self.depth) for s, p in zip(self.s_grid, self.phi_values)]


@dataclass(frozen=True)
class DimensionResult:
    value: float
    method: str
    bracket: Interval
    depth: int
    status: str = "exact"

    def row(self):
        return (self.method, self.value, self.bracket.lo, self.bracket.hi, self.depth)


def bisect_root(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Bracket of width <= tol around the sign change of a decreasing ``f``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _log_lengths(lo, hi, width) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log((hi - lo) / width)


def _log_partition_sum(loglen: np.ndarray, s: float) -> float:
    """``log sum exp(s * loglen)`` with zero-length cylinders dropped."""
    if s == 0:
        return math.log(loglen.size)
    finite = loglen[np.isfinite(loglen)]
    if finite.size == 0:
        return -math.inf
    x = s * finite
    top = x.max()
    return float(top + math.log(np.exp(x - top).sum()))


def cylinder_log_lengths(F: Cplifs, n: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """``log(|I_w| / |I|)`` over all words of length ``n`` (``-inf`` for points)."""
    I = F.interval
    if n == 0:
        return np.zeros(1)
    lo, hi = cylinder_arrays(F, n, budget)
    return _log_lengths(lo, hi, float(I.hi - I.lo))


def direct_pressure(F: Cplifs, s: float, n: int, budget: int = DEFAULT_BUDGET) -> float:
    """Finite-depth pressure ``(1/n) log sum_w |I_w|^s``."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if n < 1:
        raise ValueError("depth must be >= 1")
    if s == 0:
        return math.log(F.m)
    return _log_partition_sum(cylinder_log_lengths(F, n, budget), s) / n


def pressure_window(F: Cplifs, s: float, n: int, budget: int = DEFAULT_BUDGET):
    """Rows ``(k, phi_k, increment_k)`` for ``k = 1..n``.

    ``increment_k = log Z_k - log Z_{k-1}`` cancels the constant prefactor
    that slows down ``phi_k``; it is the better estimate for bounded-distortion
    systems.
    """
    width = float(F.interval.length)
    rows = []
    prev = 0.0
    for level, lo, hi in cylinder_levels(F, n, budget):
        if level == 0:
            continue
        logz = _log_partition_sum(_log_lengths(lo, hi, width), s)
        rows.append((level, logz / level, logz - prev))
        prev = logz
    return rows


def pressure_curve(F: Cplifs, s_grid: Sequence[float], n: int, budget: int = DEFAULT_BUDGET) -> PressureCurve:
    loglen = cylinder_log_lengths(F, n, budget)
    phis = tuple(math.log(F.m) if s == 0 else _log_partition_sum(loglen, s) / n for s in s_grid)
    return PressureCurve(tuple(s_grid), phis, n)


def upper_s_bound(F: Cplifs) -> float:
    """``s`` above which the normalised pressure is negative at every depth."""
    return math.log(F.m) / -math.log(float(F.max_abs_slope)) + 1


def natural_dimension_direct(F: Cplifs, n: int = 12, tol: float = 1e-6,
                             budget: int = DEFAULT_BUDGET) -> DimensionResult:
    loglen = cylinder_log_lengths(F, n, budget)

    def phi(s):
        return math.log(F.m) if s == 0 else _log_partition_sum(loglen, s) / n

    s_hi = upper_s_bound(F)
    if phi(s_hi) >= 0:
        raise BracketFailure(f"pressure at s_hi={s_hi} is not negative")
    lo, hi = bisect_root(phi, 0.0, s_hi, tol)
    return DimensionResult(0.5 * (lo + hi), "direct", Interval(lo, hi), n)


def moran_dimension(ratios: Sequence[float], tol: float = 1e-12) -> float:
    """Root of ``sum r_i^s = 1`` for contraction ratios in (0, 1)."""
    ratios = [abs(float(r)) for r in ratios]
    if not ratios:
        raise ValueError("EmptyList: no ratios given")
    if any(not 0 < r < 1 for r in ratios):
        raise ValueError("ratios must lie in (0, 1)")
    if len(ratios) == 1:
        return 0.0
    hi = math.log(len(ratios)) / -math.log(max(ratios)) + 1.0

    def g(s):
        return math.fsum(r ** s for r in ratios) - 1.0

    lo, hi = bisect_root(g, 0.0, hi, tol)
    return 0.5 * (lo + hi)


def count_boxes(lo: np.ndarray, hi: np.ndarray, delta: float, eta: float = 1e-9) -> int:
    """Number of grid cells ``[i*delta, (i+1)*delta)`` meeting the intervals.

    ``eta`` absorbs rounding when an endpoint sits on a grid line.
    """
    first = np.floor(lo / delta + eta).astype(np.int64)
    last = np.maximum(first, np.ceil(hi / delta - eta).astype(np.int64) - 1)
    order = np.argsort(first, kind="stable")
    first, last = first[order], last[order]
    run = np.maximum.accumulate(last)
    starts = np.flatnonzero(first[1:] > run[:-1] + 1) + 1
    bounds = np.concatenate(([0], starts, [first.size]))
    total = int(np.sum(run[bounds[1:] - 1] - first[bounds[:-1]] + 1))
    return int(total)


def box_counting_estimate(cover: Sequence[Interval], grid_exponents: Sequence[int],
                          base: float = 2.0) -> float:
    """Least-squares slope of ``log N(delta)`` against ``log(1/delta)``, ``delta = base**-k``."""
    if not cover:
        raise ValueError("empty cover")
    ks = sorted(set(grid_exponents))
    if len(ks) < 3:
        raise DegenerateFit("need at least three distinct grid scales")
    lo = np.array([float(c.lo) for c in cover])
    hi = np.array([float(c.hi) for c in cover])
    x = np.array([k * math.log(base) for k in ks])
    y = np.array([math.log(count_boxes(lo, hi, base ** -k)) for k in ks])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def merged_length(lo: np.ndarray, hi: np.ndarray) -> float:
    """Total length of a union of closed intervals."""
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    total = 0.0
    # vectorised sweep: a new block starts where lo exceeds the running max of hi
    run_hi = np.maximum.accumulate(hi)
    starts = np.flatnonzero(lo[1:] > run_hi[:-1]) + 1
    bounds = np.concatenate(([0], starts, [lo.size]))
    for a, b in zip(bounds[:-1], bounds[1:]):
        total += run_hi[b - 1] - lo[a]
    return float(total)


EXACT_COVER_LIMIT = 2 ** 15


def _exact_merged_length(F: Cplifs, n: int):
    cells = [F.interval]
    for _ in range(n):
        cells = [f.image(c) for f in F.maps for c in cells]
    cells.sort(key=lambda c: c.lo)
    total, lo, hi = 0, cells[0].lo, cells[0].hi
    for c in cells[1:]:
        if c.lo > hi:
            total += hi - lo
            lo, hi = c.lo, c.hi
        else:
            hi = max(hi, c.hi)
    return total + hi - lo


def lebesgue_upper_estimate(F: Cplifs, n: int, budget: int = DEFAULT_BUDGET):
    """Length of the union of the level-n cylinders, an upper bound for the attractor's measure.

    Exact systems with at most ``EXACT_COVER_LIMIT`` cylinders get a
    ``Fraction``; everything else is computed in floats.
    """
    if n == 0:
        return F.interval.length if F.exact else float(F.interval.length)
    if F.exact and F.m ** n <= EXACT_COVER_LIMIT:
        check_budget(n, F.m ** n, budget)
        return _exact_merged_length(F, n)
    lo, hi = cylinder_arrays(F, n, budget)
    return merged_length(lo, hi)
