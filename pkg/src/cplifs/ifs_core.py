"""Continuous piecewise linear IFS model.

A map is stored by its breakpoints, the slope on every interval of linearity
and its value at 0.  Numbers are either all ``float`` or all
``fractions.Fraction``; the second case switches equality-sensitive
computations to exact arithmetic.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import BudgetExceeded, InvalidConfig, NoConvergence, TypeMismatch

Number = Union[float, Fraction]

TAU_EQ = 1e-9
DEFAULT_BUDGET = 10**8



def same(a: Number, b: Number, tol: float = TAU_EQ) -> bool:
    """Point coincidence: exact for rationals, ``tol`` otherwise."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(a - b) <= tol


@dataclass(frozen=True)
class Interval:
    lo: Number
    hi: Number

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> Number:
        return self.hi - self.lo

    def contains(self, x: Number, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def contains_interval(self, other: "Interval", tol: float = 0.0) -> bool:
        return self.lo - tol <= other.lo and other.hi <= self.hi + tol

    def intersect(self, other: "Interval") -> "Interval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            return None
        return Interval(lo, hi)

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def as_float(self) -> tuple[float, float]:
        return float(self.lo), float(self.hi)

    def __iter__(self):
        yield self.lo
        yield self.hi

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class Violation:
    kind: str
    map_index: int
    branch_index: int | None
    message: str

    def __str__(self):
        where = f"map {self.map_index}"
        if self.branch_index is not None:
            where += f", index {self.branch_index}"
        return f"{self.kind} at {where}: {self.message}"


@dataclass(frozen=True)
class PLMap:
    """One continuous piecewise linear map; indices in messages are 1-based."""

    breakpoints: tuple
    slopes: tuple
    offset: Number

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(self.breakpoints))
        object.__setattr__(self, "slopes", tuple(self.slopes))

    @property
    def n_breaks(self) -> int:
        return len(self.breakpoints)

    @cached_property
    def translations(self) -> tuple:
        """Intercepts ``t_i`` with ``f(x) = slopes[i]*x + t_i`` on branch ``i``."""
        bps, rho = self.breakpoints, self.slopes
        t = [None] * len(rho)
        i0 = bisect.bisect_right(bps, 0)
        t[i0] = self.offset
        for i in range(i0 + 1, len(rho)):
            t[i] = t[i - 1] + (rho[i - 1] - rho[i]) * bps[i - 1]
        for i in range(i0 - 1, -1, -1):
            t[i] = t[i + 1] + (rho[i + 1] - rho[i]) * bps[i]
        return tuple(t)

    def branch_index(self, x: Number) -> int:
        return bisect.bisect_right(self.breakpoints, x)

    def __call__(self, x: Number) -> Number:
        i = self.branch_index(x)
        return self.slopes[i] * x + self.translations[i]

    def branch_domain(self, i: int) -> tuple:
        """Closure of the i-th interval of linearity as ``(lo, hi)`` with infinities."""
        lo = self.breakpoints[i - 1] if i > 0 else -math.inf
        hi = self.breakpoints[i] if i < self.n_breaks else math.inf
        return lo, hi

    def image(self, iv: Interval) -> Interval:
        vals = [self(iv.lo), self(iv.hi)]
        vals.extend(self(b) for b in self.breakpoints if iv.lo < b < iv.hi)
        return Interval(min(vals), max(vals))

    def fixed_point(self) -> Number:
        for i, (rho, t) in enumerate(zip(self.slopes, self.translations)):
            x = t / (1 - rho)
            lo, hi = self.branch_domain(i)
            if lo <= x <= hi:
                return x
        # only reachable through rounding at a breakpoint
        x = self.translations[0] / (1 - self.slopes[0])
        return x

    @property
    def max_abs_slope(self) -> Number:
        return max(abs(r) for r in self.slopes)

    def to_numpy(self):
        return (
            np.asarray([float(b) for b in self.breakpoints], dtype=float),
            np.asarray([float(r) for r in self.slopes], dtype=float),
            np.asarray([float(t) for t in self.translations], dtype=float),
        )


def check_maps(maps: Sequence[PLMap]) -> list[Violation]:
    out = []
    if len(maps) < 2:
        out.append(Violation("TooFewMaps", len(maps), None, f"need m >= 2, got {len(maps)}"))
    for k, f in enumerate(maps, start=1):
        if len(f.slopes) != f.n_breaks + 1:
            out.append(Violation("SlopeCountMismatch", k, None,
                                 f"{f.n_breaks} breakpoints need {f.n_breaks + 1} slopes, got {len(f.slopes)}"))
        for i in range(1, f.n_breaks):
            if not f.breakpoints[i - 1] < f.breakpoints[i]:
                out.append(Violation("NonIncreasingBreakpoints", k, i + 1,
                                     f"b[{i}]={f.breakpoints[i - 1]} >= b[{i + 1}]={f.breakpoints[i]}"))
        for i, r in enumerate(f.slopes, start=1):
            if r == 0 or not -1 < r < 1:
                out.append(Violation("SlopeOutOfRange", k, i, f"slope {r} not in (-1,1)\\{{0}}"))
        for i in range(1, len(f.slopes)):
            if f.slopes[i - 1] == f.slopes[i]:
                out.append(Violation("EqualAdjacentSlopes", k, i,
                                     f"slopes {i} and {i + 1} both equal {f.slopes[i]}"))
    return out


@dataclass(frozen=True)
class SimilarityMap:
    slope: Number
    translation: Number
    source: tuple[int, int] | None = None

    def __call__(self, x):
        return self.slope * x + self.translation

    def compose(self, other: "SimilarityMap") -> "SimilarityMap":
        """``self o other``."""
        return SimilarityMap(self.slope * other.slope, self.slope * other.translation + self.translation)


@dataclass(frozen=True)
class Branch:
    """Linearity branch ``(k, j)`` restricted to the supporting interval.

    ``piece`` is ``closure(J_kj) ∩ I`` and ``domain`` its image, i.e. the
    set where the inverse branch of the multi-valued map is defined.
    """

    k: int
    j: int
    slope: Number
    translation: Number
    piece: Interval
    domain: Interval

    @property
    def label(self) -> tuple[int, int]:
        return (self.k, self.j)

    def inverse(self, y: Number) -> Number:
        return (y - self.translation) / self.slope

    def inverse_interval(self, iv: Interval) -> Interval:
        a, b = self.inverse(iv.lo), self.inverse(iv.hi)
        return Interval(a, b) if a <= b else Interval(b, a)


@dataclass(frozen=True)
class Cplifs:
    maps: tuple

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        violations = check_maps(self.maps)
        if violations:
            raise InvalidConfig(violations)

    @property
    def m(self) -> int:
        return len(self.maps)

    @cached_property
    def exact(self) -> bool:
        """True when every parameter is rational (exact arithmetic mode)."""
        b, tau, rho = self.parameters()
        return all(isinstance(v, Fraction) for v in b + tau + rho)

    @property
    def type_vector(self) -> tuple[int, ...]:
        return tuple(f.n_breaks for f in self.maps)

    @property
    def max_abs_slope(self) -> Number:
        return max(f.max_abs_slope for f in self.maps)

    @cached_property
    def interval(self) -> Interval:
        return supporting_interval(self)

    @cached_property
    def branches(self) -> tuple[Branch, ...]:
        """Branches with a non-degenerate piece inside the supporting interval."""
        I = self.interval
        out = []
        for k, f in enumerate(self.maps, start=1):
            for i in range(len(f.slopes)):
                lo, hi = f.branch_domain(i)
                plo, phi = max(lo, I.lo), min(hi, I.hi)
                if not plo < phi:
                    continue
                piece = Interval(plo, phi)
                dom = f.image(piece)
                out.append(Branch(k, i + 1, f.slopes[i], f.translations[i], piece, dom))
        return tuple(out)

    def parameters(self):
        """The parameter vector split as (breakpoints, offsets, slopes)."""
        b = [x for f in self.maps for x in f.breakpoints]
        tau = [f.offset for f in self.maps]
        rho = [x for f in self.maps for x in f.slopes]
        return b, tau, rho


def _to_number(x, exact: bool) -> Number:
    if isinstance(x, str):
        x = Fraction(x.strip())
    if exact:
        return Fraction(x)
    return float(x)


def _raw_is_exact(raw_maps) -> bool:
    def ok(v):
        return isinstance(v, (str, int, Fraction)) and not isinstance(v, bool)

    for m in raw_maps:
        vals = list(m.get("breakpoints", [])) + list(m.get("slopes", [])) + [m.get("offset", 0)]
        if not all(ok(v) for v in vals):
            return False
    return True


def validate(params, exact: bool | None = None) -> Cplifs:
    """Build a :class:`Cplifs` from raw lists.

    ``params`` is either ``{"maps": [...]}`` or the list of map dicts itself,
    each with ``breakpoints``, ``slopes`` and ``offset``.  Numbers may be
    floats, ints or ``"p/q"`` strings.  Unless ``exact`` is given, exact
    rational mode is used when no input is a float literal.

    Raises :class:`InvalidConfig` listing every violated constraint.
    """
    raw_maps = params["maps"] if isinstance(params, dict) else params
    if exact is None:
        exact = _raw_is_exact(raw_maps)
    maps = []
    problems = []
    for k, m in enumerate(raw_maps, start=1):
        try:
            bps = [_to_number(x, exact) for x in m.get("breakpoints", [])]
            slopes = [_to_number(x, exact) for x in m["slopes"]]
            offset = _to_number(m.get("offset", 0), exact)
        except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
            problems.append(Violation("MalformedMap", k, None, repr(exc)))
            continue
        maps.append(PLMap(tuple(bps), tuple(slopes), offset))
    if problems:
        raise InvalidConfig(problems)
    return Cplifs(tuple(maps))


def eval_map(f: PLMap, x: Number) -> Number:
    return f(x)


def _image_all(F: Cplifs, iv: Interval) -> Interval:
    out = None
    for f in F.maps:
        im = f.image(iv)
        out = im if out is None else out.hull(im)
    return out


def _snap_endpoints(F: Cplifs, a: float, b: float):
    """Solve exactly for the hull endpoints given which pieces attain them.

    ``a, b`` approximate the endpoints.  Each endpoint of the invariant hull
    is attained by some map at ``a``, ``b`` or a breakpoint, giving one linear
    equation per endpoint in the native number type.
    """
    tol = 1e-9 * max(1.0, abs(a), abs(b))

    def candidates(f: PLMap):
        # (value, alpha, beta, gamma): value ~ alpha*lo + beta*hi + gamma
        cands = []
        for b_ in f.breakpoints:
            if a - tol <= float(b_) <= b + tol:
                cands.append((float(f(b_)), 0, 0, f(b_)))
        for x, which in ((a, 0), (b, 1)):
            i = f.branch_index(x)
            rho, t = f.slopes[i], f.translations[i]
            val = float(rho) * x + float(t)
            cands.append((val, rho if which == 0 else 0, rho if which == 1 else 0, t))
        return cands

    all_c = [c for f in F.maps for c in candidates(f)]
    lo_c = min(all_c, key=lambda c: c[0])
    hi_c = max(all_c, key=lambda c: c[0])
    one = Fraction(1) if F.exact else 1.0
    a1, b1, g1 = lo_c[1:]
    a2, b2, g2 = hi_c[1:]
    det = (one - a1) * (one - b2) - b1 * a2
    if det == 0:
        return None
    lo = (g1 * (one - b2) + b1 * g2) / det
    hi = ((one - a1) * g2 + a2 * g1) / det
    return lo, hi


def supporting_interval(F: Cplifs, tol: float = 1e-12, max_iter: int = 10**6) -> Interval:
    """Smallest compact interval mapped into itself by every map.

    When all maps share a fixed point ``phi`` the degenerate convention
    ``[phi - 1/2, phi + 1/2]`` is returned.
    """
    if not tol > 0:
        raise NoConvergence("tol must be positive")
    phi = F.maps[0].fixed_point()
    half = Fraction(1, 2) if F.exact else 0.5
    if all(same(f(phi), phi, tol) for f in F.maps):
        return Interval(phi - half, phi + half)

    fmaps = [PLMap(tuple(map(float, f.breakpoints)), tuple(map(float, f.slopes)), float(f.offset))
             for f in F.maps]
    lo = hi = float(phi)
    for _ in range(max_iter):
        nlo, nhi = lo, hi
        for f in fmaps:
            im = f.image(Interval(lo, hi))
            nlo, nhi = min(nlo, im.lo), max(nhi, im.hi)
        moved = max(lo - nlo, nhi - hi)
        lo, hi = nlo, nhi
        if moved < tol:
            break
    else:
        raise NoConvergence(f"supporting interval did not converge in {max_iter} iterations")

    if hi - lo < 10 * tol:
        mid = (lo + hi) / 2
        if all(abs(f(mid) - mid) <= 10 * tol for f in fmaps):
            mid = F.maps[0].fixed_point() if F.exact else mid
            return Interval(mid - half, mid + half)

    snapped = _snap_endpoints(F, lo, hi)
    if snapped is not None:
        slo, shi = snapped
        scale = max(1.0, abs(hi - lo))
        close = abs(float(slo) - lo) <= 1e-6 * scale and abs(float(shi) - hi) <= 1e-6 * scale
        if close and slo < shi:
            cand = Interval(slo, shi)
            slack = 0 if F.exact else 10 * tol
            if cand.contains_interval(_image_all(F, cand), slack):
                return cand
    return Interval(lo - tol, hi + tol)


def generated_self_similar(F: Cplifs) -> list[SimilarityMap]:
    """One similarity per linearity branch ``(k, i)``, in map-major order."""
    out = []
    for k, f in enumerate(F.maps, start=1):
        for i, (rho, t) in enumerate(zip(f.slopes, f.translations), start=1):
            out.append(SimilarityMap(rho, t, (k, i)))
    return out


def cylinder(F: Cplifs, word: Sequence[int], I: Interval | None = None) -> Interval:
    """``f_{i1} o ... o f_{in}(I)`` for a 1-based word, applied right to left."""
    J = F.interval if I is None else I
    for letter in reversed(tuple(word)):
        J = F.maps[letter - 1].image(J)
    return J


def _image_arrays(bps, rho, t, lo, hi):
    def f(x):
        idx = np.searchsorted(bps, x, side="right")
        return rho[idx] * x + t[idx]

    flo, fhi = f(lo), f(hi)
    out_lo, out_hi = np.minimum(flo, fhi), np.maximum(flo, fhi)
    for b, fb in zip(bps, f(bps)):
        inside = (lo < b) & (b < hi)
        if inside.any():
            out_lo = np.where(inside, np.minimum(out_lo, fb), out_lo)
            out_hi = np.where(inside, np.maximum(out_hi, fb), out_hi)
    return out_lo, out_hi


def check_budget(n: int, count: int, budget: int) -> None:
    if n * count > budget:
        raise BudgetExceeded(f"{n} x {count} = {n * count} terms exceeds budget {budget}")


def cylinder_levels(F: Cplifs, n: int, budget: int = DEFAULT_BUDGET):
    """Yield ``(level, lo, hi)`` float arrays for levels ``0..n``.

    Entries are in lexicographic word order (first letter most significant).
    """
    check_budget(max(n, 1), F.m ** n, budget)
    I = F.interval
    lo = np.array([float(I.lo)])
    hi = np.array([float(I.hi)])
    yield 0, lo, hi
    data = [f.to_numpy() for f in F.maps]
    for level in range(1, n + 1):
        parts = [_image_arrays(bps, rho, t, lo, hi) for bps, rho, t in data]
        lo = np.concatenate([p[0] for p in parts])
        hi = np.concatenate([p[1] for p in parts])
        yield level, lo, hi


def cylinder_arrays(F: Cplifs, n: int, budget: int = DEFAULT_BUDGET):
    for level, lo, hi in cylinder_levels(F, n, budget):
        if level == n:
            return lo, hi


def attractor_cover(F: Cplifs, n: int, budget: int = DEFAULT_BUDGET) -> list[Interval]:
    """The ``m**n`` level-n cylinder intervals in lexicographic word order."""
    if n == 0:
        return [F.interval]
    lo, hi = cylinder_arrays(F, n, budget)
    return [Interval(float(a), float(b)) for a, b in zip(lo, hi)]


@dataclass(frozen=True)
class ClosenessReport:
    partition_gap: float
    same_breakpoint_counts: bool
    log_slope_gap: float
    sup_norm_gap: float
    partition_cells_match: bool

    @property
    def epsilon(self) -> float:
        """Infimal eps for which all four clauses hold (strict inequalities)."""
        if not self.same_breakpoint_counts:
            return math.inf
        return max(self.partition_gap, self.log_slope_gap, self.sup_norm_gap)

    @property
    def parameter_epsilon(self) -> float:
        """Same as ``epsilon`` but ignoring the partition clause."""
        if not self.same_breakpoint_counts:
            return math.inf
        return max(self.log_slope_gap, self.sup_norm_gap)

    def is_close(self, eps: float) -> bool:
        return self.epsilon < eps


def _sup_diff(f: PLMap, g: PLMap, dom: Interval) -> float:
    pts = [dom.lo, dom.hi]
    pts += [b for b in f.breakpoints + g.breakpoints if dom.lo < b < dom.hi]
    return max(abs(float(f(x)) - float(g(x))) for x in pts)


def cplifs_distance(F: Cplifs, G: Cplifs) -> ClosenessReport:
    """Clause-by-clause closeness of two systems.

    The sup-norm clause is taken over the hull of the two supporting
    intervals.  Partitions with different cell counts are infinitely far.
    """
    from .markov import monotonicity_partition

    if F.m != G.m:
        raise TypeMismatch(f"{F.m} maps vs {G.m} maps")
    counts = F.type_vector == G.type_vector
    P, Q = monotonicity_partition(F).cells, monotonicity_partition(G).cells
    if len(P) == len(Q):
        part = max((max(abs(float(a.lo) - float(b.lo)), abs(float(a.hi) - float(b.hi)))
                    for a, b in zip(P, Q)), default=0.0)
    else:
        part = math.inf
    if counts:
        slope_gap = max(abs(math.log(abs(float(r))) - math.log(abs(float(q))))
                        for f, g in zip(F.maps, G.maps) for r, q in zip(f.slopes, g.slopes))
    else:
        slope_gap = math.inf
    dom = F.interval.hull(G.interval)
    sup = max(_sup_diff(f, g, dom) for f, g in zip(F.maps, G.maps))
    return ClosenessReport(part, counts, slope_gap, sup, len(P) == len(Q))


def from_similarities(pairs: Iterable[tuple], exact: bool | None = None) -> Cplifs:
    """Convenience constructor for breakpoint-free systems ``[(slope, offset), ...]``."""
    return validate([{"breakpoints": [], "slopes": [r], "offset": t} for r, t in pairs], exact=exact)
