"""Orbit graph of critical points, exact overlaps and periodic critical orbits.

Points of the doubled space are stored as ``(value, side)``.  A side tag
records which one-sided neighbourhood (germ) of the value is meant: ``"-"``
for the left germ, ``"+"`` for the right germ and ``"plain"`` for the two
endpoints of the supporting interval, which have only one germ inside it.
Inverse branches act on germs; a branch with negative slope swaps the sides.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import CapReached
from .ifs_core import (DEFAULT_BUDGET, TAU_EQ, Branch, Cplifs, SimilarityMap, check_budget,
                       generated_self_similar, same)
from .markov import Partition, _fmt, critical_points, monotonicity_partition
from .weighted import WeightedGraphMatrix

MINUS, PLUS, PLAIN = "-", "+", "plain"
DEFAULT_DEPTH = 12
DEFAULT_NODE_CAP = 50_000


@dataclass(frozen=True)
class DoubledPoint:
    value: object
    side: str

    def __str__(self):
        v = _fmt(self.value)
        return v if self.side == PLAIN else v + self.side

    @property
    def zeta(self) -> "DoubledPoint":
        flip = {MINUS: PLUS, PLUS: MINUS, PLAIN: PLAIN}
        return DoubledPoint(self.value, flip[self.side])


@dataclass(frozen=True)
class OrbitEdge:
    src: int
    dst: int
    branch: tuple
    abs_slope: float


@dataclass
class OrbitGraph:
    F: Cplifs
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    depth: int = 0
    cap_reached: bool = False

    def index_of(self, value, side=None) -> list[int]:
        return [i for i, p in enumerate(self.nodes)
                if same(p.value, value) and (side is None or p.side == side)]

    def edge_set(self) -> set:
        """``(str(src), str(dst), branch)`` triples, convenient for tests."""
        return {(str(self.nodes[e.src]), str(self.nodes[e.dst]), e.branch) for e in self.edges}


def _germ_inside(x, side, I, tol) -> bool:
    lo, hi = I.lo, I.hi
    if side == PLUS:
        return lo - tol <= x < hi - tol
    if side == MINUS:
        return lo + tol < x <= hi + tol
    return lo - tol <= x <= hi + tol


def _acting_side(p: DoubledPoint, F: Cplifs, tol) -> str:
    """The germ a plain endpoint stands for."""
    if p.side != PLAIN:
        return p.side
    return PLUS if same(p.value, F.interval.lo, tol or TAU_EQ) else MINUS


def _apply(br: Branch, p: DoubledPoint, F: Cplifs, partition: Partition, tol):
    """Image of ``p`` under the inverse branch, or ``None`` if undefined or outside the cells."""
    side = _acting_side(p, F, tol)
    if not _germ_inside(p.value, side, br.domain, tol):
        return None
    y = br.inverse(p.value)
    new_side = side if br.slope > 0 else (PLUS if side == MINUS else MINUS)
    I = F.interval
    if same(y, I.lo, tol or 0) or same(y, I.hi, tol or 0):
        y = I.lo if same(y, I.lo, tol or 0) else I.hi
        new_side = PLAIN
    if not any(_germ_inside(y, new_side, c, tol) for c in partition.cells):
        return None
    return DoubledPoint(y, new_side)


class _PointIndex:
    def __init__(self, exact: bool):
        self.exact = exact
        self.table: dict = {}

    def _key(self, v):
        return v if self.exact else round(float(v) / 1e-8)

    def lookup(self, v) -> list[int]:
        if self.exact:
            return list(self.table.get(v, ()))
        k = self._key(v)
        return [i for d in (-1, 0, 1) for i in self.table.get(k + d, ())]

    def add(self, v, i):
        self.table.setdefault(self._key(v), []).append(i)


def _start_points(F: Cplifs, partition: Partition) -> list[DoubledPoint]:
    I = F.interval
    pts = []
    for c in partition.cells:
        for x, side in ((c.lo, PLUS), (c.hi, MINUS)):
            if same(x, I.lo) or same(x, I.hi):
                side = PLAIN
            p = DoubledPoint(x, side)
            if not any(same(q.value, x) and q.side == side for q in pts):
                pts.append(p)
    return pts


def build_orbit_graph(F: Cplifs, partition: Partition | None = None, depth: int = DEFAULT_DEPTH,
                      node_cap: int = DEFAULT_NODE_CAP) -> OrbitGraph:
    """Inverse-branch orbits of the cell endpoints, truncated at word length ``depth``.

    An edge ``a -> b`` labelled ``(k, j)`` is stored when ``b`` equals the
    image of ``a`` or its reflected germ; images that would exceed the depth
    or the node cap only produce edges into nodes that already exist.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if partition is None:
        partition = monotonicity_partition(F)
    tol = 0 if F.exact else TAU_EQ
    G = OrbitGraph(F, depth=depth)
    index = _PointIndex(F.exact)

    def find(p: DoubledPoint):
        for i in index.lookup(p.value):
            q = G.nodes[i]
            if q.side == p.side and same(q.value, p.value):
                return i
        return None

    def add(p: DoubledPoint) -> int:
        G.nodes.append(p)
        index.add(p.value, len(G.nodes) - 1)
        return len(G.nodes) - 1

    levels = []
    for p in _start_points(F, partition):
        add(p)
        levels.append(0)
    queue = deque(range(len(G.nodes)))
    branches = F.branches
    while queue:
        i = queue.popleft()
        if levels[i] >= depth:
            continue
        for br in branches:
            q = _apply(br, G.nodes[i], F, partition, tol)
            if q is None or find(q) is not None:
                continue
            if len(G.nodes) >= node_cap:
                G.cap_reached = True
                continue
            add(q)
            levels.append(levels[i] + 1)
            queue.append(len(G.nodes) - 1)

    # edge pass: every node, linking to all stored germs of the image value
    for i, p in enumerate(G.nodes):
        for br in branches:
            q = _apply(br, p, F, partition, tol)
            if q is None:
                continue
            for t in index.lookup(q.value):
                if same(G.nodes[t].value, q.value):
                    G.edges.append(OrbitEdge(i, t, br.label, abs(float(br.slope))))
    return G


def orbit_matrix(G: OrbitGraph) -> WeightedGraphMatrix:
    return WeightedGraphMatrix.from_edges(len(G.nodes), ((e.src, e.dst, e.abs_slope) for e in G.edges))


def verify_orbit_edges(G: OrbitGraph) -> list[OrbitEdge]:
    """Edges whose target value is not the inverse-branch image of the source."""
    lookup = {b.label: b for b in G.F.branches}
    bad = []
    for e in G.edges:
        br = lookup[e.branch]
        if not same(br.inverse(G.nodes[e.src].value), G.nodes[e.dst].value):
            bad.append(e)
    return bad


def orbit_to_dot(G: OrbitGraph) -> str:
    lines = ["digraph orbit {"]
    for i, p in enumerate(G.nodes):
        lines.append(f'  n{i} [label="{p}"];')
    for e in G.edges:
        lines.append(f'  n{e.src} -> n{e.dst} [label="{e.branch[0]}.{e.branch[1]}:{_fmt(e.abs_slope)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# exact overlaps and separation -------------------------------------------------

@dataclass(frozen=True)
class OverlapPair:
    depth: int
    word_i: tuple
    word_j: tuple
    slope_product: float | Fraction
    translation_gap: float | Fraction
    verdict: str

    def row(self):
        w = lambda word: "".join(map(str, word)) if max(word) < 10 else ".".join(map(str, word))
        return (self.depth, w(self.word_i), w(self.word_j), _fmt(self.slope_product),
                _fmt(self.translation_gap), self.verdict)


OVERLAP_CSV_HEADER = ("depth", "word_i", "word_j", "slope_product", "translation_gap", "verdict")


@dataclass
class OverlapReport:
    pairs: list = field(default_factory=list)
    esc_min_distances: dict = field(default_factory=dict)
    c_estimates: dict = field(default_factory=dict)
    truncated: bool = False

    @property
    def has_overlap(self) -> bool:
        return bool(self.pairs)

    @property
    def first_overlap_depth(self) -> int | None:
        return min((p.depth for p in self.pairs), default=None)


def _word(index: int, m: int, n: int) -> tuple:
    digits = []
    for _ in range(n):
        index, r = divmod(index, m)
        digits.append(r + 1)
    return tuple(reversed(digits))


def _compose_exact(S: Sequence[SimilarityMap], word: tuple) -> tuple:
    slope, trans = Fraction(1), Fraction(0)
    for a in word:
        r, t = Fraction(S[a - 1].slope), Fraction(S[a - 1].translation)
        slope, trans = slope * r, slope * t + trans
    return slope, trans


def _level_arrays(S, n, budget):
    check_budget(n, len(S) ** n, budget)
    rho = np.array([float(s.slope) for s in S])
    tr = np.array([float(s.translation) for s in S])
    slopes, trans = np.ones(1), np.zeros(1)
    for level in range(1, n + 1):
        # S_a o S_w with a the new first letter, kept most significant
        slopes = np.concatenate([r * slopes for r in rho])
        trans = np.concatenate([r * trans + t for r, t in zip(rho, tr)])
        yield level, slopes, trans


def _float_classes(slopes, trans, rel=1e-12, tau=TAU_EQ):
    """Groups of word indices with equal slope (relative) and translation (absolute)."""
    order = np.lexsort((trans, slopes))
    s, t = slopes[order], trans[order]
    new_slope = np.ones(s.size, dtype=bool)
    new_slope[1:] = np.abs(np.diff(s)) > rel * np.maximum(np.abs(s[1:]), np.abs(s[:-1]))
    cluster = np.cumsum(new_slope)
    # re-sort by translation within slope clusters
    order2 = np.lexsort((t, cluster))
    order, t, cluster = order[order2], t[order2], cluster[order2]
    same_cluster = cluster[1:] == cluster[:-1]
    gaps = np.abs(np.diff(t))
    min_gap = float(gaps[same_cluster].min()) if same_cluster.any() else math.inf
    join = same_cluster & (gaps <= tau)
    classes = []
    start = 0
    for i in range(1, order.size + 1):
        if i == order.size or not join[i - 1]:
            if i - start > 1:
                classes.append(sorted(order[start:i].tolist()))
            start = i
    return classes, min_gap


def _exact_classes(S, n):
    m = len(S)
    groups: dict = {}
    for idx in range(m ** n):
        w = _word(idx, m, n)
        groups.setdefault(_compose_exact(S, w), []).append(idx)
    classes = [sorted(v) for v in groups.values() if len(v) > 1]
    by_slope: dict = {}
    for (r, t) in groups:
        by_slope.setdefault(r, []).append(t)
    min_gap = math.inf if not classes else 0.0
    for ts in by_slope.values():
        ts.sort()
        for a, b in zip(ts, ts[1:]):
            min_gap = min(min_gap, float(b - a))
    return classes, min_gap


def exact_overlap_search(S: Sequence[SimilarityMap], n_max: int, budget: int = DEFAULT_BUDGET,
                         exact: bool | None = None, max_pairs: int = 1000) -> OverlapReport:
    """Pairs of distinct words of equal length with identical compositions.

    Each coincidence class is reported as its lexicographically first word
    against every other member.  Float coincidences are re-checked in
    rational arithmetic on the stored float parameters and labelled
    ``"exact"`` or ``"suspected"``.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    S = list(S)
    m = len(S)
    if exact is None:
        exact = all(isinstance(s.slope, Fraction) and isinstance(s.translation, Fraction) for s in S)
    check_budget(n_max, m ** n_max, budget)
    report = OverlapReport()
    levels = ((n, None, None) for n in range(1, n_max + 1)) if exact else _level_arrays(S, n_max, budget)
    for n, slopes, trans in levels:
        classes, min_gap = _exact_classes(S, n) if exact else _float_classes(slopes, trans)
        report.esc_min_distances[n] = min_gap
        if math.isfinite(min_gap):
            report.c_estimates[n] = min_gap ** (1.0 / n)
        for cls in classes:
            rep = _word(cls[0], m, n)
            r0, t0 = _compose_exact(S, rep)
            for other in cls[1:]:
                if len(report.pairs) >= max_pairs:
                    report.truncated = True
                    break
                w = _word(other, m, n)
                r1, t1 = _compose_exact(S, w)
                verdict = "exact" if (r0, t0) == (r1, t1) else "suspected"
                slope, gap = r0, abs(t1 - t0)
                if not exact:
                    slope, gap = float(slope), float(gap)
                report.pairs.append(OverlapPair(n, rep, w, slope, gap, verdict))
    return report


def esc_min_distance(S: Sequence[SimilarityMap], n: int, budget: int = DEFAULT_BUDGET,
                     exact: bool | None = None) -> tuple[float, float | None]:
    """``(min distance, c-estimate)`` over distinct words of length ``n``.

    The distance of two compositions is the translation gap when the slopes
    agree and infinite otherwise.
    """
    S = list(S)
    if exact is None:
        exact = all(isinstance(s.slope, Fraction) and isinstance(s.translation, Fraction) for s in S)
    check_budget(n, len(S) ** n, budget)
    if exact:
        _, d = _exact_classes(S, n)
    else:
        for level, slopes, trans in _level_arrays(S, n, budget):
            if level == n:
                _, d = _float_classes(slopes, trans)
    c = d ** (1.0 / n) if math.isfinite(d) else None
    return d, c


def overlap_search_system(F: Cplifs, n_max: int, budget: int = DEFAULT_BUDGET) -> OverlapReport:
    """:func:`exact_overlap_search` on the generated self-similar system of ``F``."""
    return exact_overlap_search(generated_self_similar(F), n_max, budget, exact=F.exact)


# periodic critical orbits ----------------------------------------------------

@dataclass(frozen=True)
class PeriodicFlag:
    value: object
    map_index: int
    breakpoint: object
    period: int


def periodic_critical_orbit_check(F: Cplifs, depth: int = DEFAULT_DEPTH,
                                  partition: Partition | None = None,
                                  node_cap: int = DEFAULT_NODE_CAP) -> list[PeriodicFlag]:
    """Inner critical points where two branches of one map meet and whose orbit returns.

    Such a point is ``x = f_k(b)`` for a breakpoint ``b`` inside the
    supporting interval; the orbit starts with the step ``x -> b`` and then
    follows every inverse branch for at most ``depth - 1`` further steps.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if partition is None:
        partition = monotonicity_partition(F)
    I = F.interval
    tol = 0 if F.exact else TAU_EQ
    inner = critical_points(F).inner_values

    def in_cells(y):
        return any(c.contains(y, tol) for c in partition.cells)

    flags = []
    for k, f in enumerate(F.maps, start=1):
        for b in f.breakpoints:
            if not I.lo < b < I.hi:
                continue
            x = f(b)
            if not any(same(x, v, tol or TAU_EQ) for v in inner):
                continue
            frontier, seen, period = [b], [b], None
            for step in range(1, depth + 1):
                if any(same(y, x, tol or TAU_EQ) for y in frontier):
                    period = step
                    break
                nxt = []
                for y in frontier:
                    for br in F.branches:
                        if br.domain.contains(y, tol):
                            z = br.inverse(y)
                            if in_cells(z) and not any(same(z, w, tol or TAU_EQ) for w in seen):
                                seen.append(z)
                                nxt.append(z)
                if len(seen) > node_cap:
                    raise CapReached(f"periodic orbit search exceeded {node_cap} points")
                frontier = nxt
            if period is not None:
                flags.append(PeriodicFlag(x, k, b, period))
    return flags
