"""Markov diagram of the expanding multi-valued map of a CPLIFS.

Nodes are closed intervals inside cells of a partition of the first-level
image ``U = f_1(I) ∪ ... ∪ f_m(I)``.  An edge ``C -> D`` labelled ``(k, j)``
means ``D = Z ∩ f_kj^{-1}(C)`` for a cell ``Z``.  The logarithm of the
spectral radius of the weighted adjacency matrix gives the pressure.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import BracketFailure
from .ifs_core import TAU_EQ, Branch, Cplifs, Interval, same
from .pressure import DimensionResult, bisect_root, upper_s_bound
from .weighted import WeightedGraphMatrix, spectral_radius, strongly_connected_components

DEFAULT_MAX_LEVEL = 40
DEFAULT_MAX_NODES = 10_000


def _tol(F: Cplifs) -> float:
    # integer zero keeps Fraction arithmetic exact
    return 0 if F.exact else TAU_EQ


def first_level_components(F: Cplifs) -> list[Interval]:
    """Connected components of ``U``, sorted."""
    I = F.interval
    ims = sorted((f.image(I) for f in F.maps), key=lambda iv: (iv.lo, iv.hi))
    tol = _tol(F)
    comps = [ims[0]]
    for iv in ims[1:]:
        last = comps[-1]
        if iv.lo <= last.hi + tol:
            comps[-1] = Interval(last.lo, max(last.hi, iv.hi))
        else:
            comps.append(iv)
    return comps


@dataclass(frozen=True)
class CriticalPoint:
    value: object
    tags: frozenset


@dataclass(frozen=True)
class CriticalSet:
    points: tuple
    inner_subset: tuple

    @property
    def values(self):
        return [p.value for p in self.points]

    @property
    def inner_values(self):
        return [p.value for p in self.inner_subset]


def _dedup_sorted(items: list[tuple], tol: float) -> list[tuple]:
    """Merge ``(value, tagset)`` pairs whose values coincide."""
    items.sort(key=lambda it: it[0])
    out = []
    for v, tags in items:
        if out and (out[-1][0] == v or (tol and abs(out[-1][0] - v) <= tol)):
            out[-1] = (out[-1][0], out[-1][1] | tags)
        else:
            out.append((v, set(tags)))
    return out


def crossing_points(F: Cplifs) -> list:
    """Points where two inverse branches agree, both defined there."""
    tol = _tol(F)
    brs = F.branches
    out = []
    for a in range(len(brs)):
        for b in range(a + 1, len(brs)):
            p, q = brs[a], brs[b]
            if p.slope == q.slope:
                continue
            x = (p.translation * q.slope - q.translation * p.slope) / (q.slope - p.slope)
            if p.domain.contains(x, tol) and q.domain.contains(x, tol):
                out.append(x)
    return out


def _in_union(x, comps, tol) -> bool:
    return any(c.lo - tol <= x <= c.hi + tol for c in comps)


def critical_points(F: Cplifs) -> CriticalSet:
    """Endpoint images, breakpoint images and crossing points inside ``U``.

    For a supporting interval ``[u, v]`` the endpoint images are
    ``f_k(u), f_k(v)``.  Only breakpoints inside ``[u, v]`` count, since the
    others do not change any map on the interval.
    """
    I = F.interval
    comps = first_level_components(F)
    tol = _tol(F)
    items = []
    for f in F.maps:
        items.append((f(I.lo), {"endpoint-image"}))
        items.append((f(I.hi), {"endpoint-image"}))
        for b in f.breakpoints:
            if I.lo <= b <= I.hi:
                items.append((f(b), {"breakpoint-image"}))
    for x in crossing_points(F):
        if _in_union(x, comps, tol):
            items.append((x, {"crossing"}))
    merged = _dedup_sorted(items, tol)
    points = tuple(CriticalPoint(v, frozenset(t)) for v, t in merged)
    inner = tuple(p for p in points
                  if any(c.lo + tol < p.value < c.hi - tol for c in comps))
    return CriticalSet(points, inner)


@dataclass(frozen=True)
class Partition:
    cells: tuple

    def locate(self, iv: Interval) -> int | None:
        los = [c.lo for c in self.cells]
        i = bisect.bisect_right(los, iv.lo) - 1
        for j in (i, i + 1, i - 1):
            if 0 <= j < len(self.cells) and self.cells[j].contains_interval(iv, TAU_EQ):
                return j
        return None

    @property
    def endpoints(self):
        pts = []
        for c in self.cells:
            pts.extend([c.lo, c.hi])
        return pts


def monotonicity_partition(F: Cplifs, refinement: Sequence | None = None) -> Partition:
    """Cells of ``U`` cut at critical points, component ends and refinement points."""
    comps = first_level_components(F)
    tol = _tol(F)
    pts = [(v, set()) for v in critical_points(F).values]
    pts += [(c.lo, set()) for c in comps] + [(c.hi, set()) for c in comps]
    if refinement:
        pts += [(x, set()) for x in refinement if _in_union(x, comps, tol)]
    cuts = [v for v, _ in _dedup_sorted(pts, tol)]
    cells = []
    for a, b in zip(cuts, cuts[1:]):
        if b - a <= tol:
            continue
        mid = (a + b) / 2
        if _in_union(mid, comps, 0):
            cells.append(Interval(a, b))
    return Partition(tuple(cells))


def heuristic_refinement(F: Cplifs, depth: int = 3) -> list:
    """Inverse-branch orbit points of the crossing points up to ``depth`` steps."""
    comps = first_level_components(F)
    tol = _tol(F)
    frontier = [x for x in crossing_points(F) if _in_union(x, comps, tol)]
    seen = list(frontier)
    for _ in range(depth):
        nxt = []
        for x in frontier:
            for br in F.branches:
                if br.domain.contains(x, tol):
                    y = br.inverse(x)
                    if _in_union(y, comps, tol) and not any(same(y, z) for z in seen):
                        seen.append(y)
                        nxt.append(y)
        frontier = nxt
    return seen


def _nondegenerate(iv: Interval | None, tol: float) -> bool:
    return iv is not None and iv.hi - iv.lo > tol


def successors(C: Interval, F: Cplifs, partition: Partition,
               branches: Iterable[Branch] | None = None) -> list[tuple[Interval, tuple[int, int]]]:
    """Labelled successors ``(cell ∩ f_kj^{-1}(C), (k, j))``; single points are dropped."""
    tol = _tol(F)
    cells = partition.cells
    los = [c.lo for c in cells]
    out = []
    for br in (F.branches if branches is None else branches):
        part = C.intersect(br.domain)
        if not _nondegenerate(part, tol):
            continue
        pre = br.inverse_interval(part)
        start = max(bisect.bisect_right(los, pre.lo) - 1, 0)
        for cell in cells[start:]:
            if cell.lo >= pre.hi:
                break
            D = cell.intersect(pre)
            if _nondegenerate(D, tol):
                out.append((D, br.label))
    return out


class _IntervalIndex:
    """Lookup of intervals up to ``TAU_EQ`` (exact dict for rationals)."""

    def __init__(self, exact: bool):
        self.exact = exact
        self.table: dict = {}
        self.h = 1e-8

    def _key(self, iv):
        return (round(float(iv.lo) / self.h), round(float(iv.hi) / self.h))

    def get(self, iv: Interval):
        if self.exact:
            return self.table.get((iv.lo, iv.hi))
        a, b = self._key(iv)
        for da in (0, -1, 1):
            for db in (0, -1, 1):
                for other, idx in self.table.get((a + da, b + db), ()):
                    if same(other.lo, iv.lo) and same(other.hi, iv.hi):
                        return idx
        return None

    def add(self, iv: Interval, idx: int):
        if self.exact:
            self.table[(iv.lo, iv.hi)] = idx
        else:
            self.table.setdefault(self._key(iv), []).append((iv, idx))


@dataclass(frozen=True)
class DiagramNode:
    interval: Interval
    level: int
    code: tuple


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    branch: tuple
    abs_slope: float


@dataclass
class MarkovDiagram:
    F: Cplifs
    partition: Partition
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    closed_flag: bool = False
    cap_reached: bool = False

    @property
    def max_level(self) -> int:
        return max((n.level for n in self.nodes), default=0)

    def level_counts(self) -> list[int]:
        counts = [0] * (self.max_level + 1)
        for n in self.nodes:
            counts[n.level] += 1
        return counts

    def restricted(self, r: int) -> "MarkovDiagram":
        """The sub-diagram on nodes of level <= r."""
        keep = [i for i, n in enumerate(self.nodes) if n.level <= r]
        remap = {old: new for new, old in enumerate(keep)}
        nodes = [self.nodes[i] for i in keep]
        edges = [Edge(remap[e.src], remap[e.dst], e.branch, e.abs_slope)
                 for e in self.edges if e.src in remap and e.dst in remap]
        closed = self.closed_flag and r >= self.max_level
        return MarkovDiagram(self.F, self.partition, nodes, edges, closed, not closed)


def grow_diagram(F: Cplifs, partition: Partition | None = None, max_level: int = DEFAULT_MAX_LEVEL,
                 max_nodes: int = DEFAULT_MAX_NODES) -> MarkovDiagram:
    """Breadth-first successor closure starting from the partition cells.

    Nodes beyond ``max_level`` or ``max_nodes`` are not created; edges into
    existing nodes are still recorded so the result is the induced
    sub-diagram.  ``closed_flag`` is set when nothing was cut off.
    """
    if partition is None:
        partition = monotonicity_partition(F)
    if max_level < 0 or max_nodes < 1:
        raise ValueError("caps must be positive")
    D = MarkovDiagram(F, partition)
    index = _IntervalIndex(F.exact)
    for i, cell in enumerate(partition.cells):
        D.nodes.append(DiagramNode(cell, 0, (i, ())))
        index.add(cell, i)
    frontier = list(range(len(D.nodes)))
    level = 0
    truncated = False
    branches = F.branches
    while frontier:
        new = []
        for src in frontier:
            node = D.nodes[src]
            for iv, label in successors(node.interval, F, partition, branches):
                dst = index.get(iv)
                if dst is None:
                    if level >= max_level or len(D.nodes) >= max_nodes:
                        truncated = True
                        continue
                    dst = len(D.nodes)
                    D.nodes.append(DiagramNode(iv, level + 1, (node.code[0], node.code[1] + (label,))))
                    index.add(iv, dst)
                    new.append(dst)
                br = next(b for b in branches if b.label == label)
                D.edges.append(Edge(src, dst, label, abs(float(br.slope))))
        frontier = new
        level += 1
    D.closed_flag = not truncated
    D.cap_reached = truncated
    return D


def associated_matrix(diagram) -> WeightedGraphMatrix:
    """Weighted adjacency with one ``|slope|`` per labelled edge."""
    return WeightedGraphMatrix.from_edges(len(diagram.nodes),
                                          ((e.src, e.dst, e.abs_slope) for e in diagram.edges))


def diagram_sccs(diagram):
    """SCCs of a diagram (or orbit graph) with closedness flags."""
    return strongly_connected_components(associated_matrix(diagram).adjacency())


def pressure_from_matrix(M: WeightedGraphMatrix, s: float, tol: float = 1e-12) -> float:
    r = spectral_radius(M.materialize(s), tol)
    return math.log(r) if r > 0 else -math.inf


def pressure_via_diagram(F: Cplifs, s: float, partition: Partition | None = None,
                         r: int = 20, max_nodes: int = DEFAULT_MAX_NODES,
                         diagram: MarkovDiagram | None = None) -> float:
    """``log rho(F_{D_r}(s))``; exact pressure when the diagram closes."""
    if diagram is None:
        diagram = grow_diagram(F, partition, r, max_nodes)
    return pressure_from_matrix(associated_matrix(diagram), s)


def natural_dimension_markov(F: Cplifs, partition: Partition | None = None, r: int = 20,
                             tol: float = 1e-6, max_nodes: int = DEFAULT_MAX_NODES,
                             diagram: MarkovDiagram | None = None) -> DimensionResult:
    """Zero of ``s -> log rho(F_{D_r}(s))`` by bisection.

    The status is ``"lower-bound"`` when the diagram was truncated.
    """
    if diagram is None:
        diagram = grow_diagram(F, partition, r, max_nodes)
    M = associated_matrix(diagram)

    def phi(s):
        return pressure_from_matrix(M, s)

    if phi(0.0) <= 0:
        raise BracketFailure("diagram pressure at s=0 is not positive")
    s_hi = upper_s_bound(F)
    for _ in range(10):
        if phi(s_hi) < 0:
            break
        s_hi *= 2
    else:
        raise BracketFailure(f"diagram pressure still nonnegative at s={s_hi}")
    lo, hi = bisect_root(phi, 0.0, s_hi, tol)
    status = "exact" if diagram.closed_flag else "lower-bound"
    return DimensionResult(0.5 * (lo + hi), "markov", Interval(lo, hi), diagram.max_level, status)


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return f"{float(x):.12g}"


def diagram_to_dot(diagram: MarkovDiagram) -> str:
    lines = ["digraph markov {"]
    for i, n in enumerate(diagram.nodes):
        lines.append(f'  n{i} [label="[{_fmt(n.interval.lo)},{_fmt(n.interval.hi)}]@{n.level}"];')
    for e in diagram.edges:
        k, j = e.branch
        lines.append(f'  n{e.src} -> n{e.dst} [label="{k}.{j}:{_fmt(e.abs_slope)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


EDGE_CSV_HEADER = ("from_lo", "from_hi", "to_lo", "to_hi", "k", "j", "abs_slope")


def diagram_edge_rows(diagram: MarkovDiagram):
    for e in diagram.edges:
        a, b = diagram.nodes[e.src].interval, diagram.nodes[e.dst].interval
        yield (_fmt(a.lo), _fmt(a.hi), _fmt(b.lo), _fmt(b.hi), e.branch[0], e.branch[1], _fmt(e.abs_slope))


def verify_edge_rows(F: Cplifs, rows, partition: Partition | None = None, tol: float = 1e-8) -> list:
    """Recompute every exported edge; returns the rows that do not check out."""
    if partition is None:
        partition = monotonicity_partition(F)
    conv = Fraction if F.exact else float
    bad = []
    for row in rows:
        flo, fhi, tlo, thi = (conv(x) for x in row[:4])
        label = (int(row[4]), int(row[5]))
        brs = [b for b in F.branches if b.label == label]
        ok = False
        if brs:
            for iv, _ in successors(Interval(flo, fhi), F, partition, brs):
                if abs(iv.lo - tlo) <= tol and abs(iv.hi - thi) <= tol:
                    ok = True
                    break
        if not ok:
            bad.append(row)
    return bad
