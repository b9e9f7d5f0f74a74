"""Sparse nonnegative weighted graphs: SCCs and spectral radii.

Shared by the Markov diagram and the orbit graph.  A graph stores one
``|slope|`` weight per labelled edge; raising to the power ``s`` and summing
parallel edges happens in :meth:`WeightedGraphMatrix.materialize`.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import NoConvergence


@dataclass
class WeightedGraphMatrix:
    dimension: int
    entries: dict = field(default_factory=lambda: defaultdict(list))

    @classmethod
    def from_edges(cls, dimension, edges):
        """``edges`` is an iterable of ``(row, col, abs_weight)``."""
        M = cls(dimension)
        for i, j, w in edges:
            M.entries[(i, j)].append(float(w))
        return M

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.dimension)]
        for (i, j) in self.entries:
            adj[i].append(j)
        for row in adj:
            row.sort()
        return adj

    def materialize(self, s: float) -> sparse.csr_matrix:
        rows, cols, vals = [], [], []
        for (i, j), ws in sorted(self.entries.items()):
            rows.append(i)
            cols.append(j)
            vals.append(math.fsum(w ** s for w in ws))
        return sparse.csr_matrix((vals, (rows, cols)), shape=(self.dimension, self.dimension))

    def dense(self, s: float) -> np.ndarray:
        return self.materialize(s).toarray()


def strongly_connected_components(adj: list[list[int]]) -> list[tuple[list[int], bool]]:
    """Iterative Tarjan.  Returns ``(nodes, closed)`` per SCC.

    An SCC is closed when no edge leaves it.  Components come out in
    reverse topological order (sinks first).
    """
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            if pos < len(adj[v]):
                work[-1] = (v, pos + 1)
                w = adj[v][pos]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    out = []
    for comp in comps:
        members = set(comp)
        closed = all(w in members for v in comp for w in adj[v])
        out.append((comp, closed))
    return out


def _perron_irreducible(A: sparse.csr_matrix, tol: float, max_iter: int, shift: float = 0.0):
    """Collatz-Wielandt bracketed power iteration on an irreducible block."""
    n = A.shape[0]
    x = np.ones(n)
    for _ in range(max_iter):
        y = A @ x + shift * x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        if hi - lo <= tol * max(hi, 1e-300):
            return 0.5 * (lo + hi) - shift
        x = y / np.abs(y).max()
    return None


def spectral_radius(M, tol: float = 1e-12, max_iter: int = 5000) -> float:
    """Spectral radius of a nonnegative matrix, computed SCC by SCC.

    ``tol`` is relative.  Each irreducible block is solved by power
    iteration with sup-norm normalisation; periodic blocks that do not settle
    are retried with a diagonal shift.
    """
    A = sparse.csr_matrix(M)
    n = A.shape[0]
    if n == 0 or A.nnz == 0:
        return 0.0
    if (A.data < 0).any():
        raise ValueError("matrix has negative entries")
    A.eliminate_zeros()
    adj = [list(A.indices[A.indptr[i]:A.indptr[i + 1]]) for i in range(n)]
    best = 0.0
    for comp, _closed in strongly_connected_components(adj):
        if len(comp) == 1:
            v = comp[0]
            best = max(best, float(A[v, v]))
            continue
        idx = np.asarray(comp)
        B = A[idx][:, idx].tocsr()
        r = _perron_irreducible(B, tol, max_iter)
        if r is None:
            c = float(abs(B).sum(axis=1).max())
            r = _perron_irreducible(B, tol, 50 * max_iter, shift=c)
        if r is None:
            raise NoConvergence(f"power iteration failed on a block of size {len(comp)}")
        best = max(best, r)
    return best


def gelfand_radius(M, n: int = 64, squarings: int = 40) -> float:
    """Brute-force ``||M^N||_inf^(1/N)`` with ``N = n * 2**squarings``.

    Starts from ``M^n`` and keeps squaring with rescaling, which pushes the
    subexponential prefactor of the Gelfand formula to 1.  Used as an
    independent check on :func:`spectral_radius`.
    """
    A = np.asarray(M.toarray() if sparse.issparse(M) else M, dtype=float)
    log_scale = 0.0
    power = 1
    B = np.eye(A.shape[0])
    # B = A^n by binary powering, tracking the scale in log space
    base, base_log, e = A.copy(), 0.0, n
    while e:
        if e & 1:
            B = B @ base
            log_scale += base_log
            nb = np.abs(B).sum(axis=1).max()
            if nb == 0:
                return 0.0
            B /= nb
            log_scale += math.log(nb)
        e >>= 1
        if e:
            base = base @ base
            base_log *= 2
            nb = np.abs(base).sum(axis=1).max()
            if nb == 0:
                return 0.0
            base /= nb
            base_log += math.log(nb)
    power = n
    for _ in range(squarings):
        B = B @ B
        log_scale *= 2
        nb = np.abs(B).sum(axis=1).max()
        if nb == 0:
            return 0.0
        B /= nb
        log_scale += math.log(nb)
        power *= 2
    return math.exp(log_scale / power)
