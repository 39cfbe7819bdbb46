"""Exact fixed-radius neighbor search on a uniform grid.

Points are bucketed into cubic cells whose edge is at least the query
radius, so every neighbor of a query lies in the 3^d cells around the
query's own cell.  Candidates are returned in a canonical order (cell
offsets in a fixed lexicographic order, ascending point index inside a
cell) which makes downstream floating point sums reproducible.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from numpy.typing import NDArray

# relative slack on the cell edge; keeps floor() rounding from pushing a
# neighbor two cells away (valid while |coord| / cell < ~1e9)
_EDGE_SLACK = 1e-6
_MAX_CELL_COORD = 1e8
_MAX_LINEAR_CELLS = 2**62


class GridIndex:
    """Uniform grid over ``points`` for radius queries up to ``radius``.

    When a grid is not worthwhile or not safe (unbounded radius, too few
    points, cell coordinates too large) the index degrades to a linear
    scan; results are identical either way.
    """

    def __init__(self, points: NDArray[np.float64], radius: float, min_points: int = 64):
        self.points = points
        self.n, self.dim = points.shape
        self.radius = float(radius)
        self.cell = self.radius * (1.0 + _EDGE_SLACK)
        self.linear_scan = True
        if not math.isfinite(self.cell) or self.n < min_points:
            return
        scaled = points / self.cell
        if np.max(np.abs(scaled)) > _MAX_CELL_COORD:
            return
        coords = np.floor(scaled).astype(np.int64)
        lo = coords.min(axis=0)
        extent = coords.max(axis=0) - lo + 1
        if math.prod(int(e) for e in extent) >= _MAX_LINEAR_CELLS:
            return
        # row-major strides: linear id order equals lexicographic cell order
        strides = np.ones(self.dim, dtype=np.int64)
        for k in range(self.dim - 2, -1, -1):
            strides[k] = strides[k + 1] * extent[k + 1]
        lin = (coords - lo) @ strides
        order = np.argsort(lin, kind="stable")
        cell_ids, starts, counts = np.unique(lin[order], return_index=True, return_counts=True)

        self.linear_scan = False
        self._lo = lo
        self._extent = extent
        self._strides = strides
        self._order = order
        self._cell_ids = cell_ids
        self._starts = starts
        self._counts = counts
        self._offsets = np.array(list(itertools.product((-1, 0, 1), repeat=self.dim)), dtype=np.int64)

    def candidate_counts(self, queries: NDArray[np.float64]) -> NDArray[np.int64]:
        """Number of candidates each query would receive."""
        if self.linear_scan:
            return np.full(len(queries), self.n, dtype=np.int64)
        _, counts = self._cell_ranges(queries)
        return counts.sum(axis=1)

    def candidates(self, queries: NDArray[np.float64]) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
        """Candidate pairs for a block of queries.

        Returns ``(query_ids, point_ids)``, grouped by query in ascending
        query order.  The candidate set of each query is a superset of the
        points within ``radius`` of it.
        """
        nq = len(queries)
        if self.linear_scan:
            qid = np.repeat(np.arange(nq, dtype=np.int64), self.n)
            pid = np.tile(np.arange(self.n, dtype=np.int64), nq)
            return qid, pid
        starts, counts = self._cell_ranges(queries)
        counts = counts.ravel()
        starts = starts.ravel()
        total = int(counts.sum())
        qid = np.repeat(np.repeat(np.arange(nq, dtype=np.int64), len(self._offsets)), counts)
        # position inside each (query, cell) run
        run_begin = np.repeat(np.cumsum(counts) - counts, counts)
        within = np.arange(total, dtype=np.int64) - run_begin
        pid = self._order[np.repeat(starts, counts) + within]
        return qid, pid

    def query_radius(self, x: NDArray[np.float64], radius: float) -> NDArray[np.int64]:
        """Sorted indices of points with ||x - p|| <= radius (any radius)."""
        if self.linear_scan or radius > self.radius:
            cand = np.arange(self.n, dtype=np.int64)
        else:
            _, cand = self.candidates(x[None, :])
        dist = np.sqrt(np.sum((x - self.points[cand]) ** 2, axis=1))
        return np.sort(cand[dist <= radius])

    def _cell_ranges(self, queries):
        # far-away queries are clamped; they land in empty cells either way
        scaled = np.clip(queries / self.cell, -4 * _MAX_CELL_COORD, 4 * _MAX_CELL_COORD)
        qc = np.floor(scaled).astype(np.int64) - self._lo
        nb = qc[:, None, :] + self._offsets[None, :, :]
        valid = np.all((nb >= 0) & (nb < self._extent), axis=2)
        lin = np.where(valid, nb @ self._strides, -1)
        pos = np.searchsorted(self._cell_ids, lin)
        pos_c = np.minimum(pos, len(self._cell_ids) - 1)
        found = valid & (self._cell_ids[pos_c] == lin)
        starts = np.where(found, self._starts[pos_c], 0)
        counts = np.where(found, self._counts[pos_c], 0)
        return starts, counts
