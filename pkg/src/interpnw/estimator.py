"""
Interpolating Nadaraya-Watson estimator.

The fitted function follows the three-case definition used with singular
kernels:

* ``Y_i`` when the query coincides with a training point ``X_i``,
* ``0`` when no kernel weight is positive at the query,
* the kernel-weighted average of the responses otherwise.

Weights are normalized by their maximum before summation, so a very
close (but distinct) training point never produces ``inf / inf``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

from interpnw.errors import (
    DataFormatError,
    DimensionMismatch,
    DomainError,
    EmptyDataset,
    InvalidBandwidth,
    NonBinaryResponses,
    NonFiniteQuery,
)
from interpnw.index import GridIndex
from interpnw.kernels import KernelSpec, _profile_inside, eval_radial, support_radius

# bound on (query, candidate) pairs materialized at once
_PAIR_BUDGET = 1 << 21
_NO_MATCH = np.iinfo(np.int64).max


@dataclass(frozen=True, eq=False)
class Dataset:
    """``n`` points in R^d with one real response each."""

    points: NDArray[np.float64]
    responses: NDArray[np.float64]

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise DimensionMismatch(f"points must be a 2-D array, got shape {pts.shape}")
        ys = np.array(self.responses, dtype=np.float64).reshape(-1)
        if pts.shape[0] == 0:
            raise EmptyDataset("dataset has no rows")
        if pts.shape[1] == 0:
            raise DimensionMismatch("points must have at least one coordinate")
        if len(ys) != pts.shape[0]:
            raise DimensionMismatch(f"{pts.shape[0]} points but {len(ys)} responses")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(ys))):
            raise DataFormatError("dataset contains non-finite values")
        pts.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "responses", ys)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n


class Case(enum.IntEnum):
    EXACT_MATCH = 0
    EMPTY_NEIGHBORHOOD = 1
    WEIGHTED_AVERAGE = 2


@dataclass(frozen=True)
class PredictionOutcome:
    """Value of f_n at one query plus which branch produced it.

    ``detail`` is the matched training index for EXACT_MATCH, the number
    of positively weighted neighbors for WEIGHTED_AVERAGE, and ``None``
    for EMPTY_NEIGHBORHOOD.
    """

    value: float
    case: Case
    detail: int | None = None


@dataclass(frozen=True)
class BatchPrediction:
    values: NDArray[np.float64]
    cases: NDArray[np.int8]
    details: NDArray[np.int64]

    def __len__(self) -> int:
        return len(self.values)

    def outcome(self, i: int) -> PredictionOutcome:
        case = Case(int(self.cases[i]))
        detail = None if case is Case.EMPTY_NEIGHBORHOOD else int(self.details[i])
        return PredictionOutcome(float(self.values[i]), case, detail)


@dataclass(frozen=True, eq=False)
class FittedInterpolator:
    dataset: Dataset
    kernel: KernelSpec
    h: float
    index: GridIndex = field(repr=False)

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def dim(self) -> int:
        return self.dataset.dim

    @property
    def radius(self) -> float:
        return support_radius(self.kernel) * self.h


def bandwidth_for_rate(n: int, beta: float, d: int) -> float:
    """Rate-optimal bandwidth n^(-1/(2 beta + d))."""
    if n < 1 or d < 1:
        raise DomainError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if not (0.0 < beta <= 2.0):
        raise DomainError(f"smoothness beta must lie in (0, 2], got {beta}")
    return float(n) ** (-1.0 / (2.0 * beta + d))


def fit(dataset: Dataset, kernel: KernelSpec, h: float) -> FittedInterpolator:
    h = float(h)
    if not (math.isfinite(h) and h > 0):
        raise InvalidBandwidth(f"bandwidth must be positive and finite, got {h}")
    index = GridIndex(dataset.points, support_radius(kernel) * h)
    return FittedInterpolator(dataset, kernel, h, index)


def _as_queries(model: FittedInterpolator, xs: ArrayLike) -> NDArray[np.float64]:
    q = np.asarray(xs, dtype=np.float64)
    if q.ndim == 1 and model.dim == 1:
        q = q[:, None]
    if q.ndim != 2 or q.shape[1] != model.dim:
        raise DimensionMismatch(f"queries must have {model.dim} coordinates, got shape {q.shape}")
    bad = ~np.all(np.isfinite(q), axis=1)
    if bad.any():
        i = int(np.argmax(bad))
        raise NonFiniteQuery(f"query {i} has non-finite coordinates", index=i)
    return q


def _as_query(model: FittedInterpolator, x: ArrayLike) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape != (model.dim,):
        raise DimensionMismatch(f"query must have {model.dim} coordinates, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteQuery("query has non-finite coordinates")
    return x


def predict_many(model: FittedInterpolator, xs: ArrayLike) -> BatchPrediction:
    """Evaluate f_n at every row of ``xs`` (vectorized)."""
    q = _as_queries(model, xs)
    nq = len(q)
    values = np.zeros(nq)
    cases = np.full(nq, Case.EMPTY_NEIGHBORHOOD, dtype=np.int8)
    details = np.full(nq, -1, dtype=np.int64)
    if nq == 0:
        return BatchPrediction(values, cases, details)
    counts = model.index.candidate_counts(q)
    begin = 0
    while begin < nq:
        # at least one query per block; otherwise fill up to the budget
        csum = np.cumsum(counts[begin:])
        end = begin + max(1, int(np.searchsorted(csum, _PAIR_BUDGET, side="right")))
        _evaluate_block(model, q[begin:end], values[begin:end], cases[begin:end], details[begin:end])
        begin = end
    return BatchPrediction(values, cases, details)


def _pair_distances(q, pts, qid, pid):
    if q.shape[1] == 1:
        return np.abs(q[qid, 0] - pts[pid, 0])
    diff = q[qid] - pts[pid]
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    # squares can underflow to 0 (a false exact match) or overflow to inf;
    # redo those pairs with max-abs scaling
    bad = (dist == 0.0) | np.isinf(dist)
    if bad.any():
        sub = diff[bad]
        scale = np.max(np.abs(sub), axis=1)
        nz = scale > 0
        fixed = np.zeros(len(sub))
        s = sub[nz] / scale[nz, None]
        fixed[nz] = scale[nz] * np.sqrt(np.einsum("ij,ij->i", s, s))
        dist[bad] = fixed
    return dist


def _evaluate_block(model, q, values, cases, details):
    pts = model.dataset.points
    ys = model.dataset.responses
    nq = len(q)
    qid, pid = model.index.candidates(q)
    dist = _pair_distances(q, pts, qid, pid)
    if math.isfinite(model.radius):
        near = dist <= model.radius
        qid, pid, dist = qid[near], pid[near], dist[near]
    if len(qid) == 0:
        return

    # case 1: zero distance; smallest matching index wins
    exact = dist == 0.0
    if exact.any():
        match = np.full(nq, _NO_MATCH)
        np.minimum.at(match, qid[exact], pid[exact])
        hit = match != _NO_MATCH
        values[hit] = ys[match[hit]]
        cases[hit] = Case.EXACT_MATCH
        details[hit] = match[hit]
        keep = ~hit[qid]
        qid, pid, dist = qid[keep], pid[keep], dist[keep]
        if len(qid) == 0:
            return

    w = _profile_inside(model.kernel, dist / model.h)
    pos = w > 0.0
    if not pos.all():
        qid, pid, dist, w = qid[pos], pid[pos], dist[pos], w[pos]
        if len(qid) == 0:
            return
    seg = np.flatnonzero(np.r_[True, qid[1:] != qid[:-1]])
    wmax = np.maximum.reduceat(w, seg)

    overflow = ~np.isfinite(wmax)
    if overflow.any():
        # distance so small that r**-a overflows: snap to the nearest point
        ends = np.r_[seg[1:], len(qid)]
        for s, e in zip(seg[overflow], ends[overflow]):
            d = dist[s:e]
            j = int(pid[s:e][d == d.min()].min())
            owner = qid[s]
            values[owner] = ys[j]
            cases[owner] = Case.EXACT_MATCH
            details[owner] = j
        keep = np.repeat(~overflow, np.diff(np.r_[seg, len(qid)]))
        qid, pid, w = qid[keep], pid[keep], w[keep]
        if len(qid) == 0:
            return
        seg = np.flatnonzero(np.r_[True, qid[1:] != qid[:-1]])
        wmax = np.maximum.reduceat(w, seg)

    sizes = np.diff(np.r_[seg, len(qid)])
    owners = qid[seg]
    wn = w / np.repeat(wmax, sizes)
    y = ys[pid]
    # bincount accumulates sequentially in pair order -> reproducible sums
    num = np.bincount(qid, weights=wn * y, minlength=nq)[owners]
    den = np.bincount(qid, weights=wn, minlength=nq)[owners]
    lo = np.minimum.reduceat(y, seg)
    hi = np.maximum.reduceat(y, seg)
    values[owners] = np.clip(num / den, lo, hi)
    cases[owners] = Case.WEIGHTED_AVERAGE
    details[owners] = sizes


def predict(model: FittedInterpolator, x: ArrayLike) -> PredictionOutcome:
    q = _as_query(model, x)
    return predict_many(model, q[None, :]).outcome(0)


def predict_batch(model: FittedInterpolator, xs) -> list[PredictionOutcome]:
    """Elementwise ``predict`` over a sequence of queries, order preserved."""
    if len(xs) == 0:
        return []
    batch = predict_many(model, xs)
    return [batch.outcome(i) for i in range(len(batch))]


def predict_class(model: FittedInterpolator, x: ArrayLike) -> int:
    """Plug-in classifier sign(f_n(x)) for labels in {-1, +1}; sign(0) = +1."""
    ys = model.dataset.responses
    if not np.all((ys == 1.0) | (ys == -1.0)):
        raise NonBinaryResponses("responses must all be -1 or +1")
    return -1 if predict(model, x).value < 0 else 1


def radius_neighbors(model: FittedInterpolator, x: ArrayLike, radius: float) -> NDArray[np.int64]:
    """Indices ``i`` with ``||x - X_i|| <= radius``, sorted ascending."""
    q = _as_query(model, x)
    radius = float(radius)
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    return model.index.query_radius(q, radius)


def local_weights(model: FittedInterpolator, x: ArrayLike) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
    """Indices and max-normalized weights defining f_n at ``x``.

    ``f_n(x) == sum(w * Y[idx]) / sum(w)`` whenever ``idx`` is non-empty;
    an exact match yields a single index with weight 1, and an empty
    neighborhood yields empty arrays.
    """
    q = _as_query(model, x)
    _, cand = model.index.candidates(q[None, :])
    dist = _pair_distances(q[None, :], model.dataset.points, np.zeros(len(cand), dtype=np.int64), cand)
    exact = dist == 0.0
    if exact.any():
        return np.array([cand[exact].min()]), np.ones(1)
    w = eval_radial(model.kernel, dist / model.h)
    pos = w > 0.0
    cand, w, dist = cand[pos], w[pos], dist[pos]
    if len(w) == 0:
        return cand, w
    wmax = w.max()
    if not np.isfinite(wmax):
        j = cand[dist == dist.min()].min()
        return np.array([j]), np.ones(1)
    return cand, w / wmax


# ---------------------------------------------------------------- CSV

def _read_rows(path, what):
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise DataFormatError(f"{what} file not found: {path}") from None
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"{what} file is not UTF-8: {exc}") from None
    if not rows:
        raise DataFormatError(f"{what} file is empty", row=1)
    return [c.strip() for c in rows[0]], rows[1:]


def _parse_floats(rows, width, what):
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        line = i + 2
        if len(row) != width:
            raise DataFormatError(f"expected {width} fields, got {len(row)}", row=line)
        try:
            out[i] = [float(c) for c in row]
        except ValueError as exc:
            raise DataFormatError(f"bad number in {what}: {exc}", row=line) from None
        if not np.all(np.isfinite(out[i])):
            raise DataFormatError("non-finite value", row=line)
    return out


def _check_header(header, names, what):
    if header != names:
        raise DataFormatError(f"{what} header must be {','.join(names)}, got {','.join(header)}", row=1)


def read_dataset_csv(path) -> Dataset:
    """Read ``x1,...,xd,y`` CSV into a Dataset."""
    header, rows = _read_rows(path, "dataset")
    d = len(header) - 1
    if d < 1:
        raise DataFormatError("dataset header needs at least x1,y", row=1)
    _check_header(header, [f"x{k}" for k in range(1, d + 1)] + ["y"], "dataset")
    rows = [r for r in rows if r]
    if not rows:
        raise EmptyDataset("dataset has no rows")
    data = _parse_floats(rows, d + 1, "dataset")
    return Dataset(data[:, :d], data[:, d])


def write_dataset_csv(dataset: Dataset, path) -> None:
    header = [f"x{k}" for k in range(1, dataset.dim + 1)] + ["y"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for x, y in zip(dataset.points, dataset.responses):
            w.writerow([repr(float(v)) for v in x] + [repr(float(y))])


def read_queries_csv(path) -> NDArray[np.float64]:
    """Read ``x1,...,xd`` CSV of query points (a trailing ``y`` column is ignored)."""
    header, rows = _read_rows(path, "query")
    if header and header[-1] == "y":
        header = header[:-1]
        rows = [r[:-1] for r in rows if r]
    d = len(header)
    if d < 1:
        raise DataFormatError("query header needs at least x1", row=1)
    _check_header(header, [f"x{k}" for k in range(1, d + 1)], "query")
    return _parse_floats([r for r in rows if r], d, "query")


PREDICTION_CASE_NAMES = {
    Case.EXACT_MATCH: "exact",
    Case.EMPTY_NEIGHBORHOOD: "empty",
    Case.WEIGHTED_AVERAGE: "weighted",
}


def write_predictions_csv(queries: NDArray[np.float64], batch: BatchPrediction, fh) -> None:
    """Write ``x1..xd,f_n,case,detail`` rows to an open text stream."""
    d = queries.shape[1]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([f"x{k}" for k in range(1, d + 1)] + ["f_n", "case", "detail"])
    for i, x in enumerate(queries):
        out = batch.outcome(i)
        detail = "" if out.detail is None else str(out.detail)
        w.writerow([repr(float(v)) for v in x] + [repr(out.value), PREDICTION_CASE_NAMES[out.case], detail])


def read_predictions_csv(path) -> tuple[NDArray[np.float64], BatchPrediction]:
    header, rows = _read_rows(path, "prediction")
    d = len(header) - 3
    _check_header(header, [f"x{k}" for k in range(1, d + 1)] + ["f_n", "case", "detail"], "prediction")
    names = {v: k for k, v in PREDICTION_CASE_NAMES.items()}
    rows = [r for r in rows if r]
    q = _parse_floats([r[:d + 1] for r in rows], d + 1, "prediction")
    cases = np.empty(len(rows), dtype=np.int8)
    details = np.full(len(rows), -1, dtype=np.int64)
    for i, r in enumerate(rows):
        try:
            cases[i] = names[r[d + 1]]
            if r[d + 2]:
                details[i] = int(r[d + 2])
        except (KeyError, ValueError, IndexError):
            raise DataFormatError("bad case/detail fields", row=i + 2) from None
    return q[:, :d], BatchPrediction(q[:, d].copy(), cases, details)
