"""
Monte Carlo checks of the estimator's convergence behaviour.

* :func:`run_rate_experiment` -- mean squared error over a geometric grid
  of sample sizes with the rate-optimal bandwidth, and the fitted
  log-log slope next to the minimax exponent ``-2 beta / (2 beta + d)``.
* :func:`bias_variance_probe` -- design/noise split of the pointwise
  error at ``x0`` into squared bias, variance and the empty-neighborhood
  remainder.
* :func:`empty_event_frequency` -- how often no sample point falls
  within ``h`` of the query, against the exact probability.

Replicates are independent work items, each with its own keyed random
stream (see :mod:`interpnw.rng`), and results are aggregated in a fixed
(n, replicate) order.  Running with several workers therefore gives
bit-identical output to a serial run.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate

from interpnw.datagen import Scenario, sample_dataset
from interpnw.errors import (
    AnalyticUnavailable,
    DataFormatError,
    InputError,
    InsufficientPoints,
    NonPositiveValue,
    NonResampleableNoise,
    OutOfSupport,
)
from interpnw.estimator import (
    Case,
    Dataset,
    bandwidth_for_rate,
    fit,
    local_weights,
    predict_many,
)
from interpnw.kernels import KernelSpec, validate_for_dimension
from interpnw.rng import stream


def theoretical_exponent(beta: float, d: int) -> float:
    return -2.0 * beta / (2.0 * beta + d)


# ------------------------------------------------------------ power law

@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    slope_stderr: float


def fit_power_law(pairs: Sequence[tuple[float, float]]) -> PowerLawFit:
    """OLS fit of log(y) = intercept + slope * log(n) (natural logs).

    ``slope_stderr`` is the usual OLS standard error; it is NaN with only
    two points (no residual degrees of freedom).
    """
    pairs = list(pairs)
    if len(pairs) < 2:
        raise InsufficientPoints(f"need at least 2 points, got {len(pairs)}")
    arr = np.asarray(pairs, dtype=np.float64)
    if not np.all(arr > 0):
        raise NonPositiveValue("power-law fit needs strictly positive n and y")
    x = np.log(arr[:, 0])
    y = np.log(arr[:, 1])
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0:
        raise InsufficientPoints("all n values are equal")
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    k = len(x)
    if k > 2:
        resid = y - intercept - slope * x
        stderr = math.sqrt(np.sum(resid**2) / (k - 2) / sxx)
    else:
        stderr = math.nan
    return PowerLawFit(float(slope), float(intercept), stderr)


# ------------------------------------------------------------ rates

@dataclass(frozen=True)
class Pointwise:
    x0: tuple[float, ...]

    label = "pointwise"


@dataclass(frozen=True)
class Integrated:
    n_eval: int = 1000

    label = "integrated"


@dataclass(frozen=True, eq=False)
class RateExperimentConfig:
    scenario: Scenario
    kernel: KernelSpec
    n_grid: tuple[int, ...]
    replicates: int
    evaluation: Pointwise | Integrated
    seed: int = 0
    report_excess_risk: bool = False
    allow_invalid_kernel: bool = False
    workers: int = 1

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        if len(grid) < 3:
            raise InputError(f"n_grid needs at least 3 sizes, got {len(grid)}")
        if grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise InputError("n_grid must be positive and strictly increasing")
        if self.replicates < 1:
            raise InputError(f"replicates must be >= 1, got {self.replicates}")
        if self.workers < 1:
            raise InputError(f"workers must be >= 1, got {self.workers}")
        ev = self.evaluation
        if isinstance(ev, Pointwise):
            x0 = np.asarray(ev.x0, dtype=np.float64).reshape(-1)
            if x0.shape != (self.scenario.dim,) or not self.scenario.marginal.contains(x0):
                raise OutOfSupport(f"x0={list(ev.x0)} is not in the scenario support")
            if self.report_excess_risk:
                raise InputError("excess risk is reported alongside integrated MSE only")
        elif isinstance(ev, Integrated):
            if ev.n_eval < 1:
                raise InputError(f"n_eval must be >= 1, got {ev.n_eval}")
        else:
            raise InputError(f"unknown evaluation {ev!r}")
        if not self.allow_invalid_kernel:
            validate_for_dimension(self.kernel, self.scenario.dim)


@dataclass(frozen=True)
class RateRow:
    n: int
    h: float
    mean_mse: float
    stderr: float
    empty_freq: float
    excess_risk: float | None = None
    excess_risk_stderr: float | None = None


@dataclass(frozen=True)
class RateFitResult:
    evaluation: str
    rows: tuple[RateRow, ...]
    slope: float
    slope_stderr: float
    intercept: float
    theoretical_exponent: float
    degenerate: bool = False

    @property
    def ns(self) -> list[int]:
        return [r.n for r in self.rows]


def _mean_se(vals: NDArray[np.float64]) -> tuple[float, float]:
    mean = float(np.mean(vals))
    if len(vals) < 2:
        return mean, math.nan
    return mean, float(np.std(vals, ddof=1) / math.sqrt(len(vals)))


def _rate_replicate(cfg: RateExperimentConfig, n: int, rep: int, h: float):
    sc = cfg.scenario
    model = fit(sample_dataset(sc, n, cfg.seed, rep), cfg.kernel, h)
    ev = cfg.evaluation
    if isinstance(ev, Pointwise):
        x0 = np.asarray(ev.x0, dtype=np.float64)[None, :]
        out = predict_many(model, x0)
        err = float((out.values[0] - sc.target(x0)[0]) ** 2)
        empty = float(out.cases[0] == Case.EMPTY_NEIGHBORHOOD)
        return err, empty, math.nan
    rng = stream(cfg.seed, "eval", n, rep)
    z = sc.marginal.sample(rng, ev.n_eval)
    out = predict_many(model, z)
    err = float(np.mean((out.values - sc.target(z)) ** 2))
    empty = float(np.mean(out.cases == Case.EMPTY_NEIGHBORHOOD))
    excess = math.nan
    if cfg.report_excess_risk:
        rng = stream(cfg.seed, "excess", n, rep)
        z = sc.marginal.sample(rng, ev.n_eval)
        fz = sc.target(z)
        w = sc.noise.sample(rng, fz)
        fn = predict_many(model, z).values
        excess = float(np.mean((fn - w) ** 2 - (fz - w) ** 2))
    return err, empty, excess


def _run_tasks(fn, tasks, workers):
    if workers == 1:
        return [fn(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: fn(*t), tasks))


def run_rate_experiment(config: RateExperimentConfig) -> RateFitResult:
    """Mean squared error of f_n across ``n_grid`` and its log-log slope.

    Each replicate draws a fresh dataset and fits with
    ``h = n^(-1/(2 beta + d))``.  Squared errors from empty
    neighborhoods (where f_n = 0) stay in the average.  Sizes whose mean
    error is exactly zero are left out of the slope fit and mark the
    result ``degenerate``.
    """
    sc = config.scenario
    beta, d = sc.beta, sc.dim
    hs = {n: bandwidth_for_rate(n, beta, d) for n in config.n_grid}
    tasks = [(config, n, m, hs[n]) for n in config.n_grid for m in range(config.replicates)]
    results = _run_tasks(_rate_replicate, tasks, config.workers)
    out = np.array(results).reshape(len(config.n_grid), config.replicates, 3)

    rows = []
    for i, n in enumerate(config.n_grid):
        mse, se = _mean_se(out[i, :, 0])
        row = RateRow(n, hs[n], mse, se, float(np.mean(out[i, :, 1])))
        if config.report_excess_risk:
            ex, ex_se = _mean_se(out[i, :, 2])
            row = RateRow(n, hs[n], mse, se, row.empty_freq, ex, ex_se)
        rows.append(row)

    positive = [(r.n, r.mean_mse) for r in rows if r.mean_mse > 0]
    degenerate = len(positive) < len(rows)
    if len(positive) >= 2:
        pl = fit_power_law(positive)
        slope, slope_se, icept = pl.slope, pl.slope_stderr, pl.intercept
    else:
        slope = slope_se = icept = math.nan
    return RateFitResult(
        config.evaluation.label, tuple(rows), slope, slope_se, icept,
        theoretical_exponent(beta, d), degenerate,
    )


# ------------------------------------------------------------ bias / variance

@dataclass(frozen=True)
class BiasVarianceReport:
    """Monte Carlo split of the pointwise error at x0.

    ``bias_sq``, ``variance`` and ``sigma_x_sq`` are the expectations on
    the event that x0 has a positively weighted neighbor (zero
    contribution otherwise); ``empty_contribution`` is the share of the
    error coming from the complementary event, where f_n(x0) = 0.
    """

    n: int
    h: float
    bias_sq: float
    variance: float
    sigma_x_sq: float
    bias_bound: float
    variance_scale: float
    mse: float
    empty_frequency: float
    empty_contribution: float
    bias_sq_stderr: float = math.nan
    variance_stderr: float = math.nan
    mse_stderr: float = math.nan
    smooth_bias_bound: float | None = None
    design_reps: int = 0
    noise_reps: int = 0

    @property
    def decomposition(self) -> float:
        return self.bias_sq + self.variance + self.empty_contribution


def bias_variance_probe(
    scenario: Scenario,
    kernel: KernelSpec,
    n: int,
    x0: ArrayLike,
    design_reps: int,
    noise_reps: int,
    seed: int = 0,
) -> BiasVarianceReport:
    """Estimate squared bias, variance and sigma_X^2 of f_n at ``x0``.

    The design is recentered so the query sits at the origin.  For each
    of ``design_reps`` designs the conditional mean E_Y f_n(x0) is exact
    (f_n is linear in the responses); the variance around it is estimated
    from ``noise_reps`` resampled response vectors.
    """
    if design_reps < 1 or noise_reps < 1:
        raise InputError("design_reps and noise_reps must be >= 1")
    if not scenario.noise.resampleable:
        raise NonResampleableNoise(f"{scenario.name}: noise cannot be resampled given X")
    x0 = np.asarray(x0, dtype=np.float64).reshape(-1)
    if x0.shape != (scenario.dim,) or not scenario.marginal.contains(x0):
        raise OutOfSupport(f"x0={x0.tolist()} is not in the scenario support")
    d = scenario.dim
    beta = scenario.beta
    h = bandwidth_for_rate(n, beta, d)
    f = scenario.target
    f0 = float(f(x0[None, :])[0])
    origin = np.zeros(d)

    bias = np.zeros(design_reps)
    var = np.zeros(design_reps)
    sx = np.zeros(design_reps)
    mse = np.zeros(design_reps)
    empty = np.zeros(design_reps)
    for r in range(design_reps):
        rng = stream(seed, "probe-design", n, r)
        x = scenario.marginal.sample(rng, n)
        fx = f(x)
        model = fit(Dataset(x - x0, fx), kernel, h)
        idx, w = local_weights(model, origin)
        if len(idx) == 0:
            empty[r] = 1.0
            mse[r] = f0**2
            continue
        sw = np.sum(w)
        mean_y = float(np.dot(fx[idx], w) / sw)
        noise_rng = stream(seed, "probe-noise", n, r)
        fn = np.broadcast_to(fx[idx], (noise_reps, len(idx)))
        xi = scenario.noise.sample(noise_rng, fn) - fn
        preds = mean_y + (xi @ w) / sw
        bias[r] = (mean_y - f0) ** 2
        var[r] = np.mean((preds - mean_y) ** 2)
        mse[r] = np.mean((preds - f0) ** 2)
        sx[r] = np.sum(w**2) / sw**2

    bias_sq, bias_se = _mean_se(bias)
    variance, var_se = _mean_se(var)
    mse_mean, mse_se = _mean_se(mse)
    sigma_x_sq = float(np.mean(sx))
    smooth_bound = None
    if beta > 1 and f.gradient is not None:
        gnorm = float(np.linalg.norm(f.gradient(x0[None, :])[0]))
        m = scenario.marginal
        smooth_bound = (f.lipschitz + gnorm * m.holder / m.p_min) * h ** (2 * beta) + sigma_x_sq
    return BiasVarianceReport(
        n=n,
        h=h,
        bias_sq=bias_sq,
        variance=variance,
        sigma_x_sq=sigma_x_sq,
        bias_bound=f.lipschitz**2 * h ** (2 * beta),
        variance_scale=variance * n * h**d,
        mse=mse_mean,
        empty_frequency=float(np.mean(empty)),
        empty_contribution=float(np.mean(empty)) * f0**2,
        bias_sq_stderr=bias_se,
        variance_stderr=var_se,
        mse_stderr=mse_se,
        smooth_bias_bound=smooth_bound,
        design_reps=design_reps,
        noise_reps=noise_reps,
    )


# ------------------------------------------------------------ empty event

@dataclass(frozen=True)
class EmptyEventResult:
    """Observed frequency of "no point within h of x0" and its exact value.

    ``analytic`` is None when the marginal is not uniform.
    """

    frequency: float
    analytic: float | None
    reps: int
    stderr: float = field(default=math.nan)


def _interval_overlap(c, r, lo, hi):
    return max(0.0, min(c + r, hi) - max(c - r, lo))


def _ball_box_volume(c, r, low, high):
    """Volume of the Euclidean ball B(c, r) intersected with a box."""
    if len(c) == 1:
        return _interval_overlap(c[0], r, low[0], high[0])
    a = max(low[0], c[0] - r)
    b = min(high[0], c[0] + r)
    if b <= a:
        return 0.0

    def slab(t):
        rr = math.sqrt(max(r * r - (t - c[0]) ** 2, 0.0))
        return _ball_box_volume(c[1:], rr, low[1:], high[1:])

    # the slab volume has kinks where its radius reaches a face, edge or
    # corner of the remaining box; hand those to quad as breakpoints
    gaps = np.abs(np.concatenate([c[1:] - low[1:], high[1:] - c[1:]]))
    reach = {0.0}
    for g in gaps:
        reach |= {math.hypot(s, g) for s in reach}
    kinks = sorted(
        t
        for s in reach if s < r
        for t in (c[0] - math.sqrt(r * r - s * s), c[0] + math.sqrt(r * r - s * s))
        if a < t < b
    )
    val, _ = integrate.quad(slab, a, b, points=kinks or None, epsabs=1e-13, epsrel=1e-10, limit=200)
    return val


def empty_event_probability(scenario: Scenario, n: int, h: float, x0: ArrayLike) -> float:
    """Exact P(no X_i within h of x0) for a uniform marginal on a box."""
    m = scenario.marginal
    if not m.uniform:
        raise AnalyticUnavailable(f"marginal {m.name!r} is not uniform")
    x0 = np.asarray(x0, dtype=np.float64).reshape(-1)
    low, high = m.low, m.high
    far = np.maximum(np.abs(x0 - low), np.abs(high - x0))
    if np.sqrt(np.sum(far**2)) <= h:
        return 0.0
    vol = float(np.prod(high - low))
    inside = np.all(x0 - h >= low) and np.all(x0 + h <= high)
    if inside:
        ball = math.pi ** (len(x0) / 2) * h ** len(x0) / math.gamma(len(x0) / 2 + 1)
    else:
        ball = _ball_box_volume(x0, float(h), low, high)
    q = min(max(ball / vol, 0.0), 1.0)
    return (1.0 - q) ** n


def empty_event_frequency(
    scenario: Scenario, n: int, h: float, reps: int, x0: ArrayLike, seed: int = 0
) -> EmptyEventResult:
    if reps < 1:
        raise InputError(f"reps must be >= 1, got {reps}")
    x0 = np.asarray(x0, dtype=np.float64).reshape(-1)
    if x0.shape != (scenario.dim,):
        raise InputError(f"x0 must have {scenario.dim} coordinates")
    rng = stream(seed, "empty-event", n)
    hits = 0
    # block the draws to bound memory; the stream is consumed in order
    block = max(1, (1 << 20) // max(1, n * scenario.dim))
    for s in range(0, reps, block):
        k = min(block, reps - s)
        x = scenario.marginal.sample(rng, k * n).reshape(k, n, scenario.dim)
        dist2 = np.sum((x - x0) ** 2, axis=2)
        hits += int(np.sum(~np.any(dist2 <= h * h, axis=1)))
    freq = hits / reps
    try:
        analytic = empty_event_probability(scenario, n, h, x0)
    except AnalyticUnavailable:
        analytic = None
    return EmptyEventResult(freq, analytic, reps, math.sqrt(freq * (1 - freq) / reps))


# ------------------------------------------------------------ result files

RATE_HEADER = ("n", "mean_mse", "stderr", "empty_freq")
EXCESS_HEADER = ("n", "excess_risk", "excess_risk_stderr", "mean_mse", "stderr")
BIAS_VARIANCE_HEADER = (
    "n", "h", "bias_sq", "bias_sq_stderr", "variance", "variance_stderr", "sigma_x_sq",
    "bias_bound", "variance_scale", "mse", "mse_stderr", "empty_frequency", "empty_contribution",
)


def _write_table(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([str(v) if isinstance(v, int) else repr(float(v)) for v in row])


def _read_table(path, header):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != header:
        raise DataFormatError(f"{path}: header must be {','.join(header)}", row=1)
    out = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataFormatError(f"expected {len(header)} fields", row=i)
        try:
            out.append({k: (int(v) if k == "n" else float(v)) for k, v in zip(header, row)})
        except ValueError as exc:
            raise DataFormatError(str(exc), row=i) from None
    return out


def write_rate_csv(result: RateFitResult, path) -> None:
    _write_table(path, RATE_HEADER,
                 [(r.n, r.mean_mse, r.stderr, r.empty_freq) for r in result.rows])


def read_rate_csv(path) -> list[dict]:
    return _read_table(path, RATE_HEADER)


def write_excess_csv(result: RateFitResult, path) -> None:
    _write_table(path, EXCESS_HEADER, [
        (r.n, r.excess_risk, r.excess_risk_stderr, r.mean_mse, r.stderr) for r in result.rows
    ])


def read_excess_csv(path) -> list[dict]:
    return _read_table(path, EXCESS_HEADER)


def write_summary(result: RateFitResult, path) -> None:
    lines = [
        f"evaluation={result.evaluation}",
        f"slope={result.slope!r}",
        f"slope_stderr={result.slope_stderr!r}",
        f"intercept={result.intercept!r}",
        f"theoretical_exponent={result.theoretical_exponent!r}",
        f"degenerate={str(result.degenerate).lower()}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_summary(path) -> dict[str, str]:
    out = {}
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        if "=" not in line:
            raise DataFormatError("expected key=value", row=i)
        k, v = line.split("=", 1)
        out[k] = v
    return out


def write_bias_variance_csv(reports: Sequence[BiasVarianceReport], path) -> None:
    _write_table(path, BIAS_VARIANCE_HEADER, [
        (r.n, r.h, r.bias_sq, r.bias_sq_stderr, r.variance, r.variance_stderr, r.sigma_x_sq,
         r.bias_bound, r.variance_scale, r.mse, r.mse_stderr, r.empty_frequency,
         r.empty_contribution)
        for r in reports
    ])


def read_bias_variance_csv(path) -> list[dict]:
    return _read_table(path, BIAS_VARIANCE_HEADER)
