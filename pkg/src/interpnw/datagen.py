"""
Synthetic regression and classification scenarios.

A scenario bundles a target function with declared Hölder smoothness
``(beta, L_f)``, a marginal density bounded away from zero on a box, and
a noise model with bounded conditional variance.  Every scenario built
by :func:`make_scenario` has its declared Hölder constant certified on a
grid before it is returned.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from numpy.typing import ArrayLike, NDArray

from interpnw.errors import InvalidParams, MissingGradient, OutOfSupport, UnknownScenario
from interpnw.estimator import Dataset
from interpnw.rng import stream

SCENARIOS = ("lipschitz-cone", "holder-cusp", "smooth-sine", "constant-zero", "binary-sine")

# certification: declared constant may be exceeded by this relative slack only
HOLDER_SLACK = 1e-9
_CERT_POINTS = 2000


@dataclass(frozen=True, eq=False)
class TargetFunction:
    """Regression function ``f`` with its declared Hölder parameters."""

    name: str
    beta: float
    lipschitz: float
    evaluate: Callable[[NDArray[np.float64]], NDArray[np.float64]]
    gradient: Callable[[NDArray[np.float64]], NDArray[np.float64]] | None = None

    def __call__(self, x: ArrayLike) -> NDArray[np.float64]:
        return self.evaluate(np.atleast_2d(np.asarray(x, dtype=np.float64)))


@dataclass(frozen=True, eq=False)
class MarginalDensity:
    """Density of X on an axis-aligned box, with its (A2) bounds.

    ``holder`` is the Lipschitz constant of the density on the box (0 for
    the uniform density).
    """

    name: str
    low: NDArray[np.float64]
    high: NDArray[np.float64]
    p_min: float
    p_max: float
    holder: float
    density: Callable[[NDArray[np.float64]], NDArray[np.float64]]
    sampler: Callable[[np.random.Generator, int], NDArray[np.float64]] = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.low)

    @property
    def uniform(self) -> bool:
        return self.name == "uniform"

    def sample(self, rng: np.random.Generator, n: int) -> NDArray[np.float64]:
        return self.sampler(rng, n)

    def contains(self, x: ArrayLike) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return bool(np.all((x >= self.low) & (x <= self.high)))


class NoiseKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"
    BINARY = "binary"


@dataclass(frozen=True)
class NoiseModel:
    """Conditional law of Y given X = x, built around f(x).

    ``scale`` is the Gaussian standard deviation or the uniform half
    width; binary labels take values in {-1, +1} with mean f(x).
    """

    kind: NoiseKind
    scale: float = 0.0
    resampleable: bool = True

    @property
    def sigma_xi_sq(self) -> float:
        if self.kind is NoiseKind.GAUSSIAN:
            return self.scale**2
        if self.kind is NoiseKind.UNIFORM:
            return self.scale**2 / 3.0
        return 1.0

    def sample(self, rng: np.random.Generator, fvals: NDArray[np.float64]) -> NDArray[np.float64]:
        """Draw responses Y given the regression values f(X)."""
        fvals = np.asarray(fvals, dtype=np.float64)
        if self.kind is NoiseKind.GAUSSIAN:
            return fvals + self.scale * rng.standard_normal(fvals.shape)
        if self.kind is NoiseKind.UNIFORM:
            return fvals + rng.uniform(-self.scale, self.scale, fvals.shape)
        u = rng.random(fvals.shape)
        return np.where(u < 0.5 * (1.0 + fvals), 1.0, -1.0)


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    target: TargetFunction
    marginal: MarginalDensity
    noise: NoiseModel
    params: Mapping[str, str] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.marginal.dim

    @property
    def beta(self) -> float:
        return self.target.beta


# ------------------------------------------------------------ catalog

def _cone(c):
    def f(x):
        return np.sqrt(np.sum((x - c) ** 2, axis=1))

    return f


def _cusp(c, beta):
    def f(x):
        return np.sqrt(np.sum((x - c) ** 2, axis=1)) ** beta

    return f


def _sine(amp):
    def f(x):
        return amp * np.prod(np.sin(np.pi * x), axis=1)

    def grad(x):
        s = np.sin(np.pi * x)
        g = np.empty_like(x)
        for k in range(x.shape[1]):
            others = np.prod(np.delete(s, k, axis=1), axis=1)
            g[:, k] = amp * np.pi * np.cos(np.pi * x[:, k]) * others
        return g

    return f, grad


def _zero(x):
    return np.zeros(len(x))


def _zero_grad(x):
    return np.zeros_like(x)


def _uniform_box(low, high):
    vol = float(np.prod(high - low))

    def density(x):
        x = np.atleast_2d(x)
        inside = np.all((x >= low) & (x <= high), axis=1)
        return np.where(inside, 1.0 / vol, 0.0)

    def sampler(rng, n):
        return low + (high - low) * rng.random((n, len(low)))

    return MarginalDensity("uniform", low, high, 1.0 / vol, 1.0 / vol, 0.0, density, sampler)


def _tent_box(low, high, height):
    """Product of 1-D tents on a pedestal: 1 + height * (1 - |2t - 1|), normalized."""
    d = len(low)
    width = high - low
    norm = 1.0 + 0.5 * height
    p1_min = 1.0 / norm
    p1_max = (1.0 + height) / norm
    scale = 1.0 / float(np.prod(width))

    def p1(t):
        return (1.0 + height * (1.0 - np.abs(2.0 * t - 1.0))) / norm

    def density(x):
        x = np.atleast_2d(x)
        t = (x - low) / width
        inside = np.all((t >= 0) & (t <= 1), axis=1)
        return np.where(inside, scale * np.prod(p1(np.clip(t, 0, 1)), axis=1), 0.0)

    def sampler(rng, n):
        # rejection from the uniform proposal, coordinate-wise
        out = np.empty((n, d))
        for k in range(d):
            filled = 0
            while filled < n:
                m = 2 * (n - filled) + 16
                t = rng.random(m)
                acc = t[rng.random(m) * p1_max < p1(t)][: n - filled]
                out[filled:filled + len(acc), k] = acc
                filled += len(acc)
        return low + width * out

    lip1 = 2.0 * height / norm / float(np.min(width))
    lip = math.sqrt(d) * lip1 * p1_max ** (d - 1) * scale
    return MarginalDensity(
        "tent", low, high, scale * p1_min**d, scale * p1_max**d, lip, density, sampler
    )


_COMMON = {"noise", "sigma", "half_width", "marginal", "tent_height", "low", "high"}
_ALLOWED = {
    "lipschitz-cone": _COMMON | {"c"},
    "holder-cusp": _COMMON | {"c", "beta"},
    "smooth-sine": _COMMON | {"amplitude"},
    "constant-zero": _COMMON | {"beta", "L"},
    "binary-sine": {"amplitude", "marginal", "tent_height", "low", "high"},
}


def _float(params, key, default):
    if key not in params:
        return default
    try:
        return float(params[key])
    except (TypeError, ValueError):
        raise InvalidParams(f"parameter {key!r} must be a number, got {params[key]!r}") from None


def _vector(params, key, default, d):
    if key not in params:
        return np.full(d, float(default))
    raw = params[key]
    try:
        if isinstance(raw, str):
            vals = [float(t) for t in raw.split(",")]
        else:
            vals = [float(t) for t in np.atleast_1d(raw)]
    except (TypeError, ValueError):
        raise InvalidParams(f"parameter {key!r} must be a number or list, got {raw!r}") from None
    if len(vals) == 1:
        vals = vals * d
    if len(vals) != d:
        raise InvalidParams(f"parameter {key!r} needs 1 or {d} values, got {len(vals)}")
    return np.array(vals)


def make_scenario(name: str, d: int = 1, params: Mapping[str, object] | None = None,
                  certify: bool = True) -> Scenario:
    """Build a catalog scenario.

    Catalog: ``lipschitz-cone`` (||x - c||), ``holder-cusp``
    (||x - c||^beta, beta <= 1), ``smooth-sine`` (A prod sin(pi x_k)),
    ``constant-zero`` and ``binary-sine`` (labels in {-1, +1} with mean
    0.8 prod sin(pi x_k)).  The marginal is uniform on [0, 1]^d unless
    ``marginal=tent`` or ``low``/``high`` are given; regression noise is
    Gaussian with ``sigma=0.1`` by default.
    """
    params = dict(params or {})
    if name not in _ALLOWED:
        raise UnknownScenario(f"unknown scenario {name!r}; expected one of {', '.join(SCENARIOS)}")
    d = int(d)
    if d < 1:
        raise InvalidParams(f"dimension must be >= 1, got {d}")
    unknown = sorted(set(params) - _ALLOWED[name])
    if unknown:
        raise InvalidParams(f"unknown parameter(s) for {name}: {', '.join(unknown)}")

    low = _vector(params, "low", 0.0, d)
    high = _vector(params, "high", 1.0, d)
    if not np.all(high > low):
        raise InvalidParams("support box needs high > low in every coordinate")
    marginal_name = str(params.get("marginal", "uniform"))
    if marginal_name == "uniform":
        marginal = _uniform_box(low, high)
    elif marginal_name == "tent":
        height = _float(params, "tent_height", 1.0)
        if not height >= 0:
            raise InvalidParams(f"tent_height must be >= 0, got {height}")
        marginal = _tent_box(low, high, height)
    else:
        raise InvalidParams(f"unknown marginal {marginal_name!r}; expected uniform or tent")

    if name == "lipschitz-cone":
        target = TargetFunction(name, 1.0, 1.0, _cone(_vector(params, "c", 0.5, d)))
    elif name == "holder-cusp":
        beta = _float(params, "beta", 0.5)
        if not (0.0 < beta <= 1.0):
            raise InvalidParams(f"holder-cusp needs beta in (0, 1], got {beta}")
        target = TargetFunction(name, beta, 1.0, _cusp(_vector(params, "c", 0.5, d), beta))
    elif name in ("smooth-sine", "binary-sine"):
        amp = _float(params, "amplitude", 1.0 if name == "smooth-sine" else 0.8)
        if name == "binary-sine" and abs(amp) > 1.0:
            raise InvalidParams(f"binary target must stay within [-1, 1]; amplitude {amp} too large")
        f, grad = _sine(amp)
        target = TargetFunction(name, 2.0, abs(amp) * math.pi**2 * d / 2.0, f, grad)
    else:
        beta = _float(params, "beta", 1.0)
        lip = _float(params, "L", 1.0)
        if not (0.0 < beta <= 2.0):
            raise InvalidParams(f"beta must lie in (0, 2], got {beta}")
        if not lip > 0:
            raise InvalidParams(f"L must be positive, got {lip}")
        target = TargetFunction(name, beta, lip, _zero, _zero_grad)

    if name == "binary-sine":
        noise = NoiseModel(NoiseKind.BINARY)
    else:
        kind = str(params.get("noise", "gaussian"))
        if kind == "gaussian":
            noise = NoiseModel(NoiseKind.GAUSSIAN, _float(params, "sigma", 0.1))
        elif kind == "uniform":
            noise = NoiseModel(NoiseKind.UNIFORM, _float(params, "half_width", 0.1))
        elif kind == "none":
            noise = NoiseModel(NoiseKind.GAUSSIAN, 0.0)
        else:
            raise InvalidParams(f"unknown noise {kind!r}; expected gaussian, uniform or none")
        if not (math.isfinite(noise.scale) and noise.scale >= 0):
            raise InvalidParams(f"noise scale must be finite and >= 0, got {noise.scale}")

    if certify:
        m = max(2, min(101, int(_CERT_POINTS ** (1.0 / d))))
        emp = empirical_holder_constant(target, (low, high), m)
        if emp > target.lipschitz * (1.0 + HOLDER_SLACK):
            raise InvalidParams(
                f"{name}: empirical Hölder constant {emp:.6g} exceeds declared {target.lipschitz:.6g}"
            )
    return Scenario(name, target, marginal, noise, {k: str(v) for k, v in params.items()})


def sample_dataset(scenario: Scenario, n: int, seed: int, replicate: int = 0) -> Dataset:
    """Draw ``n`` i.i.d. pairs; deterministic in (scenario, n, seed, replicate)."""
    if n < 1:
        raise InvalidParams(f"sample size must be >= 1, got {n}")
    rng = stream(seed, "dataset", n, replicate)
    x = scenario.marginal.sample(rng, n)
    y = scenario.noise.sample(rng, scenario.target(x))
    return Dataset(x, y)


def true_regression(scenario: Scenario, x: ArrayLike) -> float:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape != (scenario.dim,) or not scenario.marginal.contains(x):
        raise OutOfSupport(f"point {x.tolist()} is outside the scenario support")
    return float(scenario.target(x[None, :])[0])


def holder_grid(low, high, m: int) -> NDArray[np.float64]:
    axes = [np.linspace(lo, hi, m) for lo, hi in zip(np.atleast_1d(low), np.atleast_1d(high))]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def empirical_holder_constant(target: TargetFunction, support, m: int) -> float:
    """Largest Hölder ratio over all distinct pairs of an m-per-axis grid.

    For beta <= 1 the ratio is |f(x) - f(y)| / ||x - y||^beta; for beta in
    (1, 2] the first-order Taylor remainder at y replaces the increment.
    ``support`` is a ``(low, high)`` pair or a MarginalDensity.
    """
    if m < 2:
        raise InvalidParams(f"grid resolution must be >= 2, got {m}")
    if isinstance(support, MarginalDensity):
        low, high = support.low, support.high
    else:
        low, high = support
    taylor = target.beta > 1.0
    if taylor and target.gradient is None:
        raise MissingGradient(f"{target.name}: beta > 1 needs a gradient")
    g = holder_grid(low, high, m)
    fv = target.evaluate(g)
    gv = target.gradient(g) if taylor else None
    best = 0.0
    block = max(1, (1 << 22) // len(g))
    for s in range(0, len(g), block):
        x = g[s:s + block]
        diff = x[:, None, :] - g[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=2))
        inc = fv[s:s + block, None] - fv[None, :]
        if taylor:
            inc = inc - np.einsum("ijk,jk->ij", diff, gv)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs(inc) / dist**target.beta
        ratio[dist == 0] = 0.0
        best = max(best, float(ratio.max()))
    return best
