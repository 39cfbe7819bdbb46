"""
Radial kernels for Nadaraya-Watson smoothing.

Three singular kernels (unbounded at the origin, which makes the
Nadaraya-Watson ratio interpolate the data) and two classical
non-singular ones used for comparison.  Every kernel is radial in the
Euclidean norm, so it is described by its profile ``K(r)`` with
``r = ||u||``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, special

from interpnw.errors import ExponentTooLarge, InputError

_GAUSS_NORM = 1.0 / math.sqrt(2.0 * math.pi)


class Variant(str, enum.Enum):
    SINGULAR_INDICATOR = "singular-indicator"
    SINGULAR_TRUNCPOLY = "singular-truncpoly"
    SINGULAR_COSSQ = "singular-cossq"
    EPANECHNIKOV = "epanechnikov"
    GAUSSIAN = "gaussian"

    @property
    def singular(self) -> bool:
        return self in _SINGULAR


_SINGULAR = frozenset(
    {Variant.SINGULAR_INDICATOR, Variant.SINGULAR_TRUNCPOLY, Variant.SINGULAR_COSSQ}
)

KERNEL_NAMES = tuple(v.value for v in Variant)


@dataclass(frozen=True)
class KernelSpec:
    """A radial kernel variant; ``a`` is the singularity exponent.

    ``a`` must be given (and positive) for the singular variants and must
    be ``None`` for Epanechnikov and Gaussian.
    """

    variant: Variant
    a: float | None = None

    def __post_init__(self):
        variant = Variant(self.variant)
        object.__setattr__(self, "variant", variant)
        if variant.singular:
            if self.a is None:
                raise InputError(f"kernel {variant.value} requires an exponent a")
            a = float(self.a)
            if not (math.isfinite(a) and a > 0):
                raise InputError(f"exponent a must be positive and finite, got {self.a}")
            object.__setattr__(self, "a", a)
        elif self.a is not None:
            raise InputError(f"kernel {variant.value} takes no exponent")

    @classmethod
    def from_name(cls, name: str, a: float | None = None) -> "KernelSpec":
        try:
            variant = Variant(name)
        except ValueError:
            raise InputError(
                f"unknown kernel {name!r}; expected one of {', '.join(KERNEL_NAMES)}"
            ) from None
        return cls(variant, a if variant.singular else None)

    @property
    def singular(self) -> bool:
        return self.variant.singular

    @property
    def name(self) -> str:
        return self.variant.value

    def __str__(self) -> str:
        if self.a is None:
            return self.name
        return f"{self.name}(a={self.a:g})"


def eval_radial(kernel: KernelSpec, r: ArrayLike) -> NDArray[np.float64] | float:
    """Kernel profile K(r) for r >= 0.

    Accepts a scalar or an array.  Singular kernels return ``inf`` at
    ``r == 0`` (and wherever ``r**-a`` overflows); no input in the domain
    produces NaN.
    """
    scalar = np.ndim(r) == 0
    r = np.asarray(r, dtype=np.float64)
    v = kernel.variant
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if v is Variant.GAUSSIAN:
            out = _GAUSS_NORM * np.exp(-r * r)
        elif v is Variant.EPANECHNIKOV:
            out = np.where(r <= 1.0, 0.75 * (1.0 - r * r), 0.0)
        else:
            inside = r <= 1.0 if v is not Variant.SINGULAR_TRUNCPOLY else r < 1.0
            rr = np.where(inside, r, 1.0)
            sing = np.power(rr, -kernel.a)
            if v is Variant.SINGULAR_INDICATOR:
                shape = 1.0
            elif v is Variant.SINGULAR_TRUNCPOLY:
                shape = (1.0 - rr) ** 2
            else:
                shape = np.cos(0.5 * math.pi * rr) ** 2
            # inf * shape is inf since shape(0) == 1
            out = np.where(inside, sing * shape, 0.0)
    if scalar:
        return float(out)
    return out


def _profile_inside(kernel: KernelSpec, r: NDArray[np.float64]) -> NDArray[np.float64]:
    """K(r) for ``0 < r <= support_radius`` (no support test, no r == 0 guard)."""
    v = kernel.variant
    with np.errstate(over="ignore"):
        if v is Variant.GAUSSIAN:
            return _GAUSS_NORM * np.exp(-r * r)
        if v is Variant.EPANECHNIKOV:
            return 0.75 * (1.0 - r * r)
        w = np.power(r, -kernel.a)
        if v is Variant.SINGULAR_TRUNCPOLY:
            w *= (1.0 - r) ** 2
        elif v is Variant.SINGULAR_COSSQ:
            w *= np.cos(0.5 * math.pi * r) ** 2
        return w


def support_radius(kernel: KernelSpec) -> float:
    """Radius outside which the kernel vanishes (``inf`` for Gaussian)."""
    if kernel.variant is Variant.GAUSSIAN:
        return math.inf
    return 1.0


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d: 2 pi^(d/2) / Gamma(d/2)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def squared_norm_integral(kernel: KernelSpec, d: int) -> float:
    """Integral of K(u)^2 over R^d, or ``inf`` when it diverges."""
    if d < 1:
        raise InputError(f"dimension must be >= 1, got {d}")
    v = kernel.variant
    area = sphere_area(d)
    if v is Variant.GAUSSIAN:
        return (0.5 / math.pi) * (0.5 * math.pi) ** (d / 2.0)
    if v is Variant.EPANECHNIKOV:
        return 0.5625 * area * (1.0 / d - 2.0 / (d + 2) + 1.0 / (d + 4))
    # radial integrand behaves as r^(d-1-2a) near 0
    s = d - 2.0 * kernel.a
    if s <= 0:
        return math.inf
    if v is Variant.SINGULAR_INDICATOR:
        return area / s
    if v is Variant.SINGULAR_TRUNCPOLY:
        # int_0^1 r^(s-1) (1-r)^4 dr = B(s, 5)
        return area * float(special.beta(s, 5.0))
    # algebraic weight r^(s-1) handled exactly by QUADPACK's QAWS rule
    val, _ = integrate.quad(
        lambda r: math.cos(0.5 * math.pi * r) ** 4,
        0.0,
        1.0,
        weight="alg",
        wvar=(s - 1.0, 0.0),
        epsabs=0.0,
        epsrel=1e-13,
    )
    return area * val


def validate_for_dimension(kernel: KernelSpec, d: int) -> None:
    """Raise ExponentTooLarge unless the kernel is square-integrable in R^d.

    Singular kernels need ``0 < a < d/2``; the other variants always pass.
    """
    if d < 1:
        raise InputError(f"dimension must be >= 1, got {d}")
    if kernel.singular and kernel.a >= d / 2.0:
        raise ExponentTooLarge(
            f"{kernel} in dimension {d}: need a < d/2 = {d / 2.0:g} "
            "for a finite variance bound"
        )
