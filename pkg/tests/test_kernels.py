import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from interpnw.errors import ExponentTooLarge
from interpnw.kernels import (
    KERNEL_NAMES,
    KernelSpec,
    Variant,
    eval_radial,
    sphere_area,
    squared_norm_integral,
    support_radius,
    validate_for_dimension,
)

SINGULAR = ["singular-indicator", "singular-truncpoly", "singular-cossq"]


def k(name, a=None):
    return KernelSpec.from_name(name, a)


@pytest.mark.parametrize(
    "name,a,r,expected",
    [
        ("singular-indicator", 0.49, 1.0, 1.0),
        ("singular-indicator", 0.49, 1.5, 0.0),
        ("singular-indicator", 0.5, 0.25, 2.0),
        ("singular-truncpoly", 0.5, 0.25, 1.125),
        ("singular-cossq", 0.5, 0.5, math.sqrt(2) / 2),
        ("epanechnikov", None, 0.0, 0.75),
        ("gaussian", None, 0.0, 1 / math.sqrt(2 * math.pi)),
    ],
)
def test_eval_radial_examples(name, a, r, expected):
    assert eval_radial(k(name, a), r) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("name", SINGULAR)
def test_singular_at_origin_is_positive_infinity(name):
    v = eval_radial(k(name, 0.49), 0.0)
    assert v == math.inf


def test_support_radius():
    assert support_radius(k("singular-indicator", 0.49)) == 1
    assert support_radius(k("epanechnikov")) == 1
    assert support_radius(k("gaussian")) == math.inf


def test_spec_validation():
    with pytest.raises(Exception):
        KernelSpec(Variant.SINGULAR_INDICATOR, None)
    with pytest.raises(Exception):
        KernelSpec(Variant.SINGULAR_INDICATOR, -0.1)
    with pytest.raises(Exception):
        KernelSpec.from_name("triangle", 0.3)
    assert k("epanechnikov", 0.3).a is None
    assert str(k("singular-indicator", 0.49)) == "singular-indicator(a=0.49)"
    assert set(KERNEL_NAMES) == {v.value for v in Variant}


@pytest.mark.parametrize("name", SINGULAR)
@given(r1=st.floats(1e-6, 1 - 1e-6), r2=st.floats(1e-6, 1 - 1e-6), a=st.floats(0.05, 1.4))
@settings(max_examples=60, deadline=None)
def test_singular_strictly_decreasing_inside_support(name, r1, r2, a):
    if r1 == r2:
        return
    lo, hi = sorted((r1, r2))
    v_lo, v_hi = eval_radial(k(name, a), lo), eval_radial(k(name, a), hi)
    assert v_lo >= v_hi
    if hi > lo * (1 + 1e-9):
        assert v_lo > v_hi


@pytest.mark.parametrize("name", ["singular-indicator", "singular-truncpoly", "singular-cossq", "epanechnikov"])
@given(r=st.floats(1.0, 1e6, exclude_min=True))
@settings(max_examples=40, deadline=None)
def test_zero_outside_support(name, r):
    assert eval_radial(k(name, 0.3), r) == 0.0


def test_vectorized_matches_scalar():
    import numpy as np

    rs = np.linspace(0, 1.3, 27)
    for name in KERNEL_NAMES:
        kern = k(name, 0.4)
        arr = eval_radial(kern, rs)
        assert [float(v) for v in arr] == [float(eval_radial(kern, float(r))) for r in rs]


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_squared_norm_examples():
    assert squared_norm_integral(k("singular-indicator", 0.49), 1) == pytest.approx(100.0, rel=1e-12)
    assert squared_norm_integral(k("singular-indicator", 0.5), 1) == math.inf
    assert squared_norm_integral(k("gaussian"), 1) == pytest.approx(1 / (2 * math.sqrt(2 * math.pi)), rel=1e-12)


def _mp_profile(name, a, r):
    if name == "gaussian":
        return mpmath.exp(-r * r) / mpmath.sqrt(2 * mpmath.pi)
    if name == "epanechnikov":
        return mpmath.mpf(3) / 4 * (1 - r * r)
    base = r ** (-a)
    if name == "singular-indicator":
        return base
    if name == "singular-truncpoly":
        return base * (1 - r) ** 2
    return base * mpmath.cos(mpmath.pi * r / 2) ** 2


@pytest.mark.parametrize("d", [1, 2, 3, 5])
@pytest.mark.parametrize("name", KERNEL_NAMES)
def test_squared_norm_matches_quadrature(name, d):
    a = 0.45 * d if name in SINGULAR else None
    mpmath.mp.dps = 30
    if name in SINGULAR:
        # r = t^m with m = 1/(d - 2a) removes the endpoint singularity
        m = 1 / (mpmath.mpf(d) - 2 * mpmath.mpf(a))

        def integrand(t):
            r = t**m
            return _mp_profile(name, mpmath.mpf(a), r) ** 2 * r ** (d - 1) * m * t ** (m - 1)

        radial = mpmath.quad(integrand, [0, 1])
    else:
        upper = mpmath.inf if name == "gaussian" else 1
        radial = mpmath.quad(lambda r: _mp_profile(name, 0, r) ** 2 * r ** (d - 1), [0, upper])
    area = 2 * mpmath.pi ** (mpmath.mpf(d) / 2) / mpmath.gamma(mpmath.mpf(d) / 2)
    assert squared_norm_integral(k(name, a), d) == pytest.approx(float(area * radial), rel=1e-8)


@pytest.mark.parametrize("name", SINGULAR)
@given(a=st.floats(0.01, 3.0), d=st.integers(1, 6))
@settings(max_examples=60, deadline=None)
def test_finite_integral_iff_valid(name, a, d):
    kern = k(name, a)
    finite = math.isfinite(squared_norm_integral(kern, d))
    try:
        validate_for_dimension(kern, d)
        ok = True
    except ExponentTooLarge:
        ok = False
    assert finite == ok == (a < d / 2)


def test_validate_examples():
    validate_for_dimension(k("singular-indicator", 0.49), 1)
    validate_for_dimension(k("epanechnikov"), 3)
    with pytest.raises(ExponentTooLarge):
        validate_for_dimension(k("singular-indicator", 0.6), 1)
