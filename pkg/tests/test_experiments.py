import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from interpnw import KernelSpec
from interpnw.datagen import make_scenario
from interpnw.errors import InputError, InsufficientPoints, NonPositiveValue, OutOfSupport
from interpnw.experiments import (
    Integrated,
    Pointwise,
    RateExperimentConfig,
    bias_variance_probe,
    empty_event_frequency,
    empty_event_probability,
    fit_power_law,
    read_bias_variance_csv,
    read_excess_csv,
    read_rate_csv,
    read_summary,
    run_rate_experiment,
    theoretical_exponent,
    write_bias_variance_csv,
    write_excess_csv,
    write_rate_csv,
    write_summary,
    _ball_box_volume,
)
from oracles import normal_equations

SING = KernelSpec.from_name("singular-indicator", 0.49)
CONE = make_scenario("lipschitz-cone", 1, {"sigma": 0.1})


def test_theoretical_exponent():
    assert theoretical_exponent(1, 1) == pytest.approx(-2 / 3)
    assert theoretical_exponent(2, 1) == pytest.approx(-4 / 5)


def test_power_law_exact():
    ns = [2.0**k for k in range(8, 15)]
    fit = fit_power_law([(n, n ** (-2 / 3)) for n in ns])
    assert abs(fit.slope + 2 / 3) <= 1e-12
    fit = fit_power_law([(10, 0.1), (100, 0.01)])
    assert fit.slope == pytest.approx(-1, abs=1e-14)
    assert fit.intercept == pytest.approx(0, abs=1e-13)
    assert math.isnan(fit.slope_stderr)


@given(st.lists(st.tuples(st.floats(1, 1e6), st.floats(1e-8, 1e3)), min_size=3, max_size=20, unique_by=lambda t: t[0]))
@settings(max_examples=100, deadline=None)
def test_power_law_matches_normal_equations(pairs):
    ns, ys = map(np.array, zip(*pairs))
    if np.ptp(np.log(ns)) < 1e-3:
        return
    slope, icept = normal_equations(ns, ys)
    fit = fit_power_law(pairs)
    assert fit.slope == pytest.approx(slope, rel=1e-10, abs=1e-10)
    assert fit.intercept == pytest.approx(icept, rel=1e-10, abs=1e-10)


def test_power_law_stderr_formula():
    rng = np.random.default_rng(0)
    ns = np.geomspace(100, 10000, 6)
    ys = ns**-0.7 * np.exp(0.05 * rng.standard_normal(6))
    fit = fit_power_law(zip(ns, ys))
    X = np.column_stack([np.ones(6), np.log(ns)])
    beta, res, *_ = np.linalg.lstsq(X, np.log(ys), rcond=None)
    cov = res[0] / 4 * np.linalg.inv(X.T @ X)
    assert fit.slope_stderr == pytest.approx(math.sqrt(cov[1, 1]), rel=1e-9)


def test_power_law_errors():
    with pytest.raises(InsufficientPoints):
        fit_power_law([(10, 1.0)])
    with pytest.raises(NonPositiveValue):
        fit_power_law([(10, 1.0), (20, 0.0)])
    with pytest.raises(NonPositiveValue):
        fit_power_law([(-1, 1.0), (20, 1.0)])


def test_config_validation():
    with pytest.raises(InputError):
        RateExperimentConfig(CONE, SING, (100, 200), 2, Integrated(10))
    with pytest.raises(InputError):
        RateExperimentConfig(CONE, SING, (100, 300, 200), 2, Integrated(10))
    with pytest.raises(OutOfSupport):
        RateExperimentConfig(CONE, SING, (100, 200, 400), 2, Pointwise((1.5,)))
    with pytest.raises(InputError):
        RateExperimentConfig(CONE, SING, (100, 200, 400), 2, Pointwise((0.5,)), report_excess_risk=True)
    with pytest.raises(InputError):
        RateExperimentConfig(CONE, KernelSpec.from_name("singular-indicator", 0.6), (100, 200, 400), 2, Integrated(10))
    RateExperimentConfig(CONE, KernelSpec.from_name("singular-indicator", 0.6), (100, 200, 400), 2,
                         Integrated(10), allow_invalid_kernel=True)


def test_constant_zero_is_degenerate():
    sc = make_scenario("constant-zero", 1, {"noise": "none"})
    res = run_rate_experiment(RateExperimentConfig(sc, SING, (64, 128, 256), 3, Pointwise((0.5,))))
    assert all(r.mean_mse == 0.0 for r in res.rows)
    assert res.degenerate and math.isnan(res.slope)


def test_parallel_matches_serial():
    base = dict(scenario=CONE, kernel=SING, n_grid=(64, 128, 256), replicates=6,
                evaluation=Integrated(50), seed=5, report_excess_risk=True)
    serial = run_rate_experiment(RateExperimentConfig(**base))
    parallel = run_rate_experiment(RateExperimentConfig(**base, workers=4))
    assert serial == parallel


def test_rate_rows_and_files(tmp_path):
    res = run_rate_experiment(RateExperimentConfig(CONE, SING, (64, 128, 256), 4, Integrated(50),
                                                   seed=2, report_excess_risk=True))
    assert res.ns == [64, 128, 256]
    assert all(r.mean_mse > 0 and r.stderr >= 0 for r in res.rows)
    write_rate_csv(res, tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == "n,mean_mse,stderr,empty_freq"
    rows = read_rate_csv(tmp_path / "r.csv")
    assert [r["mean_mse"] for r in rows] == [r.mean_mse for r in res.rows]
    write_excess_csv(res, tmp_path / "e.csv")
    assert [r["excess_risk"] for r in read_excess_csv(tmp_path / "e.csv")] == [r.excess_risk for r in res.rows]
    write_summary(res, tmp_path / "s.txt")
    summary = read_summary(tmp_path / "s.txt")
    assert float(summary["slope"]) == res.slope
    assert float(summary["theoretical_exponent"]) == res.theoretical_exponent
    assert float(summary["slope_stderr"]) == res.slope_stderr


def test_rate_monotone_in_n():
    res = run_rate_experiment(RateExperimentConfig(CONE, SING, (128, 512, 2048), 30, Integrated(200), seed=3))
    for a, b in zip(res.rows, res.rows[1:]):
        assert b.mean_mse <= a.mean_mse + 2 * math.hypot(a.stderr, b.stderr)


def test_probe_zero_noise_has_zero_variance():
    sc = make_scenario("lipschitz-cone", 1, {"noise": "none"})
    rep = bias_variance_probe(sc, SING, 256, [0.5], 20, 20)
    assert rep.variance == 0.0 and rep.bias_sq > 0


def test_probe_constant_zero_has_zero_bias():
    sc = make_scenario("constant-zero", 1)
    rep = bias_variance_probe(sc, SING, 256, [0.3], 20, 20)
    assert rep.bias_sq == 0.0 and rep.variance > 0
    assert rep.empty_contribution == 0.0


def test_probe_estimates_nonnegative_and_files(tmp_path):
    reps = [bias_variance_probe(CONE, SING, n, [0.5], 10, 10, seed=1) for n in (128, 512)]
    for r in reps:
        assert min(r.bias_sq, r.variance, r.sigma_x_sq, r.mse, r.empty_frequency) >= 0
        assert r.bias_bound == pytest.approx(r.h**2)
    write_bias_variance_csv(reps, tmp_path / "bv.csv")
    back = read_bias_variance_csv(tmp_path / "bv.csv")
    assert [row["bias_sq"] for row in back] == [r.bias_sq for r in reps]


def test_probe_smooth_bias_bound_for_smooth_target():
    sc = make_scenario("smooth-sine", 1, {"sigma": 0.1})
    rep = bias_variance_probe(sc, SING, 1024, [0.5], 50, 50, seed=2)
    assert rep.smooth_bias_bound is not None
    assert rep.bias_sq + rep.variance <= rep.smooth_bias_bound * 1.1


def test_decomposition_matches_independent_mse():
    x0 = (0.5,)
    n, reps = 1024, 400
    rep = bias_variance_probe(CONE, SING, n, x0, reps, 50, seed=4)
    direct = run_rate_experiment(RateExperimentConfig(CONE, SING, (n, 2 * n, 4 * n), reps, Pointwise(x0), seed=9))
    row = direct.rows[0]
    se = math.sqrt(row.stderr**2 + rep.bias_sq_stderr**2 + rep.variance_stderr**2)
    assert abs(row.mean_mse - rep.decomposition) <= 3 * se


def test_empty_event_examples():
    sc = make_scenario("lipschitz-cone")
    assert empty_event_probability(sc, 10, 0.1, [0.5]) == pytest.approx(0.8**10, rel=1e-14)
    res = empty_event_frequency(sc, 10, 1.2, 200, [0.5])
    assert res.frequency == 0.0 and res.analytic == 0.0
    res = empty_event_frequency(sc, 5, 1.0, 200, [0.0])
    assert res.frequency == 0.0 and res.analytic == 0.0


def test_empty_event_non_uniform_has_no_analytic_value():
    sc = make_scenario("lipschitz-cone", 1, {"marginal": "tent"})
    res = empty_event_frequency(sc, 10, 0.05, 500, [0.5])
    assert res.analytic is None and 0 < res.frequency < 1


@pytest.mark.parametrize("d", [2, 3])
def test_empty_event_analytic_in_higher_dimensions(d):
    sc = make_scenario("constant-zero", d)
    x0 = [0.1] * d
    res = empty_event_frequency(sc, 8, 0.3, 20_000, x0, seed=1)
    assert abs(res.frequency - res.analytic) <= 4 * math.sqrt(res.analytic * (1 - res.analytic) / res.reps)


def test_ball_box_volume_oracles():
    # quarter disc in the corner of the unit square, half ball at a face of the cube
    assert _ball_box_volume(np.array([0.0, 0.0]), 0.5, np.zeros(2), np.ones(2)) == pytest.approx(math.pi / 16, rel=1e-9)
    half = 0.5 * 4 / 3 * math.pi * 0.3**3
    assert _ball_box_volume(np.array([0.5, 0.5, 0.0]), 0.3, np.zeros(3), np.ones(3)) == pytest.approx(half, rel=1e-8)
    assert _ball_box_volume(np.array([0.5]), 2.0, np.zeros(1), np.ones(1)) == 1.0


def test_ball_box_volume_corner_of_cube():
    octant = 4 / 3 * math.pi * 0.5**3 / 8
    got = _ball_box_volume(np.zeros(3), 0.5, np.zeros(3), np.ones(3))
    assert got == pytest.approx(octant, rel=1e-9)
