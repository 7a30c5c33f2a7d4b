import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cclab.constructions import log_product_counterexample, product_cost
from cclab.cost import LogEuclideanCost, RadialCost, anchor_covector, solve_h_velocity
from cclab.crosscurv import cross_fd
from cclab.errors import CutLocusProximity, DomainError
from cclab.manifold import Euclidean, Sphere, parse_manifold
from cclab.sliding_mountain import (T_POINTS, SlidingMountainScenario, check_dasm, check_time_convexity,
                                    f_eval, find_dasm_violation, g_diagnostics, g_suite,
                                    random_scenario, run_convexity_suite, scenario_suite)

seeds = st.integers(0, 2**32 - 1)
S2 = Sphere(2)
C_S2 = RadialCost(S2)


def _line_scenario(c, x, xb, pb, width=1.0):
    """Covector line at x through the anchor of xb, moving xb with velocity width * pb at t = 1/2."""
    q = anchor_covector(c, xb, x)
    v = solve_h_velocity(c, xb, x, pb)
    empty = np.empty((0, c.manifold.ambient_dim))
    return SlidingMountainScenario(c, np.asarray(x, float), q - 0.5 * width * v, q + 0.5 * width * v, empty,
                                   margin=0.0)


def test_f_vanishes_at_x(rng):
    s = random_scenario(C_S2, rng)
    np.testing.assert_allclose(f_eval(s, s.t_grid, s.x), 0, atol=1e-15)
    assert f_eval(s, 0.3, s.x) == pytest.approx(0, abs=1e-15)


def test_constant_segment_is_independent_of_t(rng):
    s = random_scenario(C_S2, rng)
    flat = SlidingMountainScenario(C_S2, s.x, s.q0, s.q0, s.probe_points)
    F = f_eval(flat, flat.t_grid, flat.probe_points)
    np.testing.assert_allclose(F, np.repeat(F[:, :1], T_POINTS, axis=1), atol=1e-15)


def test_euclidean_f_is_affine(rng):
    E = Euclidean(3)
    c = RadialCost(E)
    x, q0, q1 = rng.standard_normal((3, 3))
    ys = rng.standard_normal((4, 3))
    s = SlidingMountainScenario(c, x, q0, q1, ys)
    xb = s.xbar(s.t_grid)
    expected = (ys - x) @ xb.T - 0.5 * (np.sum(ys**2, 1) - x @ x)[:, None]
    np.testing.assert_allclose(f_eval(s, s.t_grid, ys), expected, atol=1e-12)
    conv = check_time_convexity(s)
    assert conv.passed and abs(conv.details["chord_min"]) <= 1e-12 * max(1, abs(expected).max())
    assert check_dasm(s).passed


def test_validate_rejects_cut_locus_probe():
    x = np.array([0.0, 0.0, 1.0])
    s = SlidingMountainScenario(C_S2, x, np.zeros(3), np.array([0.5, 0, 0]), -x[None])
    with pytest.raises(CutLocusProximity):
        s.validate()


def test_random_scenario_respects_margin(rng):
    s = random_scenario(C_S2, rng, n_probes=6)
    assert s.probe_points.shape == (6, 3)
    for xb in s.xbar(s.t_grid):
        assert all(C_S2.room(y, xb) >= s.margin for y in s.probe_points)


@settings(max_examples=20)
@given(seeds, st.sampled_from(["S2", "S2xS2", "S2xR1", "CP1"]))
def test_time_convexity_implies_dasm(seed, name):
    c = RadialCost(parse_manifold(name))
    s = random_scenario(c, np.random.default_rng(seed))
    conv, dasm = check_time_convexity(s), check_dasm(s)
    assert conv.passed and dasm.passed
    F = f_eval(s, s.t_grid, s.probe_points)
    chord = (1 - s.t_grid) * F[:, :1] + s.t_grid * F[:, -1:]
    assert np.all(np.maximum(F[:, :1], F[:, -1:]) >= chord - 1e-15)


def test_empty_probe_set_passes_trivially():
    s = SlidingMountainScenario(C_S2, np.array([0.0, 0, 1]), np.zeros(3), np.array([0.3, 0, 0]),
                                np.empty((0, 3)))
    assert check_dasm(s).passed and check_dasm(s).n_samples == 0
    assert check_time_convexity(s).passed


def test_scenario_suite_is_deterministic_across_threads():
    a = scenario_suite(C_S2, 6, seed=5, threads=1)
    b = scenario_suite(C_S2, 6, seed=5, threads=4)
    for s, t in zip(a, b):
        np.testing.assert_array_equal(s.probe_points, t.probe_points)
        np.testing.assert_array_equal(s.q1, t.q1)


def test_run_convexity_suite_small():
    dasm, conv, g = run_convexity_suite(C_S2, 8, seed=1, threads=2)
    assert dasm.passed and conv.passed and g.passed
    assert dasm.details["scenarios"] == 8 and g.n_samples == 8


@pytest.mark.parametrize("name", ["S2", "S2xS2", "CP1"])
def test_g_diagnostics_on_nonneg_costs(name, rng):
    c = RadialCost(parse_manifold(name))
    for _ in range(10):
        s = random_scenario(c, rng)
        d = g_diagnostics(s, 0.5, c.manifold.random_tangent(rng, s.x))
        assert abs(d.g0) <= 1e-8 and abs(d.g_prime0) <= 1e-6
        assert d.min_second_difference / d.s_step**2 >= -1e-6


def test_g_identically_zero_for_euclidean(rng):
    c = RadialCost(Euclidean(2))
    s = SlidingMountainScenario(c, rng.standard_normal(2), rng.standard_normal(2), rng.standard_normal(2),
                                np.empty((0, 2)))
    d = g_diagnostics(s, 0.5, rng.standard_normal(2))
    np.testing.assert_allclose(d.values, 0, atol=1e-7)


def test_g_diagnostics_rejects_zero_direction(rng):
    s = random_scenario(C_S2, rng)
    with pytest.raises(DomainError):
        g_diagnostics(s, 0.5, np.zeros(3))


def test_g_second_derivative_is_half_cross_on_sphere(rng):
    x = S2.random_point(rng)
    xb = S2.exp(x, 1.3 * S2.random_tangent(rng, x))
    p, pb = S2.random_tangent(rng, x), S2.random_tangent(rng, xb)
    d = g_diagnostics(_line_scenario(C_S2, x, xb, pb), 0.5, p)
    cross = cross_fd(C_S2, x, xb, p, pb).cross_value
    assert cross >= 0
    assert d.g_second0 == pytest.approx(cross / 2, abs=1e-3 * max(1, cross))


def test_g_second_derivative_is_negative_for_log_counterexample():
    s = log_product_counterexample(1, 7).sample
    c = product_cost(LogEuclideanCost(1), LogEuclideanCost(1))
    width = 0.2
    d = g_diagnostics(_line_scenario(c, s.x, s.xb, s.pb, width), 0.5, s.p)
    assert d.g_second0 < 0
    assert d.g_second0 == pytest.approx(width**2 * s.cross_value / 2, rel=1e-3)


def test_g_suite_report():
    scen = scenario_suite(C_S2, 4, seed=2)
    r = g_suite(C_S2, scen, seed=2)
    assert r.passed and r.max_value <= 1e-6 and r.min_value <= r.max_value


def test_log_product_violates_dasm():
    s = log_product_counterexample(1, 7).sample
    c = product_cost(LogEuclideanCost(1), LogEuclideanCost(1))
    v = find_dasm_violation(c, s.x, s.xb, s.p, s.pb)
    assert v is not None and v.excess > 0
    assert not v.report.passed
    assert v.report.worst["margin"] < -v.report.tolerance


def test_sphere_has_no_dasm_violation(rng):
    x = S2.random_point(rng)
    xb = S2.exp(x, 1.0 * S2.random_tangent(rng, x))
    p, pb = S2.random_tangent(rng, x), S2.random_tangent(rng, xb)
    v = find_dasm_violation(C_S2, x, xb, p, pb)
    assert v is None or v.report.passed
