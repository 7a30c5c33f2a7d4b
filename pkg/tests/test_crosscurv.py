import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cclab.cost import LogEuclideanCost, ProductCost, RadialCost, h_quadratic
from cclab.crosscurv import (CrossSample, SamplerSpec, alternative_a3_concavity, classify, cross_fd,
                             geodesic_pair, nonneg_tolerance, null_pair, null_rotate)
from cclab.errors import CutLocusProximity, NotNullable
from cclab.manifold import Euclidean, Sphere, parse_manifold

seeds = st.integers(0, 2**32 - 1)
S2 = Sphere(2)
C_S2 = RadialCost(S2)


def _sphere_pair(rng, lo=0.1, hi=2.8):
    x = S2.random_point(rng)
    return x, S2.exp(x, S2.random_tangent(rng, x) * rng.uniform(lo, hi))


@given(seeds, st.integers(1, 3))
def test_euclidean_cross_is_zero(seed, l):
    rng = np.random.default_rng(seed)
    c = RadialCost(Euclidean(l))
    s = cross_fd(c, *rng.standard_normal((4, l)))
    assert abs(s.cross_value) <= 1e-7


@given(seeds)
def test_geodesic_velocities_have_zero_cross(seed):
    rng = np.random.default_rng(seed)
    x, xb = _sphere_pair(rng)
    g, gb = geodesic_pair(S2, x, xb)
    s = cross_fd(C_S2, x, xb, g, gb)
    assert abs(s.cross_value) <= 1e-6
    assert s.h_value == pytest.approx(S2.dist(x, xb) ** 2, abs=1e-8)


def test_diagonal_limit_is_four_thirds(rng):
    for _ in range(5):
        x = S2.random_point(rng)
        p = S2.random_tangent(rng, x)
        xb = S2.exp(x, 1e-2 * S2.random_tangent(rng, x))
        q = np.cross(x, p)
        pb = S2.move_vector(x, q, xb)
        pb /= np.linalg.norm(pb)
        assert cross_fd(C_S2, x, xb, p, pb).cross_value == pytest.approx(4 / 3, abs=1e-3)


def test_sample_metadata(rng):
    x, xb = _sphere_pair(rng)
    s = cross_fd(C_S2, x, xb, S2.random_tangent(rng, x), S2.random_tangent(rng, xb))
    assert isinstance(s, CrossSample)
    assert 1e-3 <= s.fd_step <= 1e-1
    assert s.residual_estimate >= 0 and np.isfinite(s.cross_value)
    assert s.richardson_levels == 1
    assert set(s.as_dict()) >= {"x", "xbar", "p", "pbar", "h", "cross"}


def test_stencil_refuses_cut_locus():
    x = np.array([0.0, 0.0, 1.0])
    xb = S2.exp(x, [np.pi - 0.01, 0, 0], 0.0)
    with pytest.raises(CutLocusProximity):
        cross_fd(C_S2, x, xb, [1.0, 0, 0], [0, 1.0, 0])


@settings(max_examples=10)
@given(seeds)
def test_cross_is_quadratic_in_each_slot(seed):
    rng = np.random.default_rng(seed)
    x, xb = _sphere_pair(rng, 0.3, 2.5)
    p, pb = S2.random_tangent(rng, x), S2.random_tangent(rng, xb)
    base = cross_fd(C_S2, x, xb, p, pb).cross_value
    for a in (-1, 0.5, 2):
        for b in (-1, 0.5, 2):
            v = cross_fd(C_S2, x, xb, a * p, b * pb).cross_value
            assert v == pytest.approx(a * a * b * b * base, abs=2e-6 * a * a * b * b)


def test_null_pair_examples():
    R = RadialCost(Euclidean(1))
    c = ProductCost([R, R])
    x, xb = np.zeros(2), np.array([0.0, 2.0])
    lam, p, pb = null_pair(c, x, xb, [2.0], [-2.0])
    assert lam == pytest.approx(1.0, abs=1e-15)
    assert h_quadratic(c, x, xb, p, pb) == pytest.approx(0, abs=1e-12)
    lam, _, _ = null_pair(c, x, xb, [2.0], [2.0])
    assert lam == pytest.approx(1.0, abs=1e-15)
    lam, _, _ = null_pair(c, x, xb, [0.0], [1.0])
    assert lam == 0
    with pytest.raises(NotNullable):
        null_pair(c, x, xb, [1.0], [-1.0], minus_pair=([1.0], [-1.0]))


def test_null_pair_needs_two_factor_product():
    with pytest.raises(TypeError):
        null_pair(C_S2, np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(3))


def test_null_pair_on_sphere_product(rng):
    c = ProductCost([C_S2, C_S2])
    M = c.manifold
    x, xb = _sphere_pair(rng), _sphere_pair(rng)
    X, XB = M.join([x[0], xb[0]]), M.join([x[1], xb[1]])
    lam, p, pb = null_pair(c, X, XB, S2.random_tangent(rng, x[0]), S2.random_tangent(rng, x[1]))
    assert lam >= 0
    assert abs(h_quadratic(c, X, XB, p, pb)) <= 1e-9 * (1 + np.linalg.norm(p) * np.linalg.norm(pb))


def test_null_rotate_kills_h(rng):
    x, xb = _sphere_pair(rng)
    p = S2.random_tangent(rng, x)
    pb = null_rotate(C_S2, x, xb, p, S2.random_tangent(rng, xb), S2.random_tangent(rng, xb))
    assert np.linalg.norm(pb) == pytest.approx(1)
    assert abs(h_quadratic(C_S2, x, xb, p, pb)) <= 1e-12


def test_nonneg_tolerance():
    assert nonneg_tolerance(0.0) == pytest.approx(1e-6)
    assert nonneg_tolerance(-3.0) == pytest.approx(4e-6)


SMALL = SamplerSpec(n_pairs=4, n_directions=3, seed=3)


def test_classify_sphere_nonneg():
    r = classify(C_S2, SMALL, "NonNegCross")
    assert r.passed and not r.violations
    assert r.min_cross >= -1e-6
    assert r.n_samples == len(r.samples) > 0
    assert r.min_cross == min(s.cross_value for s in r.samples)


def test_classify_sphere_a3w_uses_null_pairs():
    r = classify(C_S2, SMALL, "A3w")
    assert r.passed and r.null_pair_count == r.n_samples
    assert all(abs(s.h_value) <= 1e-9 * (1 + np.linalg.norm(s.p) * np.linalg.norm(s.pb)) for s in r.samples)


def test_classify_euclidean_is_flat():
    r = classify(RadialCost(Euclidean(2)), SMALL, "NonNegCross")
    assert r.passed and max(abs(r.min_cross), abs(r.max_cross)) <= 1e-7


def test_classify_sphere_product_is_not_a3s():
    r = classify(RadialCost(parse_manifold("S2xS2")), SMALL, "A3s")
    assert not r.passed and r.violations
    assert min(abs(s.cross_value) for s in r.violations) <= 1e-6


def test_classify_sphere_is_a3s_and_almost_positive():
    assert classify(C_S2, SMALL, "A3s").passed
    assert classify(C_S2, SMALL, "AlmostPositive").passed


def test_classify_rejects_unknown_claim():
    with pytest.raises(ValueError):
        classify(C_S2, SMALL, "A4")


def test_classify_is_thread_count_independent():
    a = classify(C_S2, SMALL, "NonNegCross")
    b = classify(C_S2, SamplerSpec(n_pairs=4, n_directions=3, seed=3, threads=4), "NonNegCross")
    assert [s.cross_value for s in a.samples] == [s.cross_value for s in b.samples]


def test_concavity_euclidean_is_flat(rng):
    c = RadialCost(Euclidean(2))
    p, q0, q = rng.standard_normal((3, 2))
    rep = alternative_a3_concavity(c, np.zeros(2), p, q0, q)
    assert np.max(np.abs(rep.second_differences)) <= 1e-6
    np.testing.assert_allclose(rep.phi, p @ p, atol=1e-8)


def test_concavity_on_sphere(rng):
    for _ in range(5):
        x = S2.random_point(rng)
        p = S2.random_tangent(rng, x)
        q0 = S2.random_tangent(rng, x) * 0.8
        q = S2.random_tangent(rng, x) * 0.8
        assert alternative_a3_concavity(C_S2, x, p, q0, q).max_second_difference <= 1e-6


def test_concavity_log_cost_parallel_is_convex():
    c = LogEuclideanCost(2)
    p = np.array([1.0, 0.0])
    rep = alternative_a3_concavity(c, np.zeros(2), p, np.array([1.0, 0.0]), np.array([0.5, 0.0]))
    assert rep.max_second_difference > 0
    np.testing.assert_allclose(rep.second_differences, 2 * 0.25, atol=1e-5)
