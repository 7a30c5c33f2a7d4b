import numpy as np
import pytest
from hypothesis import given, strategies as st

from cclab.errors import CutLocusProximity, DomainError
from cclab.manifold import (ComplexProjective, Euclidean, Product, Sphere, _cinner, _to_complex,
                            dist, exp_map, inner, log_map, parse_manifold)

NAMES = ["S2", "S3", "R2", "CP1", "CP2", "S2xS2", "S2xR1", "S3xS5xR2"]
seeds = st.integers(0, 2**32 - 1)


def test_inner_orthogonal_and_unit():
    S2 = Sphere(2)
    x = np.array([0.0, 0.0, 1.0])
    assert inner(S2, x, [1, 0, 0], [0, 1, 0]) == 0
    assert inner(S2, x, [1, 0, 0], [1, 0, 0]) == 1


def test_inner_rejects_non_tangent():
    with pytest.raises(DomainError):
        inner(Sphere(2), np.array([0.0, 0.0, 1.0]), [0, 0, 1], [1, 0, 0])


def test_product_inner_is_sum_of_factors(rng):
    M = parse_manifold("S2xR1")
    x = M.random_point(rng)
    u, v = M.random_tangent(rng, x, unit=False), M.random_tangent(rng, x, unit=False)
    parts = sum(f.inner(xi, ui, vi) for f, xi, ui, vi in zip(M.factors, M.split(x), M.split(u), M.split(v)))
    assert inner(M, x, u, v) == pytest.approx(parts, abs=1e-15)
    assert inner(M, x, u, v) == pytest.approx(float(u @ v), abs=1e-15)


def test_sphere_exp_log_examples():
    S2 = Sphere(2)
    x = np.array([0.0, 0.0, 1.0])
    np.testing.assert_allclose(exp_map(S2, x, [np.pi / 2, 0, 0]), [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(log_map(S2, x, [1.0, 0, 0]), [np.pi / 2, 0, 0], atol=1e-15)
    np.testing.assert_array_equal(exp_map(S2, x, [0.0, 0, 0]), x)
    np.testing.assert_array_equal(log_map(S2, x, x), 0)


def test_euclidean_exp_is_translation():
    np.testing.assert_array_equal(exp_map(Euclidean(2), [1.0, 2.0], [3.0, 4.0]), [4.0, 6.0])


def test_distance_examples():
    S2 = Sphere(2)
    assert dist(S2, [0, 0, 1.0], [1.0, 0, 0]) == pytest.approx(np.pi / 2, abs=1e-15)
    CP1 = ComplexProjective(1)
    assert dist(CP1, [1.0, 0, 0, 0], [0, 0, 1.0, 0]) == pytest.approx(np.pi / 2, abs=1e-15)
    assert dist(S2, [0, 0, 1.0], [0, 0, 1.0]) == 0


def test_cut_locus_refused():
    S2 = Sphere(2)
    x = np.array([0.0, 0.0, 1.0])
    with pytest.raises(CutLocusProximity):
        exp_map(S2, x, [np.pi - 0.01, 0, 0])
    with pytest.raises(CutLocusProximity):
        log_map(S2, x, -x)
    with pytest.raises(CutLocusProximity):
        ComplexProjective(1).exp([1.0, 0, 0, 0], [0, 0, 1.55, 0])


def test_parse_manifold():
    M = parse_manifold("S3xS5xR2")
    assert isinstance(M, Product)
    assert M.dim == 3 + 5 + 2
    assert [f.name for f in M.factors] == ["S3", "S5", "R2"]
    assert parse_manifold("CP2").dim == 4
    for bad in ["", "Q3", "S", "S2x", "cp1"]:
        with pytest.raises(DomainError):
            parse_manifold(bad)


@pytest.mark.parametrize("name", NAMES)
@given(seed=seeds)
def test_round_trip_and_symmetry(name, seed):
    M = parse_manifold(name)
    rng = np.random.default_rng(seed)
    x = M.random_point(rng)
    parts = []
    for f, xi in zip(M.factors, M.split(x)):
        r = rng.uniform(0, f.injectivity - 0.05) if np.isfinite(f.injectivity) else rng.uniform(0, 5)
        parts.append(r * f.random_tangent(rng, xi))
    v = M.join(parts)
    y = M.exp(x, v)
    w = M.log(x, y)
    aligned = M.move_vector(x, w, x)
    assert np.linalg.norm(M.exp(x, aligned) - y) <= 1e-9
    assert np.linalg.norm(w - v) <= 1e-9 * (1 + np.linalg.norm(v))
    assert M.dist(x, y) == M.dist(y, x)
    assert M.dist(x, y) == pytest.approx(np.linalg.norm(v), abs=1e-10)


@given(seed=seeds, t=st.floats(0, 1))
def test_geodesic_speed(seed, t):
    S = Sphere(3)
    rng = np.random.default_rng(seed)
    x = S.random_point(rng)
    v = rng.uniform(0, np.pi - 0.05) * S.random_tangent(rng, x)
    assert S.dist(x, S.exp(x, t * v)) == pytest.approx(t * np.linalg.norm(v), abs=1e-10)


@given(seed=seeds)
def test_product_distance_pythagoras(seed):
    M = parse_manifold("S2xS2xR1")
    rng = np.random.default_rng(seed)
    x, y = M.random_point(rng), M.random_point(rng)
    d2 = sum(f.dist(a, b) ** 2 for f, a, b in zip(M.factors, M.split(x), M.split(y)))
    assert M.dist(x, y) ** 2 == pytest.approx(d2, abs=1e-12)


@given(seed=seeds)
def test_cp_gauge(seed):
    CP = ComplexProjective(2)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(6)
    z /= np.linalg.norm(z)
    g = CP.gauge(z)
    np.testing.assert_array_equal(CP.gauge(g), g)
    c = _to_complex(g)
    k = int(np.argmax(np.abs(c)))
    assert abs(c[k].imag) <= 1e-15 and c[k].real >= 0
    assert abs(abs(_cinner(_to_complex(z), c)) - 1) <= 1e-12


@given(seed=seeds)
def test_cp_tangent_horizontal(seed):
    CP = ComplexProjective(2)
    rng = np.random.default_rng(seed)
    x = CP.random_point(rng)
    v = CP.random_tangent(rng, x)
    assert abs(v @ x) <= 1e-12
    assert abs(v @ CP.complex_structure(x)) <= 1e-12


def test_sphere_point_invariant():
    with pytest.raises(DomainError):
        Sphere(2).check_point([1.0, 1.0, 0.0])
