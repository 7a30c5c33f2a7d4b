"""Acceptance criteria, each at its stated tolerance and full sample count.

Every test prints one ``PASS``/``FAIL`` line naming the criterion, whether or
not pytest captures output.
"""

import os

import numpy as np
import pytest

from cclab import cli, suites
from cclab.manifold import parse_manifold

THREADS = os.cpu_count() or 1
SEED = 42


@pytest.fixture
def announce(capsys):
    def _announce(label, reports, extra_ok=True):
        failed = [r.summary() for r in reports if not r.passed]
        ok = extra_ok and not failed
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}")
            for r in reports:
                print(f"    {r.summary()}")
        assert ok, "\n".join(failed) or label
    return _announce


def _pick(reports, *names):
    picked = [r for r in reports if r.claim.split(":")[0] in names]
    assert len(picked) >= len(names)
    return picked


@pytest.fixture(scope="module")
def sphere_reports():
    return suites.sphere_suite((48, 24, 24), 200, SEED, (1000, 41), 10_000, with_fd_scan=False,
                               threads=THREADS)[0]


def test_criterion_1_sphere_closed_form_vs_fd(sphere_reports, announce):
    r = _pick(sphere_reports, "closedform_vs_fd")
    assert r[0].n_samples >= 200
    announce("1 sphere closed form vs FD and cross oracle", r)


def test_criterion_2_sphere_positivity(sphere_reports, announce):
    r = _pick(sphere_reports, "a_nonneg", "D_negative", "negHddot_nonneg", "P_positive")
    sizes = {x.claim: x.n_samples for x in r}
    assert sizes["negHddot_nonneg"] == 48 * 24 * 24 * 2
    assert sizes["D_negative"] == 1000 * 41
    assert sizes["a_nonneg"] == 10_000
    announce("2 sphere positivity (a, D, -Hddot, P)", r)


def test_criterion_3_calibration(announce):
    r = suites.calibration_suite(50, SEED)
    announce("3 calibration (4/3 diagonal, Euclidean zero, geodesic zero, h = dist^2)", r)


def test_criterion_4_products(announce):
    r = suites.product_suite(("S2", "S2"), 100, SEED, quick=True, threads=THREADS)
    assert r[0].n_samples == 100
    announce("4 product additivity, A3s failure on S2xS2, NonNegCross on products", r)


def test_criterion_5_log_counterexample(announce):
    r = []
    for dim in (1, 2):
        r += [x for x in suites.counterexample_suite(dim, 7, sweep=0)
              if x.claim.split(":")[0] in ("negative_null_pair", "log_quadratic_fd")]
    assert len(r) == 4
    announce("5 log-cost product counterexample (dims 1, 2) and log quadratic FD", r)


def test_criterion_6_submersion(announce):
    r = suites.submersion_suite(1, 50, SEED, quick=False, threads=THREADS)
    r += suites.submersion_suite(2, 50, SEED, quick=False, threads=THREADS)
    announce("6 Hopf submersions S3->CP1 and S5->CP2", r)


@pytest.mark.parametrize("manifold", ["S2", "S2xS2", "S2xR1", "CP1"])
def test_criterion_7_global_convexity(manifold, announce):
    r = suites.convexity_suite(manifold, 200, SEED, THREADS)
    assert all(x.n_samples > 0 for x in r)
    announce(f"7 time-convexity, DASM and g diagnostics on {manifold} (200 scenarios)", r)


def test_criterion_8_infrastructure(tmp_path, announce):
    rng = np.random.default_rng(SEED)
    defect = 0.0
    for name in ("S2", "S3", "R2", "CP1", "CP2", "S2xS2", "S2xR1", "S3xS5xR2"):
        M = parse_manifold(name)
        reach = min(M.injectivity - 0.05, 5.0)
        for _ in range(100):
            x = M.random_point(rng)
            v = M.random_tangent(rng, x) * rng.uniform(0, reach)
            defect = max(defect, float(np.linalg.norm(M.log(x, M.exp(x, v, 0.0), 0.0) - v)))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    codes = [cli.main(["verify", "sphere", "--quick", "--csv", str(p)]) for p in (a, b)]
    same = a.read_bytes() == b.read_bytes()
    code_all = cli.main(["verify", "all", "--quick"])
    ok = defect <= 1e-9 and same and codes == [0, 0] and code_all == 0
    with_details = f"round trip {defect:.2e}, CSV identical {same}, verify all --quick exit {code_all}"
    announce(f"8 infrastructure: {with_details}", [], ok)
