"""Claim suites: each returns a list of VerificationReport."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import sphere_closed_form as scf
from .constructions import (HopfSubmersion, cpn_curvature_probe, log_cost_quadratic,
                            log_product_counterexample, oneill_compare, random_horizontal_config,
                            random_product_null_sample)
from .cost import LogEuclideanCost, ProductCost, RadialCost, parse_cost
from .crosscurv import SamplerSpec, alternative_a3_concavity, classify, cross_fd, geodesic_pair
from .crosscurv import _random_pair
from .manifold import ComplexProjective, Euclidean, Sphere, _to_complex, _to_real, parse_manifold
from .reports import VerificationReport
from .sliding_mountain import find_dasm_violation, run_convexity_suite


class Clock:
    def __init__(self):
        self.t0 = time.perf_counter()

    @property
    def ms(self):
        return (time.perf_counter() - self.t0) * 1e3


def _stats(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return float("nan"), float("nan")
    return float(np.nanmin(values)), float(np.nanmax(values))


def _report(claim, anchor, passed, values, clock, tol, worst=None, polarity="holds", **details):
    lo, hi = _stats(values)
    return VerificationReport(claim=claim, anchor=anchor, passed=passed, min_value=lo, max_value=hi,
                              worst=worst or {}, n_samples=int(np.size(values)), elapsed_ms=clock.ms,
                              tolerance=tol, polarity=polarity, details=details)


def _pmap(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


# ---------------------------------------------------------------------------
# sphere
# ---------------------------------------------------------------------------

SPHERE_COLUMNS = ["rho", "theta", "psi", "w_perp", "negHddot", "P", "D", "fd", "abs_err"]
NEG_FLOOR = -1e-12


def sphere_grid(shape=(48, 24, 24), w_perps=(0.0, 1.0)):
    """Configurations in lexicographic (rho, theta, psi, w_perp) order."""
    nr, nt, npsi = shape
    rhos = np.linspace(0, np.pi, nr + 2)[1:-1]
    thetas = np.linspace(0, 2 * np.pi, nt, endpoint=False)
    psis = np.linspace(0, 2 * np.pi, npsi, endpoint=False)
    return [scf.SphereConfig(float(r), float(t), float(p), float(w))
            for r in rhos for t in thetas for p in psis for w in w_perps]


def _tan_or_nan(angle):
    c = np.cos(angle)
    return np.tan(angle) if abs(c) > 1e-8 else float("nan")


def _sphere_row(cfg, with_fd):
    v = scf.neg_H_ddot(cfg)
    T, S = _tan_or_nan(cfg.theta), _tan_or_nan(cfg.psi)
    P = float(scf.p_poly(cfg.rho, T, S)) if np.isfinite(T) and np.isfinite(S) else float("nan")
    D = float(scf.discriminant(cfg.rho, T)) if np.isfinite(T) else float("nan")
    fd = scf.neg_H_ddot_fd(cfg) if with_fd else float("nan")
    return {"rho": cfg.rho, "theta": cfg.theta, "psi": cfg.psi, "w_perp": cfg.w_perp,
            "negHddot": float(v), "P": P, "D": D, "fd": float(fd), "abs_err": abs(v - fd)}


def sphere_suite(grid=(48, 24, 24), n_random=200, seed=42, rt_grid=(1000, 41), a_points=10_000,
                 with_fd_scan=True, threads=1):
    """Returns (reports, csv rows of the grid scan)."""
    reports = []

    clk = Clock()
    rho = np.linspace(0, np.pi, a_points)
    a = scf.a_func(rho)
    interior = np.minimum(rho, np.pi - rho) > 1e-8
    ok = bool(np.all(a >= 0) and np.all(a[interior] > 0))
    reports.append(_report("a_nonneg", "lemma on the function a(rho)", ok, a, clk, 0.0,
                           {"min_interior": float(a[interior].min())}))

    clk = Clock()
    nr, nT = rt_grid
    rr = np.linspace(0, np.pi, nr + 2)[1:-1]
    TT = np.linspace(-1e3, 1e3, nT)
    D = np.array([scf.discriminant(r, TT) for r in rr])
    k = np.unravel_index(np.argmax(D), D.shape)
    reports.append(_report("D_negative", "discriminant of the P polynomial", bool(np.all(D < 0)), D, clk,
                           0.0, {"rho": rr[k[0]], "T": TT[k[1]], "D": D[k]}))

    clk = Clock()
    cfgs = sphere_grid(grid)
    rows = _pmap(lambda c: _sphere_row(c, with_fd_scan), cfgs, threads)
    vals = np.array([r["negHddot"] for r in rows])
    i = int(np.argmin(vals))
    reports.append(_report("negHddot_nonneg", "sphere cross-curvature theorem", bool(vals.min() >= NEG_FLOOR),
                           vals, clk, -NEG_FLOOR, rows[i]))

    clk = Clock()
    rng = np.random.default_rng(seed)
    Ps = [r["P"] for r in rows if np.isfinite(r["P"])]
    for _ in range(2000):
        Ps.append(float(scf.p_poly(rng.uniform(1e-3, np.pi - 1e-3), rng.uniform(-1e3, 1e3),
                                   rng.uniform(-1e3, 1e3))))
    Ps = np.array(Ps)
    reports.append(_report("P_positive", "positivity of the P polynomial", bool(np.all(Ps > 0)), Ps, clk, 0.0))

    clk = Clock()
    rcfg = [scf.random_config(rng) for _ in range(n_random)]

    def compare(cfg):
        v = scf.neg_H_ddot(cfg)
        tol = max(1e-4, 1e-3 * abs(v))
        return (abs(v - scf.neg_H_ddot_fd(cfg)) / tol, abs(v - scf.neg_H_ddot_cross(cfg)) / tol)

    ratios = np.array(_pmap(compare, rcfg, threads))
    j = int(np.argmax(ratios.max(axis=1)))
    reports.append(_report("closedform_vs_fd", "closed form against the mixed fourth derivative",
                           bool(ratios.max() <= 1), ratios.max(axis=1), clk, 1.0,
                           {"config": vars(rcfg[j]), "ratio_fd": ratios[j, 0], "ratio_cross": ratios[j, 1]},
                           description="values are error / max(1e-4, 1e-3 |value|)"))

    clk = Clock()
    zero_vals, pos_vals, agree = [], [], True
    for _ in range(100):
        r = float(rng.uniform(0.05, np.pi - 0.05))
        th, ps = rng.choice([np.pi / 2, -np.pi / 2], size=2)
        z = scf.SphereConfig(r, float(th), float(ps), 0.0, rng.uniform(0.5, 2), rng.uniform(0.5, 2))
        zero_vals.append(abs(scf.neg_H_ddot(z)))
        agree &= scf.equality_classifier(z)
        nz = scf.random_config(rng)
        pos_vals.append(scf.neg_H_ddot(nz))
        agree &= not scf.equality_classifier(nz)
    ok = bool(agree and max(zero_vals) <= 1e-10 and min(pos_vals) > 0)
    reports.append(_report("equality_cases", "equality exactly on parallel triples", ok,
                           np.concatenate([zero_vals, pos_vals]), clk, 1e-10,
                           {"max_zero_case": max(zero_vals), "min_generic": min(pos_vals)}))
    return reports, rows


# ---------------------------------------------------------------------------
# cross-curvature calibration and classification
# ---------------------------------------------------------------------------

def calibration_suite(n=50, seed=42):
    rng = np.random.default_rng(seed)
    reports = []

    clk = Clock()
    S2 = Sphere(2)
    c = RadialCost(S2)
    errs = []
    for _ in range(n):
        x = S2.random_point(rng)
        p = S2.random_tangent(rng, x)
        q = S2.random_tangent(rng, x)
        q = q - (q @ p) * p
        q /= np.linalg.norm(q)
        xb = S2.exp(x, 1e-2 * S2.random_tangent(rng, x))
        pb = S2.move_vector(x, q, xb)
        pb /= np.linalg.norm(pb)
        errs.append(abs(cross_fd(c, x, xb, p, pb).cross_value - 4 / 3))
    reports.append(_report("calibration_4_3", "diagonal limit 4/3 times sectional curvature",
                           max(errs) <= 1e-3, errs, clk, 1e-3))

    clk = Clock()
    vals = []
    for l in (1, 2, 3):
        E = Euclidean(l)
        ce = RadialCost(E)
        for _ in range(n // 3 + 1):
            x, xb = E.random_point(rng), E.random_point(rng)
            vals.append(abs(cross_fd(ce, x, xb, rng.standard_normal(l), rng.standard_normal(l)).cross_value))
    reports.append(_report("euclidean_zero", "flat cost has zero cross-curvature", max(vals) <= 1e-7, vals,
                           clk, 1e-7))

    clk = Clock()
    cross_err, h_err = [], []
    spec = SamplerSpec()
    for _ in range(n):
        x = S2.random_point(rng)
        d = rng.uniform(spec.min_dist, spec.max_dist_frac * (np.pi - 0.05))
        xb = S2.exp(x, d * S2.random_tangent(rng, x), 0.0)
        g, gb = geodesic_pair(S2, x, xb)
        s = cross_fd(c, x, xb, g, gb)
        cross_err.append(abs(s.cross_value))
        h_err.append(abs(s.h_value - d**2))
    reports.append(_report("geodesic_zero", "zero cross-curvature along the connecting geodesic",
                           max(cross_err) <= 1e-6, cross_err, clk, 1e-6))
    reports.append(_report("geodesic_h_dist2", "h equals squared distance on geodesic velocities",
                           max(h_err) <= 1e-8, h_err, clk, 1e-8))
    return reports


def classification_report(c, claim, spec, anchor, polarity="holds"):
    r = classify(c, spec, claim)
    worst = r.argmin.as_dict() if r.argmin is not None else {}
    values = [s.cross_value for s in r.samples]
    return VerificationReport(
        claim=f"{claim}:{c.manifold.name}", anchor=anchor, passed=r.passed if polarity == "holds" else not r.passed,
        min_value=r.min_cross, max_value=r.max_cross, worst=worst, n_samples=r.n_samples,
        elapsed_ms=r.elapsed_ms, tolerance=r.tolerance, polarity=polarity,
        details={"null_pairs": r.null_pair_count, "violations": len(r.violations), "floor": r.floor,
                 "min_abs_cross": float(np.min(np.abs(values))) if values else None})


def cross_suite(manifold="S2", cost="half-square", claim="NonNegCross", spec=None):
    c = parse_cost(cost, parse_manifold(manifold))
    spec = spec or SamplerSpec()
    r = classification_report(c, claim, spec, "cross-curvature classification scan")
    r.details.update(manifold=c.manifold.name, cost=cost)
    return calibration_suite(seed=spec.seed) + [r]


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def additivity_report(factors=("S2", "S2"), n=100, seed=42):
    clk = Clock()
    rng = np.random.default_rng(seed)
    fcs = [RadialCost(parse_manifold(f)) for f in factors]
    c = ProductCost(fcs)
    M = c.manifold
    spec = SamplerSpec()
    errs = []
    worst = {}
    for _ in range(n):
        x, xb = _random_pair(c, rng, spec)
        p, pb = M.random_tangent(rng, x), M.random_tangent(rng, xb)
        whole = cross_fd(c, x, xb, p, pb).cross_value
        parts = sum(cross_fd(fc, xi, xbi, pi, pbi).cross_value
                    for fc, xi, xbi, pi, pbi in zip(fcs, M.split(x), M.split(xb), M.split(p), M.split(pb)))
        errs.append(abs(whole - parts))
        if errs[-1] == max(errs):
            worst = {"product": whole, "sum": parts}
    return _report(f"cross_additivity:{M.name}", "cross-curvature of a product is the sum",
                   max(errs) <= 2e-4, errs, clk, 2e-4, worst)


def product_suite(factors=("S2", "S2"), n=100, seed=42, quick=False, threads=1):
    reports = [additivity_report(factors, n, seed)]
    spec = SamplerSpec(n_pairs=6 if quick else 20, n_directions=3 if quick else 5, seed=seed, threads=threads)
    prod = RadialCost(parse_manifold("x".join(factors)))
    r = classification_report(prod, "A3s", spec, "products of spheres are never A3s", polarity="violation")
    r.passed = r.passed and r.details["min_abs_cross"] is not None and r.details["min_abs_cross"] <= 1e-6
    reports.append(r)
    for name in ("S2xS2", "S2xR1", "S3xS5"):
        reports.append(classification_report(RadialCost(parse_manifold(name)), "NonNegCross", spec,
                                             "products of non-negatively cross-curved factors"))
    return reports


# ---------------------------------------------------------------------------
# submersion
# ---------------------------------------------------------------------------

def submersion_suite(m=1, samples=50, seed=42, quick=False, threads=1):
    sub = HopfSubmersion(m)
    rng = np.random.default_rng(seed)
    reports = []

    clk = Clock()
    configs = [random_horizontal_config(sub, rng) for _ in range(samples)]
    recs = _pmap(lambda a: oneill_compare(sub, *a), configs, threads)
    h_dev = [abs(r.h_B - r.h_M) for r in recs]
    slack = [r.slack for r in recs]
    fmin = [r.F_min for r in recs]
    name = f"{sub.total.name}->{sub.base.name}"
    reports.append(_report(f"metric_lift:{name}", "h is preserved by the covector lift",
                           max(h_dev) <= 1e-8, h_dev, clk, 1e-8))
    reports.append(_report(f"oneill_inequality:{name}", "cross-curvature does not decrease under submersion",
                           min(slack) >= -1e-5, slack, clk, 1e-5))
    reports.append(_report(f"F_nonneg:{name}", "lifted minus base cost is non-negative on the stencil grid",
                           min(fmin) >= -1e-10, fmin, clk, 1e-10))

    clk = Clock()
    B = sub.base
    norm_err, exp_err = [], []
    for _ in range(samples):
        b = B.random_point(rng)
        v = B.random_tangent(rng, b) * rng.uniform(0.1, 1.2)
        z = _to_real(np.exp(1j * rng.uniform(0, 2 * np.pi)) * _to_complex(b))
        vt = sub.horizontal_lift_vector(b, v, z)
        norm_err.append(abs(np.linalg.norm(vt) - np.linalg.norm(v)))
        exp_err.append(B.dist(sub.project(sub.total.exp(z, vt, 0.0)), B.exp(b, v, 0.0)))
    reports.append(_report(f"lift_isometry:{name}", "horizontal lift is an isometry",
                           max(norm_err) <= 1e-12, norm_err, clk, 1e-12))
    reports.append(_report(f"exp_lift:{name}", "projection of the lifted geodesic",
                           max(exp_err) <= 1e-9, exp_err, clk, 1e-9))

    clk = Clock()
    probe = cpn_curvature_probe(m, samples=12 if quick else 30, seed=seed)
    est = probe.estimates
    if m == 1:
        ok = bool(np.all(np.abs(est - 4) <= 0.02 * 4))
    else:
        ok = bool(est.min() >= 0.98 and est.max() <= 4.08 and probe.spread >= 2.5)
    reports.append(_report(f"sectional_curvature:{B.name}", "sectional curvature of CP^m lies in [1, 4]", ok,
                           est, clk, 0.02, spread=probe.spread,
                           max_abs_err_vs_exact=float(np.max(np.abs(est - probe.exact)))))
    spec = SamplerSpec(n_pairs=6 if quick else 20, n_directions=3 if quick else 5, seed=seed, threads=threads)
    reports.append(classification_report(RadialCost(ComplexProjective(m)), "A3s", spec,
                                         "quotients of the round sphere satisfy A3s"))
    return reports


# ---------------------------------------------------------------------------
# sliding mountain
# ---------------------------------------------------------------------------

def convexity_suite(manifold="S2", scenarios=200, seed=42, threads=1, which=("dasm", "time_convexity")):
    c = RadialCost(parse_manifold(manifold))
    dasm, conv, g = run_convexity_suite(c, scenarios, seed, threads)
    out = []
    for r in (dasm, conv, g):
        r.claim = f"{r.claim}:{c.manifold.name}"
    if "dasm" in which:
        out.append(dasm)
    if "time_convexity" in which:
        out.append(conv)
    out.append(g)
    return out


# ---------------------------------------------------------------------------
# counterexample
# ---------------------------------------------------------------------------

def counterexample_suite(dim=1, seed=7, sweep=500):
    reports = []
    clk = Clock()
    r = log_product_counterexample(dim, seed)
    s = r.sample
    ok = abs(s.h_value) <= 1e-9 and s.cross_value <= -1e-3 and r.cross_plus < 0 and r.cross_minus < 0
    reports.append(_report(f"negative_null_pair:logxlog{dim}", "log-cost products fail A3w", ok,
                           [s.cross_value], clk, 1e-3, s.as_dict(), polarity="violation",
                           h=s.h_value, cross_plus=r.cross_plus, cross_minus=r.cross_minus, lam=r.lam))

    clk = Clock()
    rng = np.random.default_rng(seed)
    cl = LogEuclideanCost(dim)
    errs = []
    for _ in range(20):
        x = rng.standard_normal(dim)
        p, q0, q = rng.standard_normal(dim), rng.standard_normal(dim), 0.2 * rng.standard_normal(dim)
        q0 *= 1.5 / np.linalg.norm(q0)
        rep = alternative_a3_concavity(cl, x, p, q0, q)
        exact = np.array([log_cost_quadratic(q0 + t * q, p) for t in rep.t])
        errs.append(float(np.max(np.abs(rep.phi - exact))))
    reports.append(_report(f"log_quadratic_fd:R{dim}", "closed form of the log-cost concavity scalar",
                           max(errs) <= 1e-6, errs, clk, 1e-6))

    clk = Clock()
    c = ProductCost([LogEuclideanCost(dim), LogEuclideanCost(dim)])
    v = find_dasm_violation(c, s.x, s.xb, s.p, s.pb)
    ok = v is not None and not v.report.passed
    reports.append(_report(f"dasm_violation:logxlog{dim}", "negative cross-curvature breaks the maximum principle",
                           ok, [v.report.min_value] if v else [], clk, v.report.tolerance if v else 1e-8,
                           v.report.worst if v else {}, polarity="violation"))

    if sweep:
        clk = Clock()
        crosses = []
        for sd in range(sweep):
            crosses.append(random_product_null_sample(c, sd, (0.5, 2.0)).sample.cross_value)
        reports.append(_report(f"log_factor_sweep:logxlog{dim}", "log-cost products fail A3w",
                               max(crosses) < 0, crosses, clk, 0.0, polarity="violation"))
        clk = Clock()
        cs = ProductCost([RadialCost(Sphere(2)), RadialCost(Sphere(2))])
        crosses = [random_product_null_sample(cs, sd).sample.cross_value for sd in range(sweep)]
        reports.append(_report("sphere_factor_sweep:S2xS2", "sphere products satisfy A3w",
                               min(crosses) >= -1e-6, crosses, clk, 1e-6))
    return reports


# ---------------------------------------------------------------------------
# everything
# ---------------------------------------------------------------------------

def all_suite(seed=42, quick=False, threads=1):
    """Every claim; ``quick`` shrinks grids and sample counts."""
    reports = []
    if quick:
        reports += sphere_suite((12, 8, 8), 40, seed, (200, 41), 10_000, False, threads)[0]
    else:
        reports += sphere_suite(seed=seed, threads=threads)[0]
    reports += calibration_suite(20 if quick else 50, seed)
    reports += product_suite(("S2", "S2"), 20 if quick else 100, seed, quick, threads)
    for m in (1, 2):
        reports += submersion_suite(m, 10 if quick else 50, seed, quick, threads)
    for name in ("S2", "S2xS2", "S2xR1", "CP1"):
        reports += convexity_suite(name, 10 if quick else 200, seed, threads)
    for dim in (1, 2):
        reports += counterexample_suite(dim, 7, sweep=20 if quick else 500)
    return reports
