"""The sliding-mountain function and the maximum principles it should obey.

For a c-segment ``xb(t)`` issued from ``x``,

    f_t(y) = -c(y, xb(t)) + c(x, xb(t)).

Non-negative cross-curvature makes ``t -> f_t(y)`` convex; the weaker A3w
condition gives the maximum principle ``f_t <= max(f_0, f_1)`` (DASM).
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _stencil
from .cost import Cost, anchor_covector, solve_h_velocity
from .crosscurv import SamplerSpec, _random_pair
from .errors import DomainError
from .manifold import DELTA
from .reports import VerificationReport

T_POINTS = 33
REL_TOL = 1e-8


@dataclass
class SlidingMountainScenario:
    """x, the covector line q(t) = (1 - t) q0 + t q1 at x, and probe points y."""

    cost: Cost
    x: np.ndarray
    q0: np.ndarray
    q1: np.ndarray
    probe_points: np.ndarray
    t_grid: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 1.0, T_POINTS))
    margin: float = DELTA

    def covector(self, t):
        t = np.asarray(t, dtype=float)
        return (1 - t)[..., None] * self.q0 + t[..., None] * self.q1

    def xbar(self, t):
        return self.cost.c_exp(self.x, self.covector(t), 0.0)

    def validate(self):
        """Raise CutLocusProximity unless every (y, xb(t)) on the grid keeps the margin."""
        xbs = self.xbar(self.t_grid)
        c = self.cost
        for xb in xbs:
            c.check(self.x, xb, self.margin)
            for y in self.probe_points:
                c.check(y, xb, self.margin)
        return self


def f_eval(scenario: SlidingMountainScenario, t, y):
    """f_t(y); broadcasts over arrays of t and of points y."""
    c = scenario.cost
    xb = scenario.xbar(np.atleast_1d(t))
    y = np.asarray(y)
    vals = (-c.value(y[..., None, :], xb, scenario.margin)
            + c.value(scenario.x, xb, scenario.margin))
    return vals[..., 0] if np.ndim(t) == 0 else vals


def _f_grid(s: SlidingMountainScenario):
    return np.asarray(f_eval(s, s.t_grid, s.probe_points), dtype=float)   # (probes, t)


def _scale(F):
    return max(1.0, float(np.max(np.abs(F)))) if F.size else 1.0


def _admissible(c: Cost, y, xbs, margin):
    return all(c.room(y, xb) >= margin for xb in xbs)


def random_scenario(c: Cost, rng, n_probes=8, local_frac=0.5, spec=None, max_tries=200):
    """Random c-segment from x and probe points kept outside the margin.

    Half of the probes are drawn near x, where the maximum principle is
    tightest; the rest anywhere on the manifold.
    """
    spec = spec or SamplerSpec()
    M = c.manifold
    x, xb0 = _random_pair(c, rng, spec)
    xb1 = _retarget(c, rng, spec, x)
    q0 = anchor_covector(c, xb0, x)
    q1 = anchor_covector(c, xb1, x)
    s = SlidingMountainScenario(c, x, q0, q1, np.empty((0, M.ambient_dim)))
    xbs = s.xbar(s.t_grid)
    probes = []
    n_local = int(round(local_frac * n_probes))
    tries = 0
    while len(probes) < n_probes and tries < max_tries:
        tries += 1
        if len(probes) < n_local:
            y = M.exp(x, rng.uniform(0.05, 0.5) * M.random_tangent(rng, x), 0.0)
        else:
            y = M.random_point(rng)
        if _admissible(c, y, xbs, s.margin):
            probes.append(y)
    s.probe_points = np.array(probes).reshape(-1, M.ambient_dim)
    return s.validate()


def _retarget(c, rng, spec, x):
    """A second target point at a random admissible distance from x."""
    M = c.manifold
    parts = []
    for f, xi in zip(M.factors, M.split(x)):
        v = f.random_tangent(rng, xi)
        if np.isfinite(f.injectivity):
            r = rng.uniform(spec.min_dist, spec.max_dist_frac * (f.injectivity - DELTA))
        else:
            r = rng.uniform(spec.min_dist, 2.0)
        parts.append(f.exp(xi, r * v))
    return M.join(parts)


def _report(claim, anchor, passed, values, worst, n, t0, tol, **details):
    return VerificationReport(
        claim=claim, anchor=anchor, passed=passed,
        min_value=float(np.min(values)) if len(values) else float("nan"),
        max_value=float(np.max(values)) if len(values) else float("nan"),
        worst=worst, n_samples=n, elapsed_ms=(time.perf_counter() - t0) * 1e3,
        tolerance=tol, details=details)


def check_dasm(scenario: SlidingMountainScenario) -> VerificationReport:
    """min over the grid of max(f_0, f_1)(y) - f_t(y); passes when >= -1e-8 scale."""
    t0 = time.perf_counter()
    F = _f_grid(scenario)
    tol = REL_TOL * _scale(F)
    if F.size == 0:
        return _report("dasm", "maximum principle for the sliding mountain", True, [], {}, 0, t0, tol)
    margin = np.maximum(F[:, :1], F[:, -1:]) - F
    k, j = np.unravel_index(np.argmin(margin), margin.shape)
    worst = {"y": scenario.probe_points[k], "t": scenario.t_grid[j], "margin": margin[k, j]}
    return _report("dasm", "maximum principle for the sliding mountain",
                   margin[k, j] >= -tol, margin.ravel(), worst, F.size, t0, tol)


def check_time_convexity(scenario: SlidingMountainScenario) -> VerificationReport:
    """Chord excess (1-t) f_0 + t f_1 - f_t and second differences in t, both >= -1e-8 scale."""
    t0 = time.perf_counter()
    F = _f_grid(scenario)
    tol = REL_TOL * _scale(F)
    if F.size == 0:
        return _report("time_convexity", "global time-convexity of the sliding mountain",
                       True, [], {}, 0, t0, tol)
    t = scenario.t_grid
    chord = (1 - t) * F[:, :1] + t * F[:, -1:] - F
    second = F[:, :-2] - 2 * F[:, 1:-1] + F[:, 2:]
    worst_chord, worst_second = float(chord.min()), float(second.min())
    k = int(np.argmin(np.minimum(chord.min(axis=1), second.min(axis=1))))
    worst = {"y": scenario.probe_points[k], "chord": worst_chord, "second_difference": worst_second}
    passed = worst_chord >= -tol and worst_second >= -tol
    return _report("time_convexity", "global time-convexity of the sliding mountain", passed,
                   np.concatenate([chord.ravel(), second.ravel()]), worst, F.size, t0, tol,
                   chord_min=worst_chord, second_difference_min=worst_second)


@dataclass
class GDiagnostics:
    g0: float
    g_prime0: float
    g_second0: float
    min_second_difference: float
    values: np.ndarray
    s_step: float
    t_step: float


def g_diagnostics(scenario: SlidingMountainScenario, t0: float, p, s_step=5e-3, t_step=5e-3,
                  n_s=2) -> GDiagnostics:
    """g(s) = d^2/dt^2 f_t(x(s)) at t0 along the h-geodesic x(s) leaving x with velocity p.

    x(s) keeps the second slot frozen at xb(t0):  x(s) = c-exp at xb(t0) of
    qb + s u.  Derivatives in t use the fourth-order stencil in extended
    precision.  The s-grid is ``k * s_step / |p|`` for |k| <= n_s.
    """
    c = scenario.cost
    ld = np.longdouble
    p = np.asarray(p, float)
    np_ = float(np.linalg.norm(p))
    if np_ == 0:
        raise DomainError("p must be non-zero")
    xb0 = scenario.xbar(np.array([t0]))[0]
    u = solve_h_velocity(c, scenario.x, xb0, p)
    qb = anchor_covector(c, scenario.x, xb0)
    hs = s_step / np_
    ks = np.arange(-n_s, n_s + 1)
    steps = (ks * hs)[:, None].astype(ld)
    ys = c.c_exp(np.asarray(xb0, ld), np.asarray(qb, ld) + steps * np.asarray(u, ld), 0.0)
    ts = t0 + _stencil.OFFSETS5 * t_step
    q = np.asarray(scenario.covector(ts), ld)
    xbs = c.c_exp(np.asarray(scenario.x, ld), q, 0.0)
    x = np.asarray(scenario.x, ld)
    F = -c.value(ys[:, None], xbs[None], 0.0) + c.value(x, xbs, 0.0)     # (s, t)
    g = np.asarray(F @ _stencil.D2 / (12 * t_step**2), dtype=np.longdouble)
    mid = n_s
    g_prime = np.tensordot(_stencil.D1, g[mid - 2:mid + 3], axes=(0, 0)) / (12 * hs) if n_s >= 2 else np.nan
    sec = g[:-2] - 2 * g[1:-1] + g[2:]
    g_second = sec[mid - 1] / hs**2
    return GDiagnostics(float(g[mid]), float(g_prime), float(g_second),
                        float(np.min(sec)), np.asarray(g, float), hs, t_step)


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def _reduce(reports, claim, anchor, t0, polarity="holds"):
    """Combine per-scenario reports deterministically: worst margin wins."""
    tol = max((r.tolerance for r in reports), default=0.0)
    mins = [r.min_value for r in reports if np.isfinite(r.min_value)]
    maxs = [r.max_value for r in reports if np.isfinite(r.max_value)]
    keys = [r.min_value if np.isfinite(r.min_value) else np.inf for r in reports]
    worst_i = int(np.argmin(keys)) if reports else 0
    return VerificationReport(
        claim=claim, anchor=anchor, passed=all(r.passed for r in reports),
        min_value=min(mins) if mins else float("nan"), max_value=max(maxs) if maxs else float("nan"),
        worst=reports[worst_i].worst if reports else {}, n_samples=sum(r.n_samples for r in reports),
        elapsed_ms=(time.perf_counter() - t0) * 1e3, tolerance=tol, polarity=polarity,
        details={"scenarios": len(reports), "failed": sum(not r.passed for r in reports)})


def scenario_suite(c: Cost, n_scenarios=200, seed=42, n_probes=8, threads=1):
    """Deterministic scenario list: scenario k uses its own child seed."""
    seeds = np.random.SeedSequence(seed).spawn(n_scenarios)

    def build(ss):
        return random_scenario(c, np.random.default_rng(ss), n_probes=n_probes)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        return list(ex.map(build, seeds))


def run_convexity_suite(c: Cost, n_scenarios=200, seed=42, threads=1, n_probes=8):
    """(dasm report, time-convexity report, g report) over a scenario suite."""
    t0 = time.perf_counter()
    scen = scenario_suite(c, n_scenarios, seed, n_probes, threads)

    def one(s):
        return check_dasm(s), check_time_convexity(s)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        pairs = list(ex.map(one, scen))
    dasm = _reduce([a for a, _ in pairs], "dasm", "maximum principle for the sliding mountain", t0)
    conv = _reduce([b for _, b in pairs], "time_convexity", "global time-convexity of the sliding mountain", t0)
    g = g_suite(c, scen, seed)
    return dasm, conv, g


G0_TOL, G1_TOL = 1e-8, 1e-6


def g_suite(c: Cost, scenarios, seed=42):
    """g(0) and g'(0) vanish on every scenario; g'' at 0 is reported."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    g0, g1, g2 = [], [], []
    for s in scenarios:
        p = c.manifold.random_tangent(rng, s.x)
        d = g_diagnostics(s, 0.5, p)
        g0.append(abs(d.g0))
        g1.append(abs(d.g_prime0))
        g2.append(d.g_second0)
    g0, g1 = np.array(g0), np.array(g1)
    passed = bool(np.all(g0 <= G0_TOL) and np.all(g1 <= G1_TOL))
    both = np.maximum(g0, g1)
    return VerificationReport(
        claim="g_vanishing", anchor="vanishing of g and g' due to geodesy", passed=passed,
        min_value=float(both.min()) if both.size else float("nan"),
        max_value=float(both.max()) if both.size else float("nan"),
        worst={"max_abs_g0": float(g0.max(initial=0)), "max_abs_g_prime0": float(g1.max(initial=0))},
        n_samples=len(scenarios), elapsed_ms=(time.perf_counter() - t0) * 1e3,
        tolerance=G1_TOL,
        details={"g0_tol": G0_TOL, "g_prime_tol": G1_TOL, "min_g_second": float(min(g2)) if g2 else None})


# ---------------------------------------------------------------------------
# maximum principle failure for a negatively cross-curved cost
# ---------------------------------------------------------------------------

@dataclass
class DasmViolation:
    scenario: SlidingMountainScenario
    report: VerificationReport
    excess: float
    s: float


def _window_excess(f):
    """Largest f[j] - max(min f[:j], min f[j+1:]) and the (a, j, b) achieving it."""
    n = len(f)
    pre = np.minimum.accumulate(f)
    suf = np.minimum.accumulate(f[::-1])[::-1]
    best, arg = -np.inf, None
    for j in range(1, n - 1):
        a = int(np.argmin(f[:j]))
        b = j + 1 + int(np.argmin(f[j + 1:]))
        e = f[j] - max(pre[j - 1], suf[j + 1])
        if e > best:
            best, arg = e, (a, j, b)
    return best, arg


def find_dasm_violation(c: Cost, x, xb, p, pb, s_values=(0.05, 0.1, 0.2), span=0.5, n_t=201):
    """Search for y and a c-segment through xb on which f_t(y) beats both endpoints.

    The segment is the covector line at x through -D_x c(x, xb) with velocity pb;
    probes are x(s) on the h-geodesic from x with velocity p.  For a null pair
    of negative cross-curvature t -> f_t(x(s)) is concave for small s, and the
    best concave window is cut out and reparametrized to [0, 1].
    """
    q = anchor_covector(c, xb, x)
    v = solve_h_velocity(c, xb, x, pb)
    u = solve_h_velocity(c, x, xb, p)
    qb = anchor_covector(c, x, xb)
    tau = span * float(np.linalg.norm(q)) / max(float(np.linalg.norm(v)), 1e-300)
    ts = np.linspace(-tau, tau, n_t)
    best = None
    for s_mag in s_values:
        for sgn in (1, -1):
            s = sgn * s_mag / max(float(np.linalg.norm(p)), 1e-300)
            try:
                y = c.c_exp(xb, qb + s * u, 0.0)
                line = SlidingMountainScenario(c, x, q + ts[0] * v, q + ts[-1] * v, y[None],
                                               np.linspace(0, 1, n_t), 0.0)
                f = np.asarray(f_eval(line, line.t_grid, y), float)
            except (DomainError, FloatingPointError):
                continue
            e, arg = _window_excess(f)
            if arg is not None and (best is None or e > best[0]):
                best = (e, arg, s, y)
    if best is None or best[0] <= 0:
        return None
    e, (a, _, b), s, y = best
    q0, q1 = q + ts[a] * v, q + ts[b] * v
    scen = SlidingMountainScenario(c, np.asarray(x, float), q0, q1, y[None], margin=0.0)
    rep = check_dasm(scen)
    return DasmViolation(scen, rep, float(e), float(s))
