"""Finite-difference cross-curvature, h-null pairs, and curvature-sign scans.

Cross-curvature of a cost at (x, xb) in the direction (p, pb) is

    cross(p, pb) = -2 d^4/ds^2 dt^2 c(x(s), xb(t)) at s = t = 0

where s -> (x(s), xb) is an h-geodesic with x'(0) = p (a c-segment issued from
xb) and xb(t) is any curve with xb'(0) = pb.  The stencil runs in extended
precision so that the fourth derivative is not swamped by round-off.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _stencil
from .cost import (Cost, ProductCost, anchor_covector, h_quadratic,
                   solve_h_velocity)
from .errors import CutLocusProximity, NotNullable
from .manifold import Product

#: Largest stencil step.
MAX_STEP = 0.02
#: Below this the stencil is judged too close to the non-smooth set.
MIN_STEP = 1e-3


@dataclass
class CrossSample:
    x: np.ndarray
    xb: np.ndarray
    p: np.ndarray
    pb: np.ndarray
    h_value: float
    cross_value: float
    fd_step: float
    richardson_levels: int = 1
    residual_estimate: float = 0.0

    def as_dict(self):
        return {
            "x": self.x.tolist(), "xbar": self.xb.tolist(),
            "p": self.p.tolist(), "pbar": self.pb.tolist(),
            "h": self.h_value, "cross": self.cross_value,
            "fd_step": self.fd_step, "residual": self.residual_estimate,
        }


#: Stencil step as a fraction of the room to the non-smooth set.  Both slots
#: move by 2h, so the stencil covers at most 4/5 of the room.
ROOM_FRACTION = 0.2


def _stencil_step(c: Cost, x, xb):
    room = float(np.min(c.room(x, xb)))
    return min(MAX_STEP, ROOM_FRACTION * room)


def cross_fd(c: Cost, x, xb, p, pb, step=None, u=None) -> CrossSample:
    """Cross-curvature by a Richardson-extrapolated mixed fourth derivative.

    The stencil runs on the unit-normalised covector direction u/|u| and on
    pb/|pb|; the quartic homogeneity of cross restores the scale.  A unit
    covector speed keeps the c-exp argument inside its domain, whose radius
    matches the injectivity room.
    """
    M = c.manifold
    x, xb = np.asarray(x, float), np.asarray(xb, float)
    p, pb = np.asarray(p, float), np.asarray(pb, float)
    c.check(x, xb)
    M.check_tangent(x, p, tol=1e-8)
    M.check_tangent(xb, pb, tol=1e-8)
    hval = h_quadratic(c, x, xb, p, pb)
    if not np.any(p) or not np.any(pb):
        return CrossSample(x, xb, p, pb, hval, 0.0, MAX_STEP, 1, 0.0)

    if u is None:
        u = solve_h_velocity(c, x, xb, p)
    nu, npb = float(np.linalg.norm(u)), float(np.linalg.norm(pb))
    scale = (nu * npb) ** 2
    qb = anchor_covector(c, x, xb)
    h = step if step is not None else _stencil_step(c, x, xb)
    ld = np.longdouble
    xbl, qbl = np.asarray(xb, ld), np.asarray(qb, ld)
    ul, pbl = np.asarray(u / nu, ld), np.asarray(pb / npb, ld)
    while True:
        if h < MIN_STEP:
            raise CutLocusProximity(f"stencil step {h:.2e} below {MIN_STEP}: pair too close to the cut locus")
        nodes = np.asarray(_stencil.nodes() * h, ld)
        try:
            xs = c.c_exp(xbl, qbl + nodes[:, None] * ul, 0.0)
            ys = M.exp(xbl, nodes[:, None] * pbl, 0.0)
            grid = c.value(xs[:, None, :], ys[None, :, :], 0.0)
            break
        except CutLocusProximity:
            h *= 0.5
    value, coarse, fine = _stencil.mixed_fourth(grid, h)
    return CrossSample(x, xb, p, pb, hval, -2.0 * scale * value, float(h), 1,
                       2.0 * scale * abs(coarse - fine) / 3.0)


# ---------------------------------------------------------------------------
# null pairs
# ---------------------------------------------------------------------------

def geodesic_pair(manifold, x, xb):
    """Endpoint velocities of the geodesic from x to xb: (log_x xb, -log_xb x)."""
    return manifold.log(x, xb), -manifold.log(xb, x)


def null_pair(c: ProductCost, x, xb, p_plus, pb_plus, minus_pair=None):
    """Balance a non-positive h on the first factor against the rest.

    ``c`` is a two-factor product cost.  The minus-factor pair defaults to the
    connecting geodesic velocities, whose h-value is dist^2 > 0 for the
    half-square cost.  Returns ``(lam, p, pb)`` with the combined vectors on
    the product; ``pb_plus`` is negated first when its h-value is positive.
    """
    if not isinstance(c, ProductCost) or len(c.costs) != 2:
        raise TypeError("null_pair needs a two-factor product cost")
    cp, cm = c.costs
    (xp, xm), (xbp, xbm) = c.manifold.split(x), c.manifold.split(xb)
    p_plus, pb_plus = np.asarray(p_plus, float), np.asarray(pb_plus, float)
    h_plus = h_quadratic(cp, xp, xbp, p_plus, pb_plus)
    if h_plus > 0:
        pb_plus = -pb_plus
        h_plus = -h_plus
    if minus_pair is None:
        minus_pair = geodesic_pair(cm.manifold, xm, xbm)
    pm, pbm = (np.asarray(v, float) for v in minus_pair)
    h_minus = h_quadratic(cm, xm, xbm, pm, pbm)
    if h_minus <= 0:
        raise NotNullable(f"minus-factor h-value {h_minus:.3e} is not positive")
    lam = float(np.sqrt(-h_plus / h_minus))
    p = c.manifold.join([p_plus, lam * pm])
    pb = c.manifold.join([pb_plus, lam * pbm])
    return lam, p, pb


def null_rotate(c: Cost, x, xb, p, pb0, pb1):
    """pb = nu*pb0 - mu*pb1 with mu = h(p, pb0), nu = h(p, pb1), normalised."""
    mu = h_quadratic(c, x, xb, p, pb0)
    nu = h_quadratic(c, x, xb, p, pb1)
    pb = nu * np.asarray(pb0) - mu * np.asarray(pb1)
    n = np.linalg.norm(pb)
    return pb / n if n > 0 else pb


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

CLAIMS = ("NonNegCross", "A3w", "A3s", "AlmostPositive")


@dataclass
class SamplerSpec:
    """Sample counts for a scan.  Distances are drawn inside the safety margin."""

    n_pairs: int = 20
    n_directions: int = 5
    seed: int = 42
    max_dist_frac: float = 0.9
    min_dist: float = 0.05
    threads: int = 1


@dataclass
class ClassificationReport:
    claim: str
    passed: bool
    min_cross: float
    max_cross: float
    argmin: CrossSample | None
    n_samples: int
    null_pair_count: int
    tolerance: float
    violations: list = field(default_factory=list)
    floor: float | None = None
    elapsed_ms: float = 0.0
    samples: list = field(default_factory=list, repr=False)


def _random_pair(c: Cost, rng, spec: SamplerSpec):
    """Random (x, xb) with each curved factor's distance in [min_dist, frac*inj)."""
    M = c.manifold
    x = M.random_point(rng)
    parts = []
    for f, xi in zip(M.factors, M.split(x)):
        v = f.random_tangent(rng, xi)
        if np.isfinite(f.injectivity):
            r = rng.uniform(spec.min_dist, spec.max_dist_frac * (f.injectivity - 0.05))
        else:
            r = rng.uniform(spec.min_dist, 2.0)
        parts.append(f.exp(xi, r * v))
    return x, M.join(parts)


def _directions(c: Cost, rng, x, xb, claim):
    """One (p, pb) pair of the kind the claim quantifies over."""
    M = c.manifold
    p = M.random_tangent(rng, x)
    pb = M.random_tangent(rng, xb)
    if claim in ("A3w", "A3s"):
        pb1 = M.random_tangent(rng, xb)
        pb = null_rotate(c, x, xb, p, pb, pb1)
    return p, pb


def _split_null_pairs(c: Cost, x, xb, rng):
    """Pairs p = (p+, 0), pb = (0, pb-): h-null, nonzero, cross equal to zero."""
    M = c.manifold
    if not isinstance(M, Product):
        return []
    out = []
    xs, xbs = M.split(x), M.split(xb)
    k = len(M.factors)
    for i in range(k):
        j = (i + 1) % k
        pp = [np.zeros_like(a) for a in xs]
        pbp = [np.zeros_like(a) for a in xbs]
        pp[i] = M.factors[i].random_tangent(rng, xs[i])
        pbp[j] = M.factors[j].random_tangent(rng, xbs[j])
        out.append((M.join(pp), M.join(pbp)))
    return out


def _sample_tasks(c: Cost, spec: SamplerSpec, claim: str):
    rng = np.random.default_rng(spec.seed)
    tasks = []
    for _ in range(spec.n_pairs):
        x, xb = _random_pair(c, rng, spec)
        for _ in range(spec.n_directions):
            p, pb = _directions(c, rng, x, xb, claim)
            tasks.append((x, xb, p, pb))
        if claim == "A3s":
            tasks.extend((x, xb, p, pb) for p, pb in _split_null_pairs(c, x, xb, rng))
    return tasks


def _run(c, tasks, threads):
    fn = lambda t: cross_fd(c, *t)
    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(fn, tasks))
    return [fn(t) for t in tasks]


def nonneg_tolerance(max_cross):
    return 1e-6 * (1.0 + abs(max_cross))


#: Strict positivity floor for A3s on unit-norm, h-null directions.
A3S_FLOOR = 1e-3


def _wedge2(M, x, p, q):
    """|p ^ q|^2 = |p|^2 |q|^2 - <p, q>^2."""
    return float(p @ p * (q @ q) - (p @ q) ** 2)


def classify(c: Cost, spec: SamplerSpec | None = None, claim: str = "NonNegCross") -> ClassificationReport:
    """Scan cross-curvature for one of the claims in ``CLAIMS``.

    A3s normalises each value by |p|^2 |pb|^2 and requires it to clear
    ``A3S_FLOOR``; on products the split pairs (p+, 0), (0, pb-) are included,
    and any of them failing the floor is a violation.
    """
    if claim not in CLAIMS:
        raise ValueError(f"unknown claim {claim!r}")
    spec = spec or SamplerSpec()
    t0 = time.perf_counter()
    if claim == "AlmostPositive":
        return _almost_positive(c, spec, t0)
    tasks = _sample_tasks(c, spec, claim)
    samples = _run(c, tasks, spec.threads)
    values = np.array([s.cross_value for s in samples])
    max_cross = float(values.max())
    tol = nonneg_tolerance(max_cross)
    null_count = 0
    if claim in ("A3w", "A3s"):
        null_count = sum(abs(s.h_value) <= 1e-9 * (1 + np.linalg.norm(s.p) * np.linalg.norm(s.pb)) for s in samples)
    if claim == "A3s":
        norms = np.array([np.linalg.norm(s.p) ** 2 * np.linalg.norm(s.pb) ** 2 for s in samples])
        normalised = values / norms
        violations = [s for s, v in zip(samples, normalised) if v < A3S_FLOOR]
        i = int(np.argmin(normalised))
        floor = A3S_FLOOR
    else:
        violations = [s for s in samples if s.cross_value < -tol]
        i = int(np.argmin(values))
        floor = None
    return ClassificationReport(
        claim=claim, passed=not violations, min_cross=float(values.min()), max_cross=max_cross,
        argmin=samples[i], n_samples=len(samples), null_pair_count=int(null_count),
        tolerance=A3S_FLOOR if claim == "A3s" else tol, violations=violations, floor=floor,
        elapsed_ms=1e3 * (time.perf_counter() - t0), samples=samples)


def _almost_positive(c, spec, t0):
    """Quadratic lower bound cross >= c0 * dev^2 near the geodesic directions.

    p and pb are tilted off the geodesic velocities by angle ``dev``; the ratio
    cross/dev^2 must stay bounded below by a positive constant.
    """
    M = c.manifold
    rng = np.random.default_rng(spec.seed)
    samples, ratios = [], []
    for _ in range(spec.n_pairs):
        x, xb = _random_pair(c, rng, spec)
        g, gb = geodesic_pair(M, x, xb)
        g, gb = g / np.linalg.norm(g), gb / np.linalg.norm(gb)
        for dev in np.linspace(0.05, 0.3, spec.n_directions):
            e = M.random_tangent(rng, x)
            e = e - (e @ g) * g
            e /= np.linalg.norm(e)
            eb = M.random_tangent(rng, xb)
            eb = eb - (eb @ gb) * gb
            eb /= np.linalg.norm(eb)
            p = np.cos(dev) * g + np.sin(dev) * e
            pb = np.cos(dev) * gb + np.sin(dev) * eb
            s = cross_fd(c, x, xb, p, pb)
            samples.append(s)
            ratios.append(s.cross_value / dev**2)
    ratios = np.array(ratios)
    values = np.array([s.cross_value for s in samples])
    c0 = float(ratios.min())
    tol = nonneg_tolerance(float(values.max()))
    violations = [s for s, r in zip(samples, ratios) if r <= 0]
    return ClassificationReport(
        claim="AlmostPositive", passed=c0 > 0, min_cross=float(values.min()),
        max_cross=float(values.max()), argmin=samples[int(np.argmin(ratios))],
        n_samples=len(samples), null_pair_count=0, tolerance=tol, violations=violations,
        floor=c0, elapsed_ms=1e3 * (time.perf_counter() - t0), samples=samples)


# ---------------------------------------------------------------------------
# alternative A3 characterisation
# ---------------------------------------------------------------------------

@dataclass
class ConcavityReport:
    t: np.ndarray
    phi: np.ndarray
    second_differences: np.ndarray
    max_second_difference: float


def alternative_a3_concavity(c: Cost, x, p, q0, q, samples=9, span=1.0, step=1e-3):
    """Second derivatives in t of phi(t) = d^2/ds^2 c(exp_x(s p), c_exp(x, q0 + t q)).

    ``phi`` uses a five-point stencil in s (extended precision); the reported
    values are centred second differences of phi over ``t`` in [-span/2, span/2]
    divided by the t-spacing squared.
    """
    M = c.manifold
    ld = np.longdouble
    ts = np.linspace(-span / 2, span / 2, samples)
    xl, pl, q0l, ql = (np.asarray(a, ld) for a in (x, p, q0, q))
    ys = c.c_exp(xl, q0l + np.asarray(ts, ld)[:, None] * ql)
    off = np.asarray(_stencil.OFFSETS5 * step, ld)
    xs = M.exp(xl, off[:, None] * pl, 0.0)
    vals = c.value(xs[None, :, :], ys[:, None, :], 0.0)             # (t, s)
    phi = (vals @ _stencil.D2) / (12 * step**2)
    dt = ts[1] - ts[0]
    d2 = (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / dt**2
    d2 = np.asarray(d2, float)
    return ConcavityReport(ts, np.asarray(phi, float), d2, float(d2.max()))
