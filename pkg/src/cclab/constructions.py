"""Product costs, the log-cost counterexample, and the Hopf submersion.

The Hopf map sends a unit vector of C^{m+1} to its complex line.  With CP^m
points stored as gauged representatives, the projection is ``gauge`` and the
horizontal space at a fibre point ``z`` is the complement of ``{z, i z}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _stencil
from .cost import (HALF_SQUARE, Cost, LogEuclideanCost, ProductCost, RadialCost,
                   ambient_cross_matrix, anchor_covector, h_quadratic)
from .crosscurv import CrossSample, cross_fd, null_pair
from .errors import DomainError, SingularCost
from .manifold import ComplexProjective, Sphere, _cinner, _to_complex, _to_real


def product_cost(*costs: Cost) -> ProductCost:
    """c((x1, x2, ...), (xb1, xb2, ...)) = sum_k c_k(x_k, xb_k)."""
    return ProductCost(costs)


def log_cost_quadratic(q, p):
    """2 <q, p>^2 - |p|^2 |q|^2: the log-cost Hessian in direction p at c-exp(q)."""
    q, p = np.asarray(q, float), np.asarray(p, float)
    if not np.any(q):
        raise SingularCost("the log cost quadratic needs q != 0")
    return 2 * (q @ p) ** 2 - (p @ p) * (q @ q)


@dataclass
class CounterexampleResult:
    sample: CrossSample
    lam: float
    cross_plus: float
    cross_minus: float
    h_plus: float
    h_minus: float


def product_null_sample(c: ProductCost, x, xb, pb_plus, pb_minus) -> CounterexampleResult:
    """Cross-curvature at the h-null pair built from E-images on a two-factor product.

    On the plus factor p = -E pb (h < 0) and on the minus factor p = E pb
    (h > 0); lambda scales the minus-factor vectors so that h vanishes.  For
    the log cost both factors then have negative cross-curvature.
    """
    cp, cm = c.costs
    M = c.manifold
    xp, xm = M.split(x)
    xbp, xbm = M.split(xb)
    pbp = np.asarray(pb_plus, float) / np.linalg.norm(pb_plus)
    pbm = np.asarray(pb_minus, float) / np.linalg.norm(pb_minus)
    pp = -ambient_cross_matrix(cp, xp, xbp) @ pbp
    pm = ambient_cross_matrix(cm, xm, xbm) @ pbm
    pp, pm = pp / np.linalg.norm(pp), pm / np.linalg.norm(pm)
    lam, p, pb = null_pair(c, x, xb, pp, pbp, minus_pair=(pm, pbm))
    pp_used, pm_used = M.split(p)
    pbp_used, pbm_used = M.split(pb)
    return CounterexampleResult(
        sample=cross_fd(c, x, xb, p, pb), lam=lam,
        cross_plus=cross_fd(cp, xp, xbp, pp_used, pbp_used).cross_value,
        cross_minus=cross_fd(cm, xm, xbm, pm_used, pbm_used).cross_value,
        h_plus=h_quadratic(cp, xp, xbp, pp_used, pbp_used),
        h_minus=h_quadratic(cm, xm, xbm, pm_used, pbm_used))


def random_product_null_sample(c: ProductCost, seed: int, dist_range=None) -> CounterexampleResult:
    """product_null_sample at a random pair with factor distances in ``dist_range``."""
    rng = np.random.default_rng(seed)
    M = c.manifold
    parts_x, parts_xb, pbs = [], [], []
    for f in M.factors:
        lo, hi = dist_range or ((0.1, 0.9 * (f.injectivity - 0.05)) if np.isfinite(f.injectivity) else (0.5, 2.0))
        xi = f.random_point(rng)
        parts_x.append(xi)
        parts_xb.append(f.exp(xi, rng.uniform(lo, hi) * f.random_tangent(rng, xi)))
    for xbi, f in zip(parts_xb, M.factors):
        pbs.append(f.random_tangent(rng, xbi))
    return product_null_sample(c, M.join(parts_x), M.join(parts_xb), *pbs)


def log_product_counterexample(dim: int = 1, seed: int = 7) -> CounterexampleResult:
    """An h-null pair of negative cross-curvature for the product of two log costs.

    Factor points are kept between 0.5 and 2 apart, away from the singular diagonal.
    """
    if dim < 1:
        raise DomainError("dim must be >= 1")
    c = ProductCost([LogEuclideanCost(dim), LogEuclideanCost(dim)])
    return random_product_null_sample(c, seed, (0.5, 2.0))


# ---------------------------------------------------------------------------
# Hopf submersion S^{2m+1} -> CP^m
# ---------------------------------------------------------------------------

def _phase(ref, z):
    """Unit complex number e^{i phi} with z = e^{i phi} ref on a common fibre."""
    w = _cinner(_to_complex(ref), _to_complex(z))
    mod = abs(w)
    return w / mod if mod > 0 else 1.0 + 0j


class HopfSubmersion:
    """pi: S^{2m+1} -> CP^m."""

    def __init__(self, m: int):
        self.m = m
        self.total = Sphere(2 * m + 1)
        self.base = ComplexProjective(m)
        self.vertical_dim = 1

    def __repr__(self):
        return f"HopfSubmersion({self.total.name} -> {self.base.name})"

    def project(self, z):
        return self.base.gauge(z)

    def vertical(self, z):
        return _to_real(1j * _to_complex(z))

    def _fibre_phase(self, b, z, tol=1e-10):
        ph = _phase(b, z)
        if np.max(np.abs(_to_real(ph * _to_complex(b)) - np.asarray(z))) > tol:
            raise DomainError("point is not in the fibre over b")
        return ph

    def horizontal_lift_vector(self, b, v, z):
        """Horizontal vector at fibre point z projecting to v at b."""
        ph = self._fibre_phase(b, z)
        return _to_real(ph * _to_complex(v))

    def dpi(self, z, w):
        """Push a tangent vector at z down to the gauged base point."""
        b = self.project(z)
        ph = _phase(b, z)
        return self.base.proj(b, _to_real(np.conj(ph) * _to_complex(w)))

    def horizontal_lift_pair(self, x, xb):
        """Lift of (x, xb) along the horizontal lift of the base geodesic from x."""
        B = self.base
        B.check_pair(x, xb)
        v = B.log(x, xb)
        xt = np.asarray(x, float).copy()
        xbt = self.total.exp(xt, v)
        return LiftedPair(np.asarray(x, float), np.asarray(xb, float), xt, xbt, v)


@dataclass
class LiftedPair:
    x: np.ndarray
    xb: np.ndarray
    xt: np.ndarray
    xbt: np.ndarray
    velocity: np.ndarray


def horizontal_lift_vector(sub: HopfSubmersion, b, v, z):
    return sub.horizontal_lift_vector(b, v, z)


def horizontal_lift_pair(sub: HopfSubmersion, x, xb):
    return sub.horizontal_lift_pair(x, xb)


@dataclass
class ONeillRecord:
    cross_B: float
    cross_M: float
    h_B: float
    h_M: float
    w: np.ndarray
    wb: np.ndarray
    F_min: float
    lift_defect: float

    @property
    def slack(self):
        return self.cross_B - self.cross_M


def oneill_compare(sub: HopfSubmersion, x, xb, v, vb, profile=HALF_SQUARE) -> ONeillRecord:
    """Compare cross-curvature of (v, vb) on the base with that of its lift."""
    cB = RadialCost(sub.base, profile)
    cM = RadialCost(sub.total, profile)
    lp = sub.horizontal_lift_pair(x, xb)
    xt, xbt = lp.xt, lp.xbt
    v, vb = np.asarray(v, float), np.asarray(vb, float)

    EB = ambient_cross_matrix(cB, x, xb)
    v_star = EB @ vb            # covector at x
    vb_star = EB.T @ v          # covector at xb
    lift_v_star = sub.horizontal_lift_vector(x, v_star, xt)
    lift_vb_star = sub.horizontal_lift_vector(xb, vb_star, xbt)

    M = sub.total
    EM = cM.cross_matrix(xt, xbt)
    fx, fy = M.frame(xt), M.frame(xbt)
    wb = fy.T @ np.linalg.solve(EM, fx @ lift_v_star)
    w = fx.T @ np.linalg.solve(EM.T, fy @ lift_vb_star)
    lift_defect = max(np.linalg.norm(sub.dpi(xt, w) - v), np.linalg.norm(sub.dpi(xbt, wb) - vb))

    sB = cross_fd(cB, x, xb, v, vb, u=vb_star)
    sM = cross_fd(cM, xt, xbt, w, wb, u=lift_vb_star)
    F_min = _f_grid_min(cB, cM, sub, x, xb, xt, xbt, v_star, vb_star, lift_v_star, lift_vb_star, sB.fd_step)
    return ONeillRecord(sB.cross_value, sM.cross_value, sB.h_value,
                        h_quadratic(cM, xt, xbt, w, wb), w, wb, F_min, float(lift_defect))


def _f_grid_min(cB, cM, sub, x, xb, xt, xbt, v_star, vb_star, lv_star, lvb_star, h):
    """min over the stencil grid of F(s, t) = c_M(lifted surface) - c_B(surface)."""
    ld = np.longdouble
    nodes = np.asarray(_stencil.nodes() * h, ld)[:, None]
    q, qb = -cB.grad_x(x, xb), anchor_covector(cB, x, xb)
    qt, qbt = -cM.grad_x(xt, xbt), anchor_covector(cM, xt, xbt)

    def L(a):
        return np.asarray(a, ld)

    xs = cB.c_exp(L(xb), L(qb) + nodes * L(vb_star), 0.0)
    xbs = cB.c_exp(L(x), L(q) + nodes * L(v_star), 0.0)
    xts = cM.c_exp(L(xbt), L(qbt) + nodes * L(lvb_star), 0.0)
    xbts = cM.c_exp(L(xt), L(qt) + nodes * L(lv_star), 0.0)
    F = cM.value(xts[:, None], xbts[None], 0.0) - cB.value(xs[:, None], xbs[None], 0.0)
    return float(np.min(F))


def random_horizontal_config(sub: HopfSubmersion, rng, max_dist=1.2):
    """Random base pair (x, xb) and unit tangent vectors (v, vb)."""
    B = sub.base
    x = B.random_point(rng)
    e = B.random_tangent(rng, x)
    xb = B.exp(x, rng.uniform(0.1, max_dist) * e)
    return x, xb, B.random_tangent(rng, x), B.random_tangent(rng, xb)


# ---------------------------------------------------------------------------
# CP^m sectional curvature probe
# ---------------------------------------------------------------------------

@dataclass
class CurvatureProbe:
    estimates: np.ndarray
    exact: np.ndarray
    kinds: list

    @property
    def spread(self):
        return float(self.estimates.max() - self.estimates.min())


def cp_sectional_curvature(p, q):
    """Exact K(p, q) = 1 + 3 <i p, q>^2 / |p ^ q|^2 on CP^m."""
    p, q = np.asarray(p, float), np.asarray(q, float)
    ip = _to_real(1j * _to_complex(p))
    wedge = (p @ p) * (q @ q) - (p @ q) ** 2
    return 1 + 3 * (ip @ q) ** 2 / wedge


def cpn_curvature_probe(m: int, samples: int = 20, seed: int = 0, eps: float = 1e-2) -> CurvatureProbe:
    """Sectional curvature estimates cross/((4/3)|p ^ pb|^2) at distance eps.

    Plane kinds cycle through holomorphic (pb = i p), totally real
    (pb orthogonal to p and i p, m >= 2 only) and random.
    """
    B = ComplexProjective(m)
    c = RadialCost(B)
    rng = np.random.default_rng(seed)
    kinds = ["holomorphic", "real", "random"] if m >= 2 else ["holomorphic", "random"]
    est, exact, used = [], [], []
    for k in range(samples):
        kind = kinds[k % len(kinds)]
        x = B.random_point(rng)
        p = B.random_tangent(rng, x)
        ip = B.complex_structure(p)
        if kind == "holomorphic":
            q = ip
        else:
            q = B.random_tangent(rng, x)
            if kind == "real":
                q = q - (q @ p) * p - (q @ ip) * ip
            else:
                q = q - (q @ p) * p
            q /= np.linalg.norm(q)
        xb = B.exp(x, eps * B.random_tangent(rng, x))
        pb = B.move_vector(x, q, xb)
        pb /= np.linalg.norm(pb)
        back = B.move_vector(xb, pb, x)
        wedge = (p @ p) * (back @ back) - (p @ back) ** 2
        s = cross_fd(c, x, xb, p, pb)
        est.append(s.cross_value / (4.0 / 3.0 * wedge))
        exact.append(cp_sectional_curvature(p, back))
        used.append(kind)
    return CurvatureProbe(np.array(est), np.array(exact), used)
