"""Transport costs, the induced pseudo-metric h, and cost-exponentials.

A cost ``c(x, xbar)`` lives on ``M x M``.  Every cost shipped here is symmetric
in its two slots, so one ``c_exp`` serves both sides.  Covectors are identified
with tangent vectors through the metric.

The off-diagonal block of h is carried by

    E[i, j] = -d^2 c / dx^i dxbar^j

in the orthonormal frames returned by ``manifold.frame``; with that matrix
``h(p + pbar, p + pbar) = p^T E pbar``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import block_diag

from . import _stencil
from .errors import ConvergenceError, DegeneracyError, DegeneracyWarning, DomainError, SingularCost
from .manifold import DELTA, Euclidean, Manifold, Product, _arr, parse_manifold


# ---------------------------------------------------------------------------
# radial profiles
# ---------------------------------------------------------------------------

def _series_switch(d, cut, series, exact):
    d = np.asarray(d)
    small = np.abs(d) < cut
    safe = np.where(small, cut, d)
    return np.where(small, series(d), exact(safe))


@dataclass(frozen=True)
class RadialProfile:
    """Strictly convex increasing profile f with its derivatives and (f')^-1.

    ``ratio1(d) = f'(d)/d`` and ``ratio2(d) = (f''(d) - f'(d)/d)/d^2`` are the
    coefficients that appear in the mixed Hessian; both must be smooth at 0.
    """

    name: str
    f: Callable
    df: Callable
    d2f: Callable
    df_inv: Callable
    ratio1: Callable
    ratio2: Callable

    def validate(self, diam=np.pi, n=512):
        r = np.linspace(diam / n, diam, n)
        if not (np.all(self.df(r) > 0) and np.all(self.d2f(r) > 0)):
            raise DomainError(f"profile {self.name!r} is not strictly convex and increasing")
        back = self.df_inv(self.df(r))
        if np.max(np.abs(back - r)) > 1e-10 * (1 + diam):
            raise DomainError(f"profile {self.name!r}: df_inv does not invert df")
        return self


HALF_SQUARE = RadialProfile(
    "half-square",
    f=lambda r: 0.5 * np.square(r),
    df=lambda r: np.asarray(r),
    d2f=lambda r: np.ones_like(np.asarray(r, dtype=float)),
    df_inv=lambda y: np.asarray(y),
    ratio1=lambda r: np.ones_like(np.asarray(r, dtype=float)),
    ratio2=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
)

COSH = RadialProfile(
    "cosh",
    f=lambda r: np.cosh(r) - 1,
    df=np.sinh,
    d2f=np.cosh,
    df_inv=np.arcsinh,
    ratio1=lambda r: _series_switch(r, 1e-3, lambda d: 1 + d * d / 6 + d**4 / 120,
                                    lambda d: np.sinh(d) / d),
    ratio2=lambda r: _series_switch(r, 1e-2, lambda d: 1 / 3 + d * d / 30 + d**4 / 840,
                                    lambda d: (np.cosh(d) - np.sinh(d) / d) / (d * d)),
)


def _quartic_inv(y):
    # Real root of r^3/3 + r - y = 0 in trigonometric-hyperbolic form.
    return 2.0 * np.sinh(np.arcsinh(1.5 * np.asarray(y)) / 3.0)


QUARTIC = RadialProfile(
    "quartic",
    f=lambda r: 0.5 * np.square(r) + np.asarray(r) ** 4 / 12,
    df=lambda r: np.asarray(r) + np.asarray(r) ** 3 / 3,
    d2f=lambda r: 1 + np.square(r),
    df_inv=_quartic_inv,
    ratio1=lambda r: 1 + np.square(r) / 3,
    ratio2=lambda r: np.full_like(np.asarray(r, dtype=float), 2.0 / 3.0),
)

PROFILES = {p.name: p for p in (HALF_SQUARE, COSH, QUARTIC)}


def register_profile(profile: RadialProfile):
    """Make a profile available to ``parse_cost`` as ``radial:<name>``."""
    PROFILES[profile.name] = profile.validate()
    return profile


# ---------------------------------------------------------------------------
# costs
# ---------------------------------------------------------------------------

class Cost:
    """Base class.  ``source`` and ``target`` are the same manifold here."""

    manifold: Manifold
    name: str

    @property
    def source(self):
        return self.manifold

    @property
    def target(self):
        return self.manifold

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r} on {self.manifold.name})"

    # distance (in the cost's own sense) to the non-smooth set
    def room(self, x, xb):
        raise NotImplementedError

    def check(self, x, xb, margin=DELTA):
        raise NotImplementedError

    def value(self, x, xb, margin=DELTA):
        raise NotImplementedError

    def grad_x(self, x, xb, margin=DELTA):
        """D_x c as a tangent vector at x."""
        raise NotImplementedError

    def c_exp(self, x, p, margin=DELTA):
        """The point xb with -D_x c(x, xb) = p."""
        raise NotImplementedError

    def cross_matrix(self, x, xb):
        """Closed-form E in frames, or None when unavailable."""
        return None

    @property
    def is_flat(self):
        return False


class RadialCost(Cost):
    """c(x, xb) = f(dist(x, xb))."""

    def __init__(self, manifold: Manifold, profile: RadialProfile = HALF_SQUARE):
        self.manifold = manifold
        self.profile = profile
        self.name = profile.name if profile is HALF_SQUARE else f"radial:{profile.name}"
        if np.isfinite(manifold.injectivity):
            profile.validate(diam=manifold.injectivity)

    @property
    def is_flat(self):
        return self.profile is HALF_SQUARE and all(isinstance(f, Euclidean) for f in self.manifold.factors)

    def room(self, x, xb):
        return self.manifold.room(x, xb)

    def check(self, x, xb, margin=DELTA):
        self.manifold.check_pair(x, xb, margin)

    def value(self, x, xb, margin=DELTA):
        self.check(x, xb, margin)
        return self.profile.f(self.manifold.dist(x, xb))

    def grad_x(self, x, xb, margin=DELTA):
        self.check(x, xb, margin)
        d = self.manifold.dist(x, xb)
        return -self.profile.ratio1(d)[..., None] * self.manifold.log(x, xb, margin)

    def c_exp(self, x, p, margin=DELTA):
        p = _arr(p)
        n = np.sqrt(np.sum(p * p, axis=-1))
        r = self.profile.df_inv(n)
        scale = np.where(n > 0, r / np.where(n > 0, n, 1), 1)
        return self.manifold.exp(x, scale[..., None] * p, margin)

    def cross_matrix(self, x, xb):
        M = self.manifold
        e = M.half_square_cross_matrix(x, xb)
        if self.profile is HALF_SQUARE:
            return e
        d = float(M.dist(x, xb))
        lx = M.frame(x) @ M.log(x, xb, 0.0)
        ly = M.frame(xb) @ M.log(xb, x, 0.0)
        return float(self.profile.ratio1(d)) * e - float(self.profile.ratio2(d)) * np.outer(lx, ly)


class LogEuclideanCost(Cost):
    """c(x, xb) = -log|x - xb| on R^l, singular on the diagonal."""

    def __init__(self, l: int):
        self.manifold = Euclidean(l)
        self.name = "log"

    def room(self, x, xb):
        return np.sqrt(np.sum(np.square(_arr(x) - _arr(xb)), axis=-1))

    def check(self, x, xb, margin=0.0):
        if np.any(self.room(x, xb) <= max(margin, 0.0)) or np.any(self.room(x, xb) == 0):
            raise SingularCost("log cost is singular at coincident points")

    def value(self, x, xb, margin=0.0):
        self.check(x, xb, 0.0)
        return -np.log(self.room(x, xb))

    def grad_x(self, x, xb, margin=0.0):
        self.check(x, xb, 0.0)
        z = _arr(x) - _arr(xb)
        return -z / np.sum(z * z, axis=-1)[..., None]

    def c_exp(self, x, p, margin=0.0):
        p = _arr(p)
        n2 = np.sum(p * p, axis=-1)
        if np.any(n2 == 0):
            raise SingularCost("the zero covector is not in the log-cost c-exp domain")
        return _arr(x) - p / n2[..., None]

    def cross_matrix(self, x, xb):
        z = _arr(x) - _arr(xb)
        n2 = float(z @ z)
        return (2 * np.outer(z, z) - n2 * np.eye(z.size)) / n2**2


class ProductCost(Cost):
    """Additive cost c = sum_k c_k on the product of the factor manifolds."""

    def __init__(self, costs):
        costs = list(costs)
        if len(costs) < 2:
            raise DomainError("a product cost needs at least two factors")
        self.costs = costs
        self.manifold = Product([c.manifold for c in costs])
        if len(self.manifold.factors) != len(costs):
            raise DomainError("product cost factors must themselves be single-factor costs")
        self.name = "+".join(c.name for c in costs)

    @property
    def is_flat(self):
        return all(c.is_flat for c in self.costs)

    def _map(self, fn, *arrays):
        cols = [self.manifold.split(a) for a in arrays]
        return [fn(c, *(col[i] for col in cols)) for i, c in enumerate(self.costs)]

    def room(self, x, xb):
        return np.minimum.reduce(self._map(lambda c, a, b: c.room(a, b), x, xb))

    def check(self, x, xb, margin=DELTA):
        self._map(lambda c, a, b: c.check(a, b, margin), x, xb)

    def value(self, x, xb, margin=DELTA):
        return sum(self._map(lambda c, a, b: c.value(a, b, margin), x, xb))

    def factor_values(self, x, xb, margin=DELTA):
        return self._map(lambda c, a, b: c.value(a, b, margin), x, xb)

    def grad_x(self, x, xb, margin=DELTA):
        return self.manifold.join(self._map(lambda c, a, b: c.grad_x(a, b, margin), x, xb))

    def c_exp(self, x, p, margin=DELTA):
        return self.manifold.join(self._map(lambda c, a, b: c.c_exp(a, b, margin), x, p))

    def cross_matrix(self, x, xb):
        blocks = self._map(lambda c, a, b: c.cross_matrix(a, b), x, xb)
        if any(b is None for b in blocks):
            return None
        return block_diag(*blocks)


def parse_cost(spec: str, manifold) -> Cost:
    """Cost from a CLI string: ``half-square``, ``log`` or ``radial:<name>``."""
    if isinstance(manifold, str):
        manifold = parse_manifold(manifold)
    spec = spec.strip()
    if spec == "half-square":
        return RadialCost(manifold)
    if spec == "log":
        factors = manifold.factors
        if not all(isinstance(f, Euclidean) for f in factors):
            raise DomainError("the log cost needs Euclidean factors")
        logs = [LogEuclideanCost(f.l) for f in factors]
        return logs[0] if len(logs) == 1 else ProductCost(logs)
    if spec.startswith("radial:"):
        name = spec.split(":", 1)[1]
        if name not in PROFILES:
            raise DomainError(f"unknown radial profile {name!r}")
        return RadialCost(manifold, PROFILES[name])
    raise DomainError(f"unknown cost {spec!r}")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def cost_eval(c: Cost, x, xb):
    return c.value(x, xb)


def grad_x_cost(c: Cost, x, xb):
    """D_x c(x, xb); its negative is the covector sent to xb by c-exp at x."""
    return c.grad_x(x, xb)


def grad_xbar_cost(c: Cost, x, xb):
    """D_xbar c(x, xb) as a tangent vector at xb."""
    return c.grad_x(xb, x)


def c_exp(c: Cost, x, p):
    return c.c_exp(x, p)


def c_segment(c: Cost, x, p0, p1, t):
    """c-exp at x of the affine covector path (1 - t) p0 + t p1."""
    p0, p1 = _arr(p0), _arr(p1)
    t = np.asarray(t, dtype=float)
    path = (1 - t)[..., None] * p0 + t[..., None] * p1
    return c.c_exp(x, path)


FD_MIXED_STEP = 1e-3


def cross_matrix_fd(c: Cost, x, xb, h=FD_MIXED_STEP):
    """E by a fourth-order mixed stencil along geodesics through x and xb.

    Mixed second derivatives see only first-order data of the two curves, so
    geodesics along frame vectors give E exactly up to truncation.
    """
    M = c.manifold
    fx, fy = M.frame(x), M.frame(xb)
    off = _stencil.OFFSETS5 * h
    xl, xbl = np.asarray(x, np.longdouble), np.asarray(xb, np.longdouble)
    xs = M.exp(xl, off[None, :, None] * fx[:, None, :].astype(np.longdouble), 0.0)   # (n, 5, amb)
    ys = M.exp(xbl, off[None, :, None] * fy[:, None, :].astype(np.longdouble), 0.0)
    vals = c.value(xs[:, None, :, None, :], ys[None, :, None, :, :], 0.0)          # (n, n, 5, 5)
    grid = np.moveaxis(vals, (2, 3), (0, 1))
    return -np.asarray(_stencil.mixed_second(grid, h), dtype=float)


def cross_difference_matrix(c: Cost, x, xb, method="auto"):
    """E[i, j] = -d^2 c / dx^i dxbar^j in the frames at x and xb.

    ``method`` is ``"closed"``, ``"fd"`` or ``"auto"`` (closed form when the cost
    has one).  Emits ``DegeneracyWarning`` when E is numerically singular.
    """
    c.check(x, xb)
    e = None
    if method in ("auto", "closed"):
        e = c.cross_matrix(x, xb)
        if e is None and method == "closed":
            raise DomainError(f"{c!r} has no closed-form cross matrix")
    if e is None:
        e = cross_matrix_fd(c, x, xb)
    scale = max(1.0, float(np.max(np.abs(e)))) ** e.shape[0]
    if abs(np.linalg.det(e)) < 1e-10 * scale:
        warnings.warn("mixed Hessian of the cost is nearly singular", DegeneracyWarning, stacklevel=2)
    return e


def ambient_cross_matrix(c: Cost, x, xb, method="auto"):
    """E expressed on ambient vectors: p @ Ea @ pb == h(p + pb)."""
    M = c.manifold
    return M.frame(x).T @ cross_difference_matrix(c, x, xb, method) @ M.frame(xb)


def h_quadratic(c: Cost, x, xb, p, pb, method="auto"):
    """h(p + pb, p + pb) = p^T E pb."""
    return float(_arr(p) @ ambient_cross_matrix(c, x, xb, method) @ _arr(pb))


def anchor_covector(c: Cost, x, xb):
    """qb = -D_xbar c(x, xb), so that c-exp at xb of qb is x."""
    return -c.grad_x(xb, x)


_VEL_STEP = 1e-3


def c_exp_velocity(c: Cost, xb, qb, u, x=None):
    """d/ds c_exp(xb, qb + s u) at s = 0, as a tangent vector at ``x``.

    ``x`` defaults to c_exp(xb, qb).  Points are re-phased to ``x`` before
    differencing, which matters only on CP^m.
    """
    M = c.manifold
    u = _arr(u)
    nu = float(np.linalg.norm(u))
    if nu == 0:
        return np.zeros(M.ambient_dim)
    if x is None:
        x = c.c_exp(xb, qb)
    h = _VEL_STEP / nu
    xbl = np.asarray(xb, np.longdouble)
    qbl = np.asarray(qb, np.longdouble)
    ul = np.asarray(u, np.longdouble)
    off = np.asarray(_stencil.OFFSETS5 * h, np.longdouble)
    pts = c.c_exp(xbl, qbl + off[:, None] * ul, 0.0)
    pts = M.align(pts, np.asarray(x, np.longdouble))
    vel = np.tensordot(_stencil.D1, pts, axes=(0, 0)) / (12 * h)
    return M.proj(x, np.asarray(vel, dtype=float))


def solve_h_velocity(c: Cost, x, xb, p, tol=1e-10, max_iter=50):
    """Covector u at xb such that s -> c_exp(xb, qb + s u) leaves x with velocity p.

    The c-exp differential is assembled column by column from finite
    differences, solved, then refined by damped Newton steps on the velocity
    defect.
    """
    M = c.manifold
    p = _arr(p)
    np_ = float(np.linalg.norm(p))
    if np_ == 0:
        return np.zeros(M.ambient_dim)
    qb = anchor_covector(c, x, xb)
    fx, fy = M.frame(x), M.frame(xb)
    jac = np.column_stack([fx @ c_exp_velocity(c, xb, qb, e, x) for e in fy])
    if np.linalg.cond(jac) > 1e10:
        raise DegeneracyError("c-exp differential is singular")
    target = fx @ p

    def defect(coef):
        return fx @ c_exp_velocity(c, xb, qb, fy.T @ coef, x) - target

    coef = np.linalg.solve(jac, target)
    r = defect(coef)
    err = np.linalg.norm(r)
    for _ in range(max_iter):
        if err <= tol * (1 + np_):
            return fy.T @ coef
        step = np.linalg.solve(jac, r)
        lam = 1.0
        while lam > 1e-6:
            trial = coef - lam * step
            rt = defect(trial)
            et = np.linalg.norm(rt)
            if et < err:
                coef, r, err = trial, rt, et
                break
            lam *= 0.5
        else:
            # Newton cannot reduce the defect further: finite-difference floor.
            if err <= 1e-8 * np_:
                return fy.T @ coef
            raise ConvergenceError(f"velocity defect stalled at {err:.2e}")
    if err <= 1e-8 * np_:
        return fy.T @ coef
    raise ConvergenceError(f"velocity defect {err:.2e} after {max_iter} iterations")


def velocity_defect(c: Cost, x, xb, p, u):
    qb = anchor_covector(c, x, xb)
    return float(np.linalg.norm(c_exp_velocity(c, xb, qb, u, x) - _arr(p)))
