"""Closed-form fourth derivative of the half-square cost on the round sphere.

Configuration: ``x`` on S^n, ``xb(t) = exp_x(r + t q)`` with ``|r| = rho``,
and a direction ``w`` at ``x`` split as ``w = w1 + w_perp`` where ``w1`` lies
in the plane of ``r_hat`` and ``q``.  In that plane we use coordinates with
``r_hat = (0, 1)``, ``q = |q| (cos theta, sin theta)`` and
``w1 = |w1| (cos psi, sin psi)``.

``H(t)`` is the Hessian of dist(., xb(t))^2 / 2 at ``x`` applied to ``(w, w)``,
and ``neg_H_ddot`` is ``-d^2 H / dt^2`` at ``t = 0``.  Twice that value is the
cross-curvature of the pair ``(w, d(exp_x)_r q)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _stencil
from .errors import DomainError

_SERIES_CUT = 0.1

_A = (0, 2 / 3, -1 / 15, 1 / 420, -1 / 22680, 1 / 1995840, -1 / 259459200)
_B = (0, 2 / 3, -1 / 45, 13 / 3780, 1 / 5400, 647 / 29937600, 176639 / 81729648000)
_G = (0, 1 / 3, 1 / 45, 2 / 945, 1 / 4725, 2 / 93555, 1382 / 638512875)
_BA = (0, 0, 2 / 45, 1 / 945, 13 / 56700, 79 / 3742200, 88477 / 40864824000, 17917 / 81729648000)
_a = (0, 0, 0, 1 / 90, -1 / 504, 1 / 8400, -241 / 59875200, 1003 / 10897286400)


def _even_series(coefs, r):
    """sum_k coefs[k] * r^(2k)."""
    r2 = np.square(r)
    out = np.zeros_like(r2)
    for c in reversed(coefs):
        out = out * r2 + c
    return out


def _switch(rho, series, exact):
    rho = np.asarray(rho, dtype=float)
    small = rho < _SERIES_CUT
    safe = np.where(small, 1.0, rho)
    return np.where(small, series(rho), exact(safe))


def a_func(rho):
    """a(rho) = sin^2 rho + rho sin rho - rho^2 (1 + cos rho); nonnegative on [0, pi]."""
    rho = np.asarray(rho, dtype=float)
    if np.any((rho < 0) | (rho > np.pi)):
        raise DomainError("a_func needs 0 <= rho <= pi")
    return _switch(rho, lambda r: _even_series(_a, r),
                   lambda r: np.sin(r) ** 2 + r * np.sin(r) - r**2 * (1 + np.cos(r)))


def b_func(lam):
    """b(lam) = a(pi/2 + arcsin lam) / (1 - lam) on [-1, 1)."""
    lam = np.asarray(lam, dtype=float)
    if np.any((lam < -1) | (lam >= 1)):
        raise DomainError("b_func needs -1 <= lam < 1")
    return a_func(np.clip(np.pi / 2 + np.arcsin(lam), 0.0, np.pi)) / (1 - lam)


def _check_rho(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any((rho <= 0) | (rho >= np.pi)):
        raise DomainError("rho must lie in (0, pi)")
    return rho


def abg(rho):
    """(A, B, G) at geodesic distance rho in (0, pi)."""
    rho = _check_rho(rho)
    A = _switch(rho, lambda r: _even_series(_A, r), lambda r: 2 * (np.sin(r) - r * np.cos(r)) / r)
    B = _switch(rho, lambda r: _even_series(_B, r), lambda r: (r - np.cos(r) * np.sin(r)) / np.sin(r))
    G = _switch(rho, lambda r: _even_series(_G, r), lambda r: 1 - r * np.cos(r) / np.sin(r))
    return A, B, G


def b_minus_a(rho):
    """B - A without cancellation at small rho."""
    rho = _check_rho(rho)
    return _switch(rho, lambda r: _even_series(_BA, r),
                   lambda r: (r**2 + r * np.sin(r) * np.cos(r) - 2 * np.sin(r) ** 2) / (r * np.sin(r)))


@dataclass(frozen=True)
class SphereConfig:
    rho: float
    theta: float
    psi: float
    w_perp: float = 0.0
    q_norm: float = 1.0
    w1_norm: float = 1.0

    def __post_init__(self):
        if not 0 < self.rho < np.pi:
            raise DomainError("rho must lie in (0, pi)")
        if self.w_perp < 0 or self.q_norm <= 0 or self.w1_norm < 0:
            raise DomainError("norms must be nonnegative (q_norm positive)")

    # plane inner products
    @property
    def rq(self):
        return self.q_norm * np.sin(self.theta)

    @property
    def rw(self):
        return self.w1_norm * np.sin(self.psi)

    @property
    def qw(self):
        return self.q_norm * self.w1_norm * np.cos(self.theta - self.psi)

    @property
    def w_sq(self):
        return self.w1_norm**2 + self.w_perp**2


def hessian_H(cfg: SphereConfig):
    """H = |w|^2 - I G with I = |w|^2 - <r_hat, w>^2."""
    _, _, G = abg(cfg.rho)
    return cfg.w_sq - (cfg.w_sq - cfg.rw**2) * G


def _g_derivatives(cfg):
    rho = cfg.rho
    A, B, G = abg(rho)
    s = np.sin(rho)
    q2 = cfg.q_norm**2
    G1 = B * cfg.rq / s
    G2 = rho / s**3 * A * cfg.rq**2 + B * (q2 - cfg.rq**2) / (rho * s)
    return A, B, G, G1, G2


def g_ddot(cfg: SphereConfig):
    """Second t-derivative of G, positive on (0, pi) unless q = 0."""
    return _g_derivatives(cfg)[4]


def neg_H1_ddot(cfg: SphereConfig):
    """The in-plane part -H1'' built from w1 alone."""
    rho = cfg.rho
    A, B, _ = abg(rho)
    BA = b_minus_a(rho)
    s = np.sin(rho)
    rq, rw, qw = cfg.rq, cfg.rw, cfg.qw
    q2, w12 = cfg.q_norm**2, cfg.w1_norm**2
    bracket = (A * rho**2 / s**2 * rq**2 + B * (q2 - rq**2)) * (w12 - rw**2)
    bracket = bracket + 4 * BA * (rq**2 * rw**2 - rq * rw * qw)
    bracket = bracket + A * (rw**2 * q2 - qw**2)
    return bracket / (rho * s)


def neg_H_ddot(cfg: SphereConfig):
    """-H'' = G'' |w_perp|^2 - H1''."""
    return g_ddot(cfg) * cfg.w_perp**2 + neg_H1_ddot(cfg)


def neg_H_ddot_direct(cfg: SphereConfig):
    """-H'' = G'' I + 2 G' I' + G I'' straight from the derivative block."""
    rho = cfg.rho
    _, _, G, G1, G2 = _g_derivatives(cfg)
    rq, rw, qw = cfg.rq, cfg.rw, cfg.qw
    q2, w2 = cfg.q_norm**2, cfg.w_sq
    I = w2 - rw**2
    I1 = 2 / rho * (-rw * qw + rw**2 * rq)
    I2 = 2 / rho**2 * (4 * rq * rw * qw - 4 * rw**2 * rq**2 - qw**2 + rw**2 * q2)
    return G2 * I + 2 * G1 * I1 + G * I2


def discriminant(rho, T):
    """Discriminant of P in S, in factored form (negative for every T)."""
    A, B, _ = abg(rho)
    BA = b_minus_a(rho)
    s = np.sin(rho)
    first = 2 * B - A + A * rho / s
    second = -2 * a_func(rho) / (rho * s)
    T = np.asarray(T, dtype=float)
    return 4 * (first * second * T**2 - A * BA)


def p_poly(rho, T, S):
    """P = A S^2 - 2 (2B - A) T S + A rho^2/sin^2 rho T^2 + B - A (completed square)."""
    A, B, _ = abg(rho)
    T = np.asarray(T, dtype=float)
    S = np.asarray(S, dtype=float)
    k = (2 * B - A) / A
    return A * (S - k * T) ** 2 - discriminant(rho, T) / (4 * A)


def p_poly_expanded(rho, T, S):
    """The same polynomial term by term, for cross-checking."""
    A, B, _ = abg(rho)
    BA = b_minus_a(rho)
    s = np.sin(rho)
    return A * S**2 - 2 * (2 * B - A) * T * S + A * rho**2 / s**2 * T**2 + BA


def neg_H_ddot_2d(cfg: SphereConfig):
    """In-plane value via cos^2 theta cos^2 psi P / (rho sin rho); needs finite tangents."""
    ct, cp = np.cos(cfg.theta), np.cos(cfg.psi)
    if abs(ct) < 1e-12 or abs(cp) < 1e-12:
        return neg_H1_ddot(SphereConfig(cfg.rho, cfg.theta, cfg.psi, 0.0, cfg.q_norm, cfg.w1_norm))
    P = p_poly(cfg.rho, np.tan(cfg.theta), np.tan(cfg.psi))
    scale = cfg.q_norm**2 * cfg.w1_norm**2
    return scale * ct**2 * cp**2 * P / (cfg.rho * np.sin(cfg.rho))


def equality_classifier(cfg: SphereConfig, tol=1e-12):
    """True iff q, w and r_hat are parallel (the zero set of -H'')."""
    sin_q = abs(np.cos(cfg.theta))
    sin_w = abs(np.cos(cfg.psi)) if cfg.w1_norm > 0 else 0.0
    return bool(cfg.w_perp <= tol and sin_q <= tol and sin_w <= tol)


# ---------------------------------------------------------------------------
# embedding in S^3 and the finite-difference oracle
# ---------------------------------------------------------------------------

def embed(cfg: SphereConfig):
    """Ambient realisation in R^4: returns (x, r, q, w) with x = e0, r_hat = e1.

    The plane coordinate called "first" is e2; w_perp points along e3.
    """
    e = np.eye(4)
    x = e[0]
    r = cfg.rho * e[1]
    q = cfg.q_norm * (np.cos(cfg.theta) * e[2] + np.sin(cfg.theta) * e[1])
    w = cfg.w1_norm * (np.cos(cfg.psi) * e[2] + np.sin(cfg.psi) * e[1]) + cfg.w_perp * e[3]
    return x, r, q, w


def dexp_sphere(x, r, q):
    """d(exp_x)_r applied to q on the unit sphere."""
    x, r, q = (np.asarray(a, float) for a in (x, r, q))
    rho = np.linalg.norm(r)
    if rho == 0:
        return q.copy()
    rh = r / rho
    qr = q @ rh
    return qr * (-np.sin(rho) * x + np.cos(rho) * rh) + np.sin(rho) / rho * (q - qr * rh)


def _sphere_exp(x, v):
    n = np.sqrt(np.sum(v * v, axis=-1))[..., None]
    safe = np.where(n == 0, 1, n)
    return np.cos(n) * x + np.where(n == 0, 1, np.sin(safe) / safe) * v


def _half_sq(x, y):
    d = 2 * np.arctan2(np.sqrt(np.sum((x - y) ** 2, -1)), np.sqrt(np.sum((x + y) ** 2, -1)))
    return d * d / 2


def neg_H_ddot_fd(cfg: SphereConfig, step=None):
    """-d^4/dt^2 ds^2 c(exp_x(s w), exp_x(r + t q)) by extended-precision stencils.

    Runs on unit w and q and rescales by |w|^2 |q|^2.
    """
    ld = np.longdouble
    x, r, q, w = embed(cfg)
    nw, nq = np.linalg.norm(w), np.linalg.norm(q)
    if nw == 0:
        return 0.0
    x, r = np.asarray(x, ld), np.asarray(r, ld)
    q, w = np.asarray(q / nq, ld), np.asarray(w / nw, ld)
    # Sixth order: both curves move by 3h, kept within 3/5 of the room.
    h = step or min(0.05, (np.pi - cfg.rho) / 10.0)
    nodes = np.asarray(_stencil.nodes(6) * h, ld)
    xs = _sphere_exp(x, nodes[:, None] * w)
    ys = _sphere_exp(x, r + nodes[:, None] * q)
    grid = _half_sq(xs[:, None, :], ys[None, :, :])
    value, _, _ = _stencil.mixed_fourth(grid, h, order=6)
    return -value * (nw * nq) ** 2


def hessian_H_fd(cfg: SphereConfig, step=1e-3):
    """d^2/ds^2 c(exp_x(s w), xb) at s = 0."""
    ld = np.longdouble
    x, r, _, w = (np.asarray(a, ld) for a in embed(cfg))
    xb = _sphere_exp(x, r)
    off = np.asarray(_stencil.OFFSETS5 * step, ld)
    vals = _half_sq(_sphere_exp(x, off[:, None] * w), xb)
    return float(_stencil.D2 @ vals / (12 * step**2))


def random_config(rng, rho_range=(0.05, np.pi - 0.05), w_perp_range=(0.0, 1.0)):
    return SphereConfig(
        rho=float(rng.uniform(*rho_range)),
        theta=float(rng.uniform(0, 2 * np.pi)),
        psi=float(rng.uniform(0, 2 * np.pi)),
        w_perp=float(rng.uniform(*w_perp_range)),
    )


def neg_H_ddot_cross(cfg: SphereConfig):
    """cross_fd / 2 at (x, exp_x r) with p = w and pb the t-velocity d(exp_x)_r q."""
    from .cost import RadialCost
    from .crosscurv import cross_fd
    from .manifold import Sphere

    x, r, q, w = embed(cfg)
    c = RadialCost(Sphere(3))
    xb = _sphere_exp(x, r)
    return cross_fd(c, x, xb, w, dexp_sphere(x, r, q)).cross_value / 2
