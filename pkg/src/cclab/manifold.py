"""Model Riemannian manifolds in ambient coordinates.

Points and tangent vectors are plain ``numpy`` arrays in the ambient space of
the embedding; every method broadcasts over leading axes.  The manifold object
is the owner of its points: the same array means nothing without it.

* ``Sphere(n)``: unit sphere in R^{n+1}.
* ``Euclidean(l)``: R^l.
* ``ComplexProjective(m)``: CP^m as gauged unit vectors of C^{m+1}, stored as
  interleaved (re, im) pairs in R^{2m+2}.  Tangent vectors at a representative
  are horizontal vectors there (orthogonal to x and i*x).
* ``Product(factors)``: Riemannian product, coordinates concatenated.
"""

from __future__ import annotations

import re

import numpy as np
from scipy.linalg import block_diag

from .errors import CutLocusProximity, DomainError

#: Cut-locus safety margin (radians) on every sphere-like factor.
DELTA = 0.05

_POINT_TOL = 1e-12
_TANGENT_TOL = 1e-10


def _arr(x):
    """Float array that keeps extended precision when given it."""
    a = np.asarray(x)
    if a.dtype.kind != "f" or a.dtype.itemsize < 8:
        a = a.astype(float)
    return a


def _dot(u, v):
    return np.sum(u * v, axis=-1)


def _norm(u):
    return np.sqrt(np.sum(u * u, axis=-1))


def _sphere_dist(x, y):
    # Stable for both nearby and near-antipodal points, unlike arccos.
    return 2.0 * np.arctan2(_norm(x - y), _norm(x + y))


def _sin_ratio(d):
    """sin(d)/d, smooth at 0."""
    d = np.asarray(d)
    small = np.abs(d) < 1e-4
    safe = np.where(small, 1, d)
    d2 = d * d
    return np.where(small, 1 - d2 / 6 + d2 * d2 / 120, np.sin(safe) / safe)


def _curvature_coefs(d):
    """Return (d/sin d, (d cos d - sin d)/sin^3 d) with small-d series."""
    d = np.asarray(d, dtype=float)
    small = d < 1e-3
    safe = np.where(small, 1.0, d)
    s = np.sin(safe)
    r1 = np.where(small, 1.0 + d**2 / 6.0, safe / s)
    r2 = np.where(small, -1.0 / 3.0 - 2.0 * d**2 / 15.0,
                  (safe * np.cos(safe) - s) / s**3)
    return r1, r2


class Manifold:
    """Common interface.  Subclasses fill in the geometry."""

    name: str
    ambient_dim: int
    dim: int
    #: Injectivity radius; ``np.inf`` for flat factors.
    injectivity = np.inf

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"

    def __eq__(self, other):
        return isinstance(other, Manifold) and self.name == other.name

    def __hash__(self):
        return hash(self.name)

    # -- validation -------------------------------------------------------
    def check_point(self, x):
        x = _arr(x)
        if x.shape[-1] != self.ambient_dim:
            raise DomainError(f"{self.name}: expected ambient dim {self.ambient_dim}, got {x.shape[-1]}")
        return x

    def check_tangent(self, x, v, tol=_TANGENT_TOL):
        v = _arr(v)
        if v.shape[-1] != self.ambient_dim:
            raise DomainError(f"{self.name}: tangent has wrong ambient dim {v.shape[-1]}")
        defect = np.max(np.abs(v - self.proj(x, v)), initial=0.0)
        if defect > tol * max(1.0, float(np.max(np.abs(v), initial=0.0))):
            raise DomainError(f"{self.name}: vector is not tangent at the given point (defect {defect:.2e})")
        return v

    def check_pair(self, x, y, margin=DELTA):
        """Raise CutLocusProximity unless every factor is ``margin`` away from its cut locus."""
        if np.any(self.room(x, y) <= margin):
            raise CutLocusProximity(f"{self.name}: pair within {margin} of the cut locus")

    # -- metric -----------------------------------------------------------
    def inner(self, x, u, v):
        u, v = _arr(u), _arr(v)
        self.check_tangent(x, u)
        self.check_tangent(x, v)
        return _dot(u, v)

    def norm(self, x, v):
        return _norm(v)

    def proj(self, x, u):
        raise NotImplementedError

    def frame(self, x):
        """Orthonormal tangent frame at a single point, shape ``(dim, ambient_dim)``."""
        raise NotImplementedError

    def align(self, y, ref):
        """Representative of ``y`` best matched to ``ref`` (identity except on CP^m)."""
        return _arr(y)

    def move_vector(self, y, v, x):
        """Carry a vector at ``y`` to the tangent space at ``x`` (re-phase, then project).

        Agrees with parallel transport to second order in dist(x, y).
        """
        return self.proj(x, _arr(v))

    def canonical(self, x):
        return _arr(x)

    # -- geodesics --------------------------------------------------------
    def dist(self, x, y):
        raise NotImplementedError

    def room(self, x, y):
        """Distance to the cut locus of the pair (min over factors)."""
        return self.injectivity - self.dist(x, y)

    def exp(self, x, v, margin=DELTA):
        raise NotImplementedError

    def log(self, x, y, margin=DELTA):
        raise NotImplementedError

    def half_square_cross_matrix(self, x, y):
        """-d^2(dist^2/2)/dx dy in the frames at x (rows) and y (columns)."""
        raise NotImplementedError

    # -- sampling ---------------------------------------------------------
    def random_point(self, rng):
        raise NotImplementedError

    def random_tangent(self, rng, x, unit=True):
        v = self.proj(x, rng.standard_normal(self.ambient_dim))
        if unit:
            v = v / np.linalg.norm(v)
        return v

    # -- product plumbing -------------------------------------------------
    @property
    def factors(self):
        return [self]

    def split(self, x):
        return [_arr(x)]

    def join(self, parts):
        return _arr(parts[0])


class Euclidean(Manifold):
    injectivity = np.inf

    def __init__(self, l):
        if l < 1:
            raise DomainError("Euclidean dimension must be >= 1")
        self.l = l
        self.name = f"R{l}"
        self.ambient_dim = l
        self.dim = l

    def proj(self, x, u):
        return np.broadcast_to(_arr(u),
                               np.broadcast_shapes(np.shape(x), np.shape(u))).copy()

    def frame(self, x):
        return np.eye(self.l)

    def dist(self, x, y):
        return _norm(np.asarray(x) - np.asarray(y))

    def room(self, x, y):
        return np.full(np.broadcast_shapes(np.shape(x), np.shape(y))[:-1], np.inf)

    def exp(self, x, v, margin=DELTA):
        return _arr(x) + _arr(v)

    def log(self, x, y, margin=DELTA):
        return _arr(y) - _arr(x)

    def half_square_cross_matrix(self, x, y):
        return np.eye(self.l)

    def random_point(self, rng):
        return rng.standard_normal(self.l)


class Sphere(Manifold):
    injectivity = np.pi

    def __init__(self, n):
        if n < 1:
            raise DomainError("sphere dimension must be >= 1")
        self.n = n
        self.name = f"S{n}"
        self.ambient_dim = n + 1
        self.dim = n

    def check_point(self, x):
        x = super().check_point(x)
        if np.max(np.abs(_norm(x) - 1.0), initial=0.0) > _POINT_TOL:
            raise DomainError(f"{self.name}: point is not unit norm")
        return x

    def proj(self, x, u):
        x = _arr(x)
        u = _arr(u)
        return u - _dot(x, u)[..., None] * x

    def frame(self, x):
        x = _arr(x)
        q, _ = np.linalg.qr(np.column_stack([x, np.eye(self.ambient_dim)]))
        return q[:, 1:].T

    def canonical(self, x):
        x = _arr(x)
        return x / _norm(x)[..., None]

    def dist(self, x, y):
        return _sphere_dist(_arr(x), _arr(y))

    def exp(self, x, v, margin=DELTA):
        x = _arr(x)
        v = _arr(v)
        nv = _norm(v)
        if np.any(nv >= np.pi - margin):
            raise CutLocusProximity(f"{self.name}: |v| = {np.max(nv):.4f} beyond pi - {margin}")
        y = np.cos(nv)[..., None] * x + _sin_ratio(nv)[..., None] * v
        return y / _norm(y)[..., None]

    def log(self, x, y, margin=DELTA):
        x = _arr(x)
        y = _arr(y)
        d = self.dist(x, y)
        if np.any(d >= np.pi - margin):
            raise CutLocusProximity(f"{self.name}: dist = {np.max(d):.4f} beyond pi - {margin}")
        w = y - x
        u = w - _dot(x, w)[..., None] * x
        nu = _norm(u)
        scale = np.where(nu > 0, d / np.where(nu > 0, nu, 1.0), 0.0)
        return scale[..., None] * u

    def half_square_cross_matrix(self, x, y):
        x = _arr(x)
        y = _arr(y)
        fx, fy = self.frame(x), self.frame(y)
        d = float(self.dist(x, y))
        r1, r2 = _curvature_coefs(d)
        alpha = fx @ y
        beta = fy @ x
        return r1 * (fx @ fy.T) + r2 * np.outer(alpha, beta)

    def random_point(self, rng):
        v = rng.standard_normal(self.ambient_dim)
        return v / np.linalg.norm(v)


def _to_complex(x):
    x = _arr(x)
    z = np.empty(x.shape[:-1] + (x.shape[-1] // 2,), dtype=np.result_type(x.dtype, np.complex128))
    z.real = x[..., 0::2]
    z.imag = x[..., 1::2]
    return z


def _to_real(z):
    z = np.asarray(z)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],), dtype=z.real.dtype)
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def _cinner(x, y):
    """Hermitian product <x, y> = sum conj(x_k) y_k on complex arrays."""
    return np.sum(np.conj(x) * y, axis=-1)


class ComplexProjective(Manifold):
    """CP^m with the Fubini-Study metric normalised so that the Hopf map is a Riemannian submersion."""

    injectivity = np.pi / 2

    def __init__(self, m):
        if m < 1:
            raise DomainError("CP^m needs m >= 1")
        self.m = m
        self.name = f"CP{m}"
        self.ambient_dim = 2 * m + 2
        self.dim = 2 * m

    def check_point(self, x):
        x = super().check_point(x)
        if np.max(np.abs(_norm(x) - 1.0), initial=0.0) > _POINT_TOL:
            raise DomainError(f"{self.name}: representative is not a unit vector")
        return x

    def is_gauged(self, x, tol=1e-12):
        return bool(np.all(np.abs(self.gauge(x) - np.asarray(x)) <= tol))

    def gauge(self, x):
        """Rotate the phase so the first coordinate of largest modulus is real and >= 0."""
        z = _to_complex(x)
        k = np.argmax(np.abs(z), axis=-1)
        zk = np.take_along_axis(z, k[..., None], axis=-1)
        mod = np.abs(zk)
        safe = np.where(mod > 0, mod, 1.0)
        # real arithmetic: complex division by a real is not exact in numpy
        phase = np.where(mod > 0, zk.real / safe - 1j * (zk.imag / safe), 1.0)
        out = z * phase
        # the pivot is exactly real so that gauging is idempotent
        np.put_along_axis(out, k[..., None], mod.astype(out.real.dtype), axis=-1)
        return _to_real(out)

    canonical = gauge

    def align(self, y, ref):
        zy, zr = _to_complex(y), _to_complex(ref)
        w = _cinner(zr, zy)
        mod = np.abs(w)
        phase = np.where(mod > 0, np.conj(w) / np.where(mod > 0, mod, 1.0), 1.0)
        return _to_real(zy * phase[..., None])

    def move_vector(self, y, v, x):
        zy, zx = _to_complex(y), _to_complex(x)
        w = _cinner(zx, zy)
        mod = np.abs(w)
        phase = np.where(mod > 0, np.conj(w) / np.where(mod > 0, mod, 1.0), 1.0)
        return self.proj(x, _to_real(_to_complex(v) * phase[..., None]))

    def complex_structure(self, v):
        """Multiplication by i, which preserves horizontal spaces."""
        return _to_real(1j * _to_complex(v))

    def proj(self, x, u):
        x = _arr(x)
        u = _arr(u)
        ix = self.complex_structure(x)
        return u - _dot(x, u)[..., None] * x - _dot(ix, u)[..., None] * ix

    def frame(self, x):
        x = _arr(x)
        ix = self.complex_structure(x)
        q, _ = np.linalg.qr(np.column_stack([x, ix, np.eye(self.ambient_dim)]))
        return q[:, 2:].T

    def dist(self, x, y):
        # averaging both alignments makes the result exactly symmetric
        x, y = _arr(x), _arr(y)
        return 0.5 * (_sphere_dist(x, self.align(y, x)) + _sphere_dist(y, self.align(x, y)))

    def exp(self, x, v, margin=DELTA):
        x = _arr(x)
        v = _arr(v)
        nv = _norm(v)
        if np.any(nv >= np.pi / 2 - margin):
            raise CutLocusProximity(f"{self.name}: |v| = {np.max(nv):.4f} beyond pi/2 - {margin}")
        y = np.cos(nv)[..., None] * x + _sin_ratio(nv)[..., None] * v
        return self.gauge(y / _norm(y)[..., None])

    def log(self, x, y, margin=DELTA):
        x = _arr(x)
        ya = self.align(y, x)
        d = _sphere_dist(x, ya)
        if np.any(d >= np.pi / 2 - margin):
            raise CutLocusProximity(f"{self.name}: dist = {np.max(d):.4f} beyond pi/2 - {margin}")
        w = ya - x
        u = w - _dot(x, w)[..., None] * x
        nu = _norm(u)
        scale = np.where(nu > 0, d / np.where(nu > 0, nu, 1.0), 0.0)
        return self.proj(x, scale[..., None] * u)

    def half_square_cross_matrix(self, x, y):
        x = _arr(x)
        y = _arr(y)
        fx, fy = self.frame(x), self.frame(y)
        zx, zy = _to_complex(x), _to_complex(y)
        ex, ey = _to_complex(fx), _to_complex(fy)
        z = _cinner(zx, zy)
        zeta = abs(z)
        d = float(self.dist(x, y))
        a = ex.conj() @ zy          # <e_i, y>
        b = zx.conj() @ ey.T        # <x, ebar_j>
        g = ex.conj() @ ey.T        # <e_i, ebar_j>
        alpha = np.real(np.conj(z) * a) / zeta
        beta = np.real(np.conj(z) * b) / zeta
        k = (np.real(np.outer(a, np.conj(b))) + np.real(np.conj(z) * g) - np.outer(alpha, beta)) / zeta
        r1, r2 = _curvature_coefs(d)
        return r1 * k + r2 * np.outer(alpha, beta)

    def random_point(self, rng):
        z = rng.standard_normal(self.m + 1) + 1j * rng.standard_normal(self.m + 1)
        return self.gauge(_to_real(z / np.linalg.norm(z)))


class Product(Manifold):
    def __init__(self, factors):
        factors = list(factors)
        if len(factors) < 2:
            raise DomainError("a product needs at least two factors")
        flat = []
        for f in factors:
            flat.extend(f.factors)
        self._factors = flat
        self.name = "x".join(f.name for f in flat)
        self.ambient_dim = sum(f.ambient_dim for f in flat)
        self.dim = sum(f.dim for f in flat)
        self._offsets = np.cumsum([0] + [f.ambient_dim for f in flat])
        self.injectivity = min(f.injectivity for f in flat)

    @property
    def factors(self):
        return list(self._factors)

    def split(self, x):
        x = _arr(x)
        o = self._offsets
        return [x[..., o[i]:o[i + 1]] for i in range(len(self._factors))]

    def join(self, parts):
        return np.concatenate([_arr(p) for p in parts], axis=-1)

    def _map(self, fn, *arrays):
        cols = [self.split(a) for a in arrays]
        return [fn(f, *(c[i] for c in cols)) for i, f in enumerate(self._factors)]

    def check_point(self, x):
        x = super().check_point(x)
        self._map(lambda f, xi: f.check_point(xi), x)
        return x

    def proj(self, x, u):
        return self.join(self._map(lambda f, xi, ui: f.proj(xi, ui), x, u))

    def frame(self, x):
        return block_diag(*self._map(lambda f, xi: f.frame(xi), x))

    def align(self, y, ref):
        return self.join(self._map(lambda f, yi, ri: f.align(yi, ri), y, ref))

    def move_vector(self, y, v, x):
        return self.join(self._map(lambda f, yi, vi, xi: f.move_vector(yi, vi, xi), y, v, x))

    def canonical(self, x):
        return self.join(self._map(lambda f, xi: f.canonical(xi), x))

    def dist(self, x, y):
        parts = self._map(lambda f, xi, yi: f.dist(xi, yi), x, y)
        return np.sqrt(sum(np.square(p) for p in parts))

    def factor_dists(self, x, y):
        return self._map(lambda f, xi, yi: f.dist(xi, yi), x, y)

    def room(self, x, y):
        parts = self._map(lambda f, xi, yi: f.room(xi, yi), x, y)
        return np.minimum.reduce(parts)

    def exp(self, x, v, margin=DELTA):
        return self.join(self._map(lambda f, xi, vi: f.exp(xi, vi, margin), x, v))

    def log(self, x, y, margin=DELTA):
        return self.join(self._map(lambda f, xi, yi: f.log(xi, yi, margin), x, y))

    def half_square_cross_matrix(self, x, y):
        return block_diag(*self._map(lambda f, xi, yi: f.half_square_cross_matrix(xi, yi), x, y))

    def random_point(self, rng):
        return self.join([f.random_point(rng) for f in self._factors])


_TOKEN = re.compile(r"^(CP|S|R)(\d+)$")


def parse_manifold(spec: str) -> Manifold:
    """Build a manifold from strings such as ``"S2"``, ``"CP1"`` or ``"S3xS5xR2"``."""
    tokens = spec.strip().split("x")
    parts = []
    for tok in tokens:
        m = _TOKEN.match(tok)
        if m is None:
            raise DomainError(f"unknown manifold token {tok!r} in {spec!r}")
        kind, n = m.group(1), int(m.group(2))
        parts.append({"S": Sphere, "R": Euclidean, "CP": ComplexProjective}[kind](n))
    return parts[0] if len(parts) == 1 else Product(parts)


def inner(manifold, x, u, v):
    """Riemannian inner product of two tangent vectors at ``x``."""
    return manifold.inner(x, u, v)


def exp_map(manifold, x, v):
    return manifold.exp(x, v)


def log_map(manifold, x, y):
    return manifold.log(x, y)


def dist(manifold, x, y):
    return manifold.dist(x, y)
