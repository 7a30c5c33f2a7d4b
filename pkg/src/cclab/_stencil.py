"""Central finite-difference stencils shared by the numerical oracles."""

import numpy as np

# Integer numerators keep row sums exactly zero in any precision; the
# common denominator 12 is applied after the contraction.
#: Fourth-order first-derivative numerators at offsets -2..2 (divide by 12 h).
D1 = np.array([1, -8, 0, 8, -1])
#: Fourth-order second-derivative numerators at offsets -2..2 (divide by 12 h^2).
D2 = np.array([-1, 16, -30, 16, -1])
#: Three-point second-derivative weights (divide by h^2).
D2_3 = np.array([1.0, -2.0, 1.0])

OFFSETS5 = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])

#: Sixth-order second-derivative numerators at offsets -3..3 (divide by 180 h^2).
D2_6 = np.array([2, -27, 270, -490, 270, -27, 2])

# Node multipliers of h covering the h and h/2 stencils of each order, with
# the indices picking out each level.
_SCHEMES = {
    4: (np.array([-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0]), [0, 1, 3, 5, 6], [1, 2, 3, 4, 5], D2, 12),
    6: (np.array([-3.0, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0]),
        [0, 1, 3, 5, 7, 9, 10], [2, 3, 4, 5, 6, 7, 8], D2_6, 180),
}


def nodes(order=4):
    """Node multipliers of h at which ``mixed_fourth`` expects the grid."""
    return _SCHEMES[order][0]


def reach(order=4):
    """Largest node multiplier: the stencil extends ``reach * h`` from 0."""
    return float(_SCHEMES[order][0][-1])


def first_derivative(f, h):
    """d/ds f(s) at 0 from a vectorised ``f`` over an offset array."""
    vals = np.asarray(f(OFFSETS5 * h))
    return np.tensordot(D1, vals, axes=(0, 0)) / (12 * h)


def mixed_fourth(grid, h, order=4):
    """Richardson-extrapolated d^4/ds^2 dt^2 at the origin.

    ``grid[i, j]`` holds the function at ``(nodes(order)[i] * h, nodes(order)[j] * h)``.
    The tensor stencil of the given order is applied at steps ``h`` and
    ``h / 2`` and the two are combined to cancel the leading error term.
    Returns ``(value, coarse, fine)``.
    """
    _, idx_h, idx_h2, w, den = _SCHEMES[order]
    g = np.asarray(grid)
    coarse = w @ g[np.ix_(idx_h, idx_h)] @ w / (den**2 * h**4)
    fine = w @ g[np.ix_(idx_h2, idx_h2)] @ w / (den**2 * (h / 2) ** 4)
    k = 2.0**order
    value = (k * fine - coarse) / (k - 1)
    return float(value), float(coarse), float(fine)


def mixed_second(grid, h):
    """Fourth-order d^2/ds dt at the origin from a 5x5 grid at offsets -2..2 times h."""
    return np.einsum("i,ij...,j->...", D1, np.asarray(grid), D1) / (144 * h**2)
