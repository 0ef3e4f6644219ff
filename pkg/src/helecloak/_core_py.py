"""NumPy fallback for the hot kernels.

Same call signatures as the compiled module `_core_cy`; see `_backend`
for how one of the two is selected at import time.
"""

import numpy as np

INV_2PI = 1.0 / (2.0 * np.pi)


def slp_matrix(sx, sy, w, tx, ty):
    """Dense single-layer matrix G(x_i, y_j) * w_j for off-curve targets."""
    dx = tx[:, None] - sx[None, :]
    dy = ty[:, None] - sy[None, :]
    r2 = dx * dx + dy * dy
    return 0.5 * INV_2PI * np.log(r2) * w[None, :]


def slp_grad_matrices(sx, sy, w, tx, ty):
    """Gradient-of-single-layer matrices, one per target component."""
    dx = tx[:, None] - sx[None, :]
    dy = ty[:, None] - sy[None, :]
    r2 = dx * dx + dy * dy
    scale = INV_2PI * w[None, :] / r2
    return dx * scale, dy * scale


def adn_matrix(sx, sy, w, tx, ty, nx, ny):
    """Normal-derivative-at-target matrix <grad G(x_i, .), nu(x_i)> w_j."""
    dx = tx[:, None] - sx[None, :]
    dy = ty[:, None] - sy[None, :]
    r2 = dx * dx + dy * dy
    num = dx * nx[:, None] + dy * ny[:, None]
    return INV_2PI * num / r2 * w[None, :]


def slp_apply(sx, sy, w, dens, tx, ty):
    """Matrix-free single-layer potential at targets."""
    dx = tx[:, None] - sx[None, :]
    dy = ty[:, None] - sy[None, :]
    r2 = dx * dx + dy * dy
    return 0.5 * INV_2PI * (np.log(r2) @ (w * dens))


def slp_grad_apply(sx, sy, w, dens, tx, ty):
    """Matrix-free gradient of the single-layer potential at targets."""
    dx = tx[:, None] - sx[None, :]
    dy = ty[:, None] - sy[None, :]
    inv = (w * dens)[None, :] / (dx * dx + dy * dy)
    gx = INV_2PI * (dx * inv).sum(axis=1)
    gy = INV_2PI * (dy * inv).sum(axis=1)
    return np.column_stack([gx, gy])


def nearest_node(sx, sy, tx, ty):
    """Distance to, and index of, the nearest source node per target."""
    dx = tx[:, None] - sx[None, :]
    dy = ty[:, None] - sy[None, :]
    r2 = dx * dx + dy * dy
    idx = np.argmin(r2, axis=1)
    return np.sqrt(r2[np.arange(len(tx)), idx]), idx
