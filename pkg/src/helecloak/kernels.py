"""Layer-potential operators on quadrature meshes.

The logarithmic kernel G(x, y) = ln|x - y| / (2 pi) is handled three ways:

* off-curve targets use the plain trapezoid rule (spectrally accurate at
  a safe distance, guarded by a near-field check),
* on-curve single-layer values use Kress-style product quadrature: the
  periodic log singularity ln(2 |sin((t - tau)/2)|) is integrated exactly
  on the trigonometric interpolant via its Fourier symbol -1/(2|k|), and
  the smooth remainder by the trapezoid rule,
* the adjoint double-layer (Neumann-Poincare) kernel is smooth on a smooth
  curve, with diagonal limit kappa/(4 pi) for the counterclockwise
  outward-normal convention used here.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.linalg import circulant

from ._backend import BACKEND, core, worker_count
from .geometry import EllipticFrame, QuadratureMesh, _as_points

__all__ = [
    "NearFieldError",
    "green",
    "single_layer",
    "single_layer_gradient",
    "np_star",
    "jump_normal_derivative",
    "normal_derivative_matrix",
    "potential",
    "potential_gradient",
    "near_field_violation",
    "elliptic_basis",
]

INV_2PI = 1.0 / (2.0 * np.pi)
NEAR_FIELD_FACTOR = 2.0


class NearFieldError(ValueError):
    """Target closer to a source curve than the quadrature can resolve."""


def green(x, y) -> float:
    """Free-space kernel ln|x - y| / (2 pi); rejects coincident points."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = float(np.hypot(d[..., 0], d[..., 1]))
    if r == 0.0:
        raise ValueError("kernel is singular at coincident points")
    return INV_2PI * np.log(r)


def _split(mesh: QuadratureMesh):
    p = mesh.points
    return (
        np.ascontiguousarray(p[:, 0]),
        np.ascontiguousarray(p[:, 1]),
        np.ascontiguousarray(mesh.weights),
    )


def near_field_violation(mesh: QuadratureMesh, targets) -> np.ndarray:
    """True where a target sits within the near-field band of the curve.

    The band is NEAR_FIELD_FACTOR times the local node spacing at the
    nearest node; plain trapezoid evaluation is unreliable inside it.
    """
    t = _as_points(targets)
    sx, sy, _ = _split(mesh)
    dist, idx = core.nearest_node(sx, sy, np.ascontiguousarray(t[:, 0]), np.ascontiguousarray(t[:, 1]))
    return dist < NEAR_FIELD_FACTOR * mesh.spacing[np.asarray(idx)]


def _check_near(mesh, targets):
    bad = near_field_violation(mesh, targets)
    if np.any(bad):
        t = _as_points(targets)
        where = t[np.argmax(bad)]
        raise NearFieldError(
            f"{int(bad.sum())} target(s) inside the near-field band, first at {tuple(where)}; "
            "evaluate farther from the curve or mask these points"
        )


def single_layer_self(mesh: QuadratureMesh) -> np.ndarray:
    """On-curve single-layer matrix via periodic log-splitting quadrature."""
    n = mesh.n
    t = mesh.params
    dtv = t[:, None] - t[None, :]
    sx, sy, w = _split(mesh)
    dx = sx[:, None] - sx[None, :]
    dy = sy[:, None] - sy[None, :]
    dist = np.sqrt(dx * dx + dy * dy)
    np.fill_diagonal(dist, 1.0)
    sin_half = np.abs(np.sin(0.5 * dtv))
    np.fill_diagonal(sin_half, 0.5)  # dummy, diagonal is overwritten below
    smooth = INV_2PI * np.log(dist / (2.0 * sin_half)) * w[None, :]
    np.fill_diagonal(smooth, INV_2PI * np.log(mesh.jacobian) * w)

    k = np.abs(np.fft.fftfreq(n, 1.0 / n))
    sym = np.zeros(n)
    sym[1:] = -0.5 / k[1:]
    log_part = circulant(np.fft.ifft(sym).real)
    return smooth + log_part * mesh.jacobian[None, :]


def single_layer(source: QuadratureMesh, target=None, check_near: bool = True) -> np.ndarray:
    """Single-layer matrix mapping nodal density values to potentials.

    With no target (or the source mesh itself) the singular on-curve rule
    is used; otherwise targets must stay clear of the near-field band.
    """
    if target is None or target is source:
        return single_layer_self(source)
    pts = target.points if isinstance(target, QuadratureMesh) else _as_points(target)
    if check_near:
        _check_near(source, pts)
    sx, sy, w = _split(source)
    return core.slp_matrix(sx, sy, w, np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]))


def single_layer_gradient(source: QuadratureMesh, targets, check_near: bool = True):
    """Pair of matrices for the Cartesian gradient of the single layer."""
    pts = targets.points if isinstance(targets, QuadratureMesh) else _as_points(targets)
    if check_near:
        _check_near(source, pts)
    sx, sy, w = _split(source)
    return core.slp_grad_matrices(
        sx, sy, w, np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1])
    )


def np_star(mesh: QuadratureMesh) -> np.ndarray:
    """Neumann-Poincare operator K*: normal derivative at the curve itself.

    The kernel is continuous on a smooth curve; the diagonal holds the
    smooth limit kappa/(4 pi) times the node weight.
    """
    sx, sy, w = _split(mesh)
    nx = np.ascontiguousarray(mesh.normals[:, 0])
    ny = np.ascontiguousarray(mesh.normals[:, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        mat = np.asarray(core.adn_matrix(sx, sy, w, sx, sy, nx, ny))
    np.fill_diagonal(mat, mesh.curvature * (0.5 * INV_2PI) * mesh.weights)
    return mat


def normal_derivative_matrix(source: QuadratureMesh, target: QuadratureMesh, check_near: bool = True) -> np.ndarray:
    """<grad S_source[.], nu_target> at the nodes of a different curve."""
    if target is source:
        raise ValueError("use np_star for the on-curve normal derivative")
    if check_near:
        _check_near(source, target.points)
    sx, sy, w = _split(source)
    return core.adn_matrix(
        sx,
        sy,
        w,
        np.ascontiguousarray(target.points[:, 0]),
        np.ascontiguousarray(target.points[:, 1]),
        np.ascontiguousarray(target.normals[:, 0]),
        np.ascontiguousarray(target.normals[:, 1]),
    )


def jump_normal_derivative(mesh: QuadratureMesh, density: np.ndarray, side: str) -> np.ndarray:
    """Exterior (+) or interior (-) normal-derivative trace of S[density].

    Implements the jump relation dS/dnu|+- = (+-1/2 I + K*) density.
    """
    if side not in ("+", "-"):
        raise ValueError(f"side must be '+' or '-', got {side!r}")
    sgn = 0.5 if side == "+" else -0.5
    dens = np.asarray(density, dtype=float)
    return sgn * dens + np_star(mesh) @ dens


# ---------------------------------------------------------------------------
# matrix-free evaluation for large target sets


def _chunked(fn, targets, cols):
    pts = _as_points(targets)
    workers = worker_count()
    if workers == 1 or len(pts) < 8192:
        return fn(pts)
    chunks = np.array_split(np.arange(len(pts)), workers * 4)
    out = np.empty(len(pts) if cols == 1 else (len(pts), cols))
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futures = {ex.submit(fn, pts[c]): c for c in chunks if len(c)}
        for fut, c in futures.items():
            out[c] = fut.result()
    return out


def potential(mesh: QuadratureMesh, density, targets, check_near: bool = True) -> np.ndarray:
    """S[density] at off-curve targets, chunked over the worker cap."""
    if check_near:
        _check_near(mesh, targets)
    sx, sy, w = _split(mesh)
    dens = np.ascontiguousarray(np.asarray(density, dtype=float))

    def ev(pts):
        return np.asarray(
            core.slp_apply(sx, sy, w, dens, np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]))
        )

    return _chunked(ev, targets, 1)


def potential_gradient(mesh: QuadratureMesh, density, targets, check_near: bool = True) -> np.ndarray:
    """grad S[density] at off-curve targets, shape (n, 2)."""
    if check_near:
        _check_near(mesh, targets)
    sx, sy, w = _split(mesh)
    dens = np.ascontiguousarray(np.asarray(density, dtype=float))

    def ev(pts):
        return np.asarray(
            core.slp_grad_apply(sx, sy, w, dens, np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]))
        )

    return _chunked(ev, targets, 2)


# ---------------------------------------------------------------------------
# elliptic harmonic basis


def elliptic_basis(frame: EllipticFrame, xi: float, n: int, parity: str, eta) -> np.ndarray:
    """Metric-weighted trigonometric density cos/sin(n eta) / gamma(xi, eta).

    These are the natural densities on a coordinate ellipse: the metric
    weight makes them integrate to zero exactly, and they diagonalize both
    the single-layer operator and K*.
    """
    if isinstance(eta, QuadratureMesh):
        eta = eta.params
    eta = np.asarray(eta, dtype=float)
    if n < 0:
        raise ValueError("mode order must be >= 0")
    if parity == "cos":
        num = np.cos(n * eta)
    elif parity == "sin":
        if n == 0:
            raise ValueError("sin basis requires n >= 1")
        num = np.sin(n * eta)
    else:
        raise ValueError(f"parity must be 'cos' or 'sin', got {parity!r}")
    return num / frame.metric(xi, eta)
