"""Closed-curve geometry and quadrature meshes.

Every boundary in the solver is a smooth (or piecewise-smooth) closed curve
discretized at equispaced parameter values on [0, 2pi).  The mesh carries
everything downstream quadrature needs: node positions, Jacobian (speed),
trapezoid weights, outward unit normals and signed curvature.  Curves are
always oriented counterclockwise so that normals point away from the
enclosed region.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi


class GeometryError(ValueError):
    """Raised for degenerate or invalid curve definitions."""


def _as_points(pts) -> np.ndarray:
    a = np.atleast_2d(np.asarray(pts, dtype=float))
    if a.shape[-1] != 2:
        raise GeometryError(f"expected points with 2 columns, got shape {a.shape}")
    return a


def _check_node_count(n: int) -> int:
    n = int(n)
    if n < 16 or n % 2 != 0:
        raise GeometryError(f"node count must be even and >= 16, got {n}")
    return n


def spectral_derivatives(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First and second parameter derivatives of periodic complex samples.

    Differentiation acts on the trigonometric interpolant, so it is exact
    for band-limited curves and spectrally accurate for smooth ones.
    """
    n = len(samples)
    k = np.fft.fftfreq(n, 1.0 / n)
    ik = 1j * k
    if n % 2 == 0:
        # odd derivative of the unmatched Nyquist mode is taken as zero
        ik[n // 2] = 0.0
    chat = np.fft.fft(samples)
    cp = np.fft.ifft(chat * ik)
    cpp = np.fft.ifft(chat * ik * ik)
    return cp, cpp


@dataclass(frozen=True)
class QuadratureMesh:
    """Nystrom discretization of a closed counterclockwise curve.

    Attributes
    ----------
    points : (n, 2) array
        Node positions x(t_j) at equispaced parameters t_j = 2*pi*j/n.
    params : (n,) array
        The parameter values t_j.
    jacobian : (n,) array
        Speed |x'(t_j)| of the parametrization.
    weights : (n,) array
        Trapezoid quadrature weights jacobian * (2*pi/n); their sum is the
        curve perimeter.
    normals : (n, 2) array
        Outward unit normals.
    curvature : (n,) array
        Signed curvature, positive for a convex counterclockwise curve.
    """

    points: np.ndarray
    params: np.ndarray
    jacobian: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    curvature: np.ndarray

    def __post_init__(self):
        for name in ("points", "params", "jacobian", "weights", "normals", "curvature"):
            getattr(self, name).setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.params)

    @property
    def dt(self) -> float:
        return TWO_PI / self.n

    @property
    def perimeter(self) -> float:
        return float(self.weights.sum())

    @property
    def spacing(self) -> np.ndarray:
        """Local node spacing, used for near-field distance thresholds."""
        return self.weights

    def bounding_radius(self, origin=(0.0, 0.0)) -> float:
        d = self.points - np.asarray(origin, dtype=float)
        return float(np.hypot(d[:, 0], d[:, 1]).max())

    def winding_number(self, targets) -> np.ndarray:
        """Integer winding number of the curve about each target point.

        1 for points enclosed by the curve, 0 outside.  Accuracy degrades
        within a node spacing of the curve; mask such points first.
        """
        x = _as_points(targets)
        dx = self.points[None, :, 0] - x[:, None, 0]
        dy = self.points[None, :, 1] - x[:, None, 1]
        # tangential direction recovered from the outward normal
        tx, ty = -self.normals[:, 1], self.normals[:, 0]
        cross = dx * ty[None, :] - dy * tx[None, :]
        r2 = dx * dx + dy * dy
        w = (cross / r2) @ self.weights / TWO_PI
        return np.rint(w).astype(int)

    def distance_to(self, targets) -> np.ndarray:
        """Distance from each target to the nearest mesh node."""
        x = _as_points(targets)
        dx = x[:, None, 0] - self.points[None, :, 0]
        dy = x[:, None, 1] - self.points[None, :, 1]
        return np.sqrt(dx * dx + dy * dy).min(axis=1)


def _mesh_from_complex(c, cp, cpp, params) -> QuadratureMesh:
    speed = np.abs(cp)
    if speed.min() <= 0.0:
        raise GeometryError("parametrization has a stationary point")
    tangent = cp / speed
    normal_c = -1j * tangent
    curvature = -(np.conj(cpp) * normal_c).real / speed**2
    n = len(c)
    points = np.column_stack([c.real, c.imag])
    normals = np.column_stack([normal_c.real, normal_c.imag])
    area = 0.5 * np.sum((c.real * cp.imag - c.imag * cp.real)) * TWO_PI / n
    if area <= 0.0:
        raise GeometryError("curve must be oriented counterclockwise")
    return QuadratureMesh(
        points=points,
        params=np.asarray(params, dtype=float),
        jacobian=speed,
        weights=speed * TWO_PI / n,
        normals=normals,
        curvature=curvature,
    )


def from_parametrization(
    position: Callable[[np.ndarray], np.ndarray],
    n: int = 256,
    derivative: Callable[[np.ndarray], np.ndarray] | None = None,
    second_derivative: Callable[[np.ndarray], np.ndarray] | None = None,
) -> QuadratureMesh:
    """Mesh a closed curve given as t -> (x1(t), x2(t)) on [0, 2pi).

    Analytic derivatives are used when supplied; otherwise they are
    computed spectrally from the position samples.
    """
    n = _check_node_count(n)
    t = TWO_PI * np.arange(n) / n
    pts = _as_points(position(t))
    c = pts[:, 0] + 1j * pts[:, 1]
    if derivative is not None:
        d1 = _as_points(derivative(t))
        cp = d1[:, 0] + 1j * d1[:, 1]
        if second_derivative is not None:
            d2 = _as_points(second_derivative(t))
            cpp = d2[:, 0] + 1j * d2[:, 1]
        else:
            cpp, _ = spectral_derivatives(cp)
    else:
        cp, cpp = spectral_derivatives(c)
    return _mesh_from_complex(c, cp, cpp, t)


def build_circle(radius: float, center=(0.0, 0.0), n: int = 256) -> QuadratureMesh:
    if radius <= 0.0:
        raise GeometryError(f"circle radius must be positive, got {radius}")
    n = _check_node_count(n)
    cx, cy = float(center[0]), float(center[1])
    t = TWO_PI * np.arange(n) / n
    ct, st = np.cos(t), np.sin(t)
    return QuadratureMesh(
        points=np.column_stack([cx + radius * ct, cy + radius * st]),
        params=t,
        jacobian=np.full(n, radius),
        weights=np.full(n, radius * TWO_PI / n),
        normals=np.column_stack([ct, st]),
        curvature=np.full(n, 1.0 / radius),
    )


def build_polar_shape(
    radius_fn: Callable[[np.ndarray], np.ndarray],
    n: int = 256,
    dr_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    d2r_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    center=(0.0, 0.0),
    scale: float = 1.0,
) -> QuadratureMesh:
    """Mesh a star-shaped curve r(t)*(cos t, sin t) about ``center``.

    The scalar profile is a polar radius; it must stay strictly positive.
    Missing derivatives of r are filled in spectrally.
    """
    n = _check_node_count(n)
    if scale <= 0.0:
        raise GeometryError("scale must be positive")
    t = TWO_PI * np.arange(n) / n
    r = scale * np.asarray(radius_fn(t), dtype=float)
    if r.min() <= 0.0:
        raise GeometryError("polar radius must be strictly positive")
    if dr_fn is not None:
        dr = scale * np.asarray(dr_fn(t), dtype=float)
        if d2r_fn is not None:
            d2r = scale * np.asarray(d2r_fn(t), dtype=float)
        else:
            d2r = spectral_derivatives(dr.astype(complex))[0].real
    else:
        dr = spectral_derivatives(r.astype(complex))[0].real
        d2r = spectral_derivatives(dr.astype(complex))[0].real
    eit = np.exp(1j * t)
    c = r * eit + (center[0] + 1j * center[1])
    cp = (dr + 1j * r) * eit
    cpp = (d2r - r + 2j * dr) * eit
    return _mesh_from_complex(c, cp, cpp, t)


def build_flower(n: int = 256, center=(0.0, 0.0), scale: float = 1.0) -> QuadratureMesh:
    """Five-petal profile r(t) = 1 - 0.1 cos(5t)."""
    return build_polar_shape(
        lambda t: 1.0 - 0.1 * np.cos(5.0 * t),
        n=n,
        dr_fn=lambda t: 0.5 * np.sin(5.0 * t),
        d2r_fn=lambda t: 2.5 * np.cos(5.0 * t),
        center=center,
        scale=scale,
    )


def build_peanut(n: int = 256, center=(0.0, 0.0), scale: float = 1.0) -> QuadratureMesh:
    """Pinched profile r(t) = sqrt(cos^2 t + sin^2 t / 4)."""

    def _r(t):
        return np.sqrt(0.625 + 0.375 * np.cos(2.0 * t))

    def _dr(t):
        return -0.375 * np.sin(2.0 * t) / _r(t)

    def _d2r(t):
        r = _r(t)
        dr = -0.375 * np.sin(2.0 * t) / r
        return (-0.75 * np.cos(2.0 * t) - dr * dr) / r

    return build_polar_shape(_r, n=n, dr_fn=_dr, d2r_fn=_d2r, center=center, scale=scale)


def build_kite(n: int = 256, center=(0.0, 0.0), scale: float = 1.0) -> QuadratureMesh:
    """Kite curve (0.6 cos t + 0.39 cos 2t + 0.01, 0.9 sin t)."""
    if scale <= 0.0:
        raise GeometryError("scale must be positive")
    cx, cy = float(center[0]), float(center[1])

    def pos(t):
        x = scale * (0.6 * np.cos(t) + 0.39 * np.cos(2.0 * t) + 0.01) + cx
        y = scale * 0.9 * np.sin(t) + cy
        return np.column_stack([x, y])

    def dpos(t):
        return np.column_stack(
            [
                scale * (-0.6 * np.sin(t) - 0.78 * np.sin(2.0 * t)),
                scale * 0.9 * np.cos(t),
            ]
        )

    def d2pos(t):
        return np.column_stack(
            [
                scale * (-0.6 * np.cos(t) - 1.56 * np.cos(2.0 * t)),
                scale * -0.9 * np.sin(t),
            ]
        )

    return from_parametrization(pos, n=n, derivative=dpos, second_derivative=d2pos)


# ---------------------------------------------------------------------------
# rounded polygons


def _polygon_pieces(vertices: np.ndarray, rounding: float):
    """Split a convex polygon boundary into straight segments and corner arcs.

    Returns a list of piece dicts in traversal order, starting just past
    vertex 0.  Raises if the rounding arcs would overlap or degenerate.
    """
    m = len(vertices)
    if m < 3:
        raise GeometryError("polygon needs at least 3 vertices")
    if rounding <= 0.0:
        raise GeometryError("rounding radius must be positive (sharp corners are not C^1)")
    edges = np.roll(vertices, -1, axis=0) - vertices
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    if lengths.min() <= 0.0:
        raise GeometryError("polygon has a zero-length edge")
    cross = edges[:, 0] * np.roll(edges[:, 1], -1) - edges[:, 1] * np.roll(edges[:, 0], -1)
    if np.all(cross < 0.0):
        return _polygon_pieces(vertices[::-1].copy(), rounding)
    if not np.all(cross > 0.0):
        raise GeometryError("polygon must be strictly convex")

    unit = edges / lengths[:, None]
    nxt = np.roll(unit, -1, axis=0)
    # turn angle at vertex k+1 lies between edge k and edge k+1
    ucross = unit[:, 0] * nxt[:, 1] - unit[:, 1] * nxt[:, 0]
    turn = np.arctan2(ucross, np.einsum("ij,ij->i", unit, nxt))
    trim = rounding * np.tan(0.5 * turn)  # cut-back distance along each edge
    trim_at = np.roll(trim, 1)  # trim at the start vertex of each edge
    if np.any(trim_at + trim >= lengths):
        raise GeometryError("rounding radius too large for an edge")

    pieces = []
    for k in range(m):
        a = vertices[k] + trim_at[k] * unit[k]
        b = vertices[(k + 1) % m] - trim[k] * unit[k]
        pieces.append(
            {"kind": "seg", "start": a, "dir": unit[k], "len": float(np.hypot(*(b - a)))}
        )
        # fillet arc at vertex k+1, swept counterclockwise by the turn angle
        # between edge k and edge k+1 (stored as turn[k])
        outward = np.array([unit[k][1], -unit[k][0]])  # outward normal of edge k
        centre = b - rounding * outward
        a0 = np.arctan2(b[1] - centre[1], b[0] - centre[0])
        pieces.append(
            {
                "kind": "arc",
                "centre": centre,
                "radius": rounding,
                "a0": float(a0),
                "len": rounding * float(turn[k]),
            }
        )
    return pieces


def build_rounded_polygon(
    vertices,
    rounding: float,
    n: int = 256,
    arc_oversample: float = 6.0,
) -> QuadratureMesh:
    """Mesh a convex polygon with circular fillets replacing each corner.

    The curve is parametrized by a smoothly graded arclength map so that
    nodes cluster on the fillet arcs (by roughly ``arc_oversample`` relative
    to the flat sides).  Curvature is exact piecewise: 1/rounding on arcs
    and 0 on the straight segments.
    """
    verts = _as_points(vertices)
    n = _check_node_count(n)
    pieces = _polygon_pieces(verts, float(rounding))
    lens = np.array([p["len"] for p in pieces])
    total = lens.sum()
    starts = np.concatenate([[0.0], np.cumsum(lens)[:-1]])

    # arc-centred Gaussian bumps in arclength raise the node density there
    arc_mid = np.array(
        [s + p["len"] / 2 for s, p in zip(starts, pieces) if p["kind"] == "arc"]
    )
    arc_len = np.array([p["len"] for p in pieces if p["kind"] == "arc"])
    sigma = 3.0 * arc_len

    def density(s):
        d = np.ones_like(s)
        for mid, sig in zip(arc_mid, sigma):
            u = np.abs(s - mid)
            u = np.minimum(u, total - u)
            d += (arc_oversample - 1.0) * np.exp(-0.5 * (u / sig) ** 2)
        return d

    # invert t(s) = 2*pi * cum_density / total_density on a fine grid
    from scipy.interpolate import PchipInterpolator

    fine = np.linspace(0.0, total, 32 * n + 1)
    rho = density(fine)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(fine))])
    t_of_s = TWO_PI * cum / cum[-1]
    s_of_t = PchipInterpolator(t_of_s, fine)
    t = TWO_PI * np.arange(n) / n
    s_nodes = np.asarray(s_of_t(t))
    ds_dt = cum[-1] / (TWO_PI * density(s_nodes))

    # evaluate the piecewise path at the graded arclength positions
    idx = np.clip(np.searchsorted(starts, s_nodes, side="right") - 1, 0, len(pieces) - 1)
    pts = np.empty((n, 2))
    tang = np.empty((n, 2))
    kappa = np.empty(n)
    for j in range(n):
        p = pieces[idx[j]]
        u = s_nodes[j] - starts[idx[j]]
        if p["kind"] == "seg":
            pts[j] = p["start"] + u * p["dir"]
            tang[j] = p["dir"]
            kappa[j] = 0.0
        else:
            ang = p["a0"] + u / p["radius"]
            pts[j] = p["centre"] + p["radius"] * np.array([np.cos(ang), np.sin(ang)])
            tang[j] = np.array([-np.sin(ang), np.cos(ang)])
            kappa[j] = 1.0 / p["radius"]

    normals = np.column_stack([tang[:, 1], -tang[:, 0]])
    return QuadratureMesh(
        points=pts,
        params=t,
        jacobian=ds_dt,
        weights=ds_dt * TWO_PI / n,
        normals=normals,
        curvature=kappa,
    )


def regular_polygon_vertices(sides: int, circumradius: float, phase: float | None = None) -> np.ndarray:
    if sides < 3:
        raise GeometryError("polygon needs at least 3 sides")
    if circumradius <= 0.0:
        raise GeometryError("circumradius must be positive")
    if phase is None:
        phase = np.pi / 2.0
    a = phase + TWO_PI * np.arange(sides) / sides
    return circumradius * np.column_stack([np.cos(a), np.sin(a)])


def build_regular_polygon(
    sides: int,
    circumradius: float,
    rounding: float | None = None,
    n: int = 256,
) -> QuadratureMesh:
    """Rounded regular polygon; default fillet radius is 1e-2 * circumradius."""
    if rounding is None:
        rounding = 1e-2 * circumradius
    return build_rounded_polygon(regular_polygon_vertices(sides, circumradius), rounding, n=n)


# ---------------------------------------------------------------------------
# point lists


def resample_closed_curve(points, n: int) -> np.ndarray:
    """Trigonometric resampling of closed-curve samples to n points."""
    pts = _as_points(points)
    m = len(pts)
    c = pts[:, 0] + 1j * pts[:, 1]
    chat = np.fft.fft(c) / m
    k_old = np.fft.fftfreq(m, 1.0 / m).astype(int)
    out = np.zeros(n, dtype=complex)
    k_new = np.fft.fftfreq(n, 1.0 / n).astype(int)
    lookup = {k: chat[i] for i, k in enumerate(k_old)}
    for i, k in enumerate(k_new):
        out[i] = lookup.get(k, 0.0)
    c_new = np.fft.ifft(out) * n
    return np.column_stack([c_new.real, c_new.imag])


def from_point_list(points, n: int | None = None) -> QuadratureMesh:
    """Mesh a closed curve given by sample points.

    The samples are taken as equispaced-parameter values of a smooth closed
    curve (trailing duplicate of the first point is dropped).  Clockwise
    input is reversed.  Derivatives come from the trigonometric interpolant.
    """
    pts = _as_points(points)
    if len(pts) > 1 and np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    if len(pts) < 16:
        raise GeometryError("point list needs at least 16 distinct points")
    x, y = pts[:, 0], pts[:, 1]
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    if area < 0.0:
        pts = pts[::-1].copy()
    if n is None:
        n = len(pts) if len(pts) % 2 == 0 else len(pts) + 1
    n = _check_node_count(n)
    if n != len(pts):
        pts = resample_closed_curve(pts, n)
    c = pts[:, 0] + 1j * pts[:, 1]
    cp, cpp = spectral_derivatives(c)
    t = TWO_PI * np.arange(n) / n
    return _mesh_from_complex(c, cp, cpp, t)


def translated(mesh: QuadratureMesh, offset) -> QuadratureMesh:
    """Rigid translation; all intrinsic quantities are unchanged."""
    off = np.asarray(offset, dtype=float)
    return dataclasses.replace(mesh, points=mesh.points + off[None, :])


# ---------------------------------------------------------------------------
# elliptic coordinates


@dataclass(frozen=True)
class EllipticFrame:
    """Confocal elliptic coordinates with foci at (+-l, 0).

    x1 = l cosh(xi) cos(eta), x2 = l sinh(xi) sin(eta), xi >= 0,
    eta in [0, 2pi).  The metric factor gamma = l sqrt(sinh^2 xi + sin^2 eta)
    converts between eta-parameter and arclength on a coordinate ellipse.
    """

    l: float

    def __post_init__(self):
        if self.l <= 0.0:
            raise GeometryError("focal half-distance must be positive")

    def to_cartesian(self, xi, eta) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        x1 = self.l * np.cosh(xi) * np.cos(eta)
        x2 = self.l * np.sinh(xi) * np.sin(eta)
        return np.stack(np.broadcast_arrays(x1, x2), axis=-1)

    def to_elliptic(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Inverse map; eta is reduced to [0, 2pi)."""
        pts = _as_points(points)
        w = (pts[:, 0] + 1j * pts[:, 1]) / self.l
        z = np.arccosh(w.astype(complex))
        xi = np.abs(z.real)
        eta = np.mod(np.where(z.real < 0.0, -z.imag, z.imag), TWO_PI)
        return xi, eta

    def metric(self, xi, eta) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        return self.l * np.sqrt(np.sinh(xi) ** 2 + np.sin(eta) ** 2)


def build_confocal_ellipse(frame: EllipticFrame, xi: float, n: int = 256) -> QuadratureMesh:
    """Coordinate ellipse xi = const of a confocal frame.

    The parameter is eta itself, so mesh.params can be fed straight into
    the elliptic harmonic basis functions.
    """
    if xi <= 0.0:
        raise GeometryError("coordinate ellipse requires xi > 0 (xi = 0 is the focal segment)")
    n = _check_node_count(n)
    a = frame.l * np.cosh(xi)
    b = frame.l * np.sinh(xi)
    eta = TWO_PI * np.arange(n) / n
    ce, se = np.cos(eta), np.sin(eta)
    gamma = np.sqrt((a * se) ** 2 + (b * ce) ** 2)  # equals frame.metric(xi, eta)
    return QuadratureMesh(
        points=np.column_stack([a * ce, b * se]),
        params=eta,
        jacobian=gamma,
        weights=gamma * TWO_PI / n,
        normals=np.column_stack([b * ce / gamma, a * se / gamma]),
        curvature=a * b / gamma**3,
    )
