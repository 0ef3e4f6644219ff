"""Coupled potential/pressure solver on arbitrary smooth layouts.

The electric potential is represented by single layers on the object
boundaries; the depth-averaged pressure by single layers on the objects
plus one on the control boundary, whose density is pinned by the slip
condition (12 * zeta0 times the potential's normal flux).  Collocation
uses the product quadrature from `kernels`; each solved-for density
carries a mean-zero constraint row so the represented fields decay at
infinity.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve

from . import kernels
from .geometry import EllipticFrame, QuadratureMesh, _as_points

log = logging.getLogger(__name__)

COND_LIMIT = 1e12


class SolverError(RuntimeError):
    """Numerical failure: ill-conditioned or inconsistent collocation system."""


# ---------------------------------------------------------------------------
# background fields


def _cheb_t_and_u(u: np.ndarray, n: int):
    """Chebyshev T_n and U_{n-1} by recurrence, for complex argument."""
    t_prev, t_cur = np.ones_like(u), u
    u_prev, u_cur = np.ones_like(u), 2.0 * u
    if n == 0:
        return t_prev, np.zeros_like(u)
    for _ in range(n - 1):
        t_prev, t_cur = t_cur, 2.0 * u * t_cur - t_prev
        u_prev, u_cur = u_cur, 2.0 * u * u_cur - u_prev
    return t_cur, u_prev


@dataclass(frozen=True)
class BackgroundField:
    """Harmonic driving pair (H, P) of matching angular symmetry.

    With no frame the pair is polar, H = amp_h * Re/Im (x1 + i x2)^n; with
    an elliptic frame it is H = amp_h * cosh/sinh(n xi) cos/sin(n eta),
    realized as the Chebyshev polynomial T_n(z / l) so it is defined on
    the whole plane.  parity 'cos' drives along x1, 'sin' along x2.
    The pressure amplitude defaults to the coupling amp_p = 12 * amp_h.
    """

    n: int = 1
    parity: str = "cos"
    amp_h: float = 1.0
    amp_p: float | None = None
    frame: EllipticFrame | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"mode order must be >= 1, got {self.n}")
        if self.parity not in ("cos", "sin"):
            raise ValueError(f"parity must be 'cos' or 'sin', got {self.parity!r}")

    @property
    def pressure_amp(self) -> float:
        return 12.0 * self.amp_h if self.amp_p is None else self.amp_p

    def _holomorphic(self, points):
        pts = _as_points(points)
        z = pts[:, 0] + 1j * pts[:, 1]
        if self.frame is None:
            f = z**self.n
            df = self.n * z ** (self.n - 1)
        else:
            u = z / self.frame.l
            t, u_aux = _cheb_t_and_u(u, self.n)
            f = t
            df = self.n * u_aux / self.frame.l
        return f, df

    def _value_grad(self, points, amp):
        f, df = self._holomorphic(points)
        if self.parity == "cos":
            val = amp * f.real
            grad = amp * np.column_stack([df.real, -df.imag])
        else:
            val = amp * f.imag
            grad = amp * np.column_stack([df.imag, df.real])
        return val, grad

    def potential(self, points) -> np.ndarray:
        return self._value_grad(points, self.amp_h)[0]

    def potential_gradient(self, points) -> np.ndarray:
        return self._value_grad(points, self.amp_h)[1]

    def pressure(self, points) -> np.ndarray:
        return self._value_grad(points, self.pressure_amp)[0]

    def pressure_gradient(self, points) -> np.ndarray:
        return self._value_grad(points, self.pressure_amp)[1]


def uniform_flow_background(amp_h: float = 1.0, amp_p: float | None = None) -> BackgroundField:
    """Unit driving along x1: H = amp_h * x1."""
    return BackgroundField(n=1, parity="cos", amp_h=amp_h, amp_p=amp_p)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class CloakConfig:
    """Objects inside control shells, plus the slip strength.

    `exterior` is either one control boundary enclosing every object, or a
    list with one shell per object (side-by-side cloaking cells).
    """

    objects: list[QuadratureMesh]
    exterior: QuadratureMesh | list[QuadratureMesh]
    zeta0: float = 0.0

    def __post_init__(self):
        if not self.objects:
            raise ValueError("at least one object curve is required")
        if isinstance(self.exterior, QuadratureMesh):
            for i, obj in enumerate(self.objects):
                if np.any(self.exterior.winding_number(obj.points) != 1):
                    raise ValueError(f"object {i} is not strictly inside the control boundary")
                if np.any(kernels.near_field_violation(self.exterior, obj.points)):
                    raise ValueError(f"object {i} runs into the control boundary's near-field band")
        else:
            self.exterior = list(self.exterior)
            if len(self.exterior) != len(self.objects):
                raise ValueError("per-object shells: need exactly one shell per object")
            for i, (obj, shell) in enumerate(zip(self.objects, self.exterior)):
                if np.any(shell.winding_number(obj.points) != 1):
                    raise ValueError(f"object {i} is not strictly inside its shell")
                if np.any(kernels.near_field_violation(shell, obj.points)):
                    raise ValueError(f"object {i} runs into shell {i}'s near-field band")
            for i, shell in enumerate(self.exterior):
                for j, other in enumerate(self.exterior):
                    if j <= i:
                        continue
                    if np.any(shell.winding_number(other.points) != 0) or np.any(
                        kernels.near_field_violation(shell, other.points)
                    ):
                        raise ValueError(f"shells {i} and {j} overlap or nearly touch")
                for j, obj in enumerate(self.objects):
                    if j != i and (
                        np.any(shell.winding_number(obj.points) != 0)
                        or np.any(kernels.near_field_violation(shell, obj.points))
                    ):
                        raise ValueError(f"object {j} intrudes into shell {i}")
        for i in range(len(self.objects)):
            for j in range(i + 1, len(self.objects)):
                a, b = self.objects[i], self.objects[j]
                if np.any(a.winding_number(b.points) != 0) or np.any(
                    kernels.near_field_violation(a, b.points)
                ):
                    raise ValueError(f"objects {i} and {j} overlap or nearly touch")

    @property
    def shells(self) -> list[QuadratureMesh]:
        return self.exterior if isinstance(self.exterior, list) else [self.exterior]

    def region(self, points) -> np.ndarray:
        """1 in the slip shell, 0 outside the control boundary, -1 inside objects."""
        pts = _as_points(points)
        out = np.zeros(len(pts), dtype=int)
        for shell in self.shells:
            out = np.where(shell.winding_number(pts) == 1, 1, out)
        for obj in self.objects:
            out = np.where(obj.winding_number(pts) == 1, -1, out)
        return out

    def zeta_mean(self, points) -> np.ndarray:
        """Mean slip coefficient: zeta0 in the shell, 0 elsewhere."""
        return np.where(self.region(points) == 1, self.zeta0, 0.0)


# ---------------------------------------------------------------------------
# densities and field evaluation


@dataclass
class Density:
    """Nodal single-layer density on one curve."""

    mesh: QuadratureMesh
    values: np.ndarray
    mean_zero: bool = True

    @property
    def weighted_mean(self) -> float:
        return float(self.mesh.weights @ self.values)


class FieldEvaluator:
    """Background plus a sum of single-layer potentials (plus a constant).

    Evaluation is only supported outside the near-field band of every
    carrying curve; `boundary_value` gives the continuous trace on one of
    the carrying curves itself.
    """

    def __init__(self, layers, background=None, constant=0.0, label=""):
        self.layers = list(layers)
        self.background = background  # (value_fn, gradient_fn) pair or None
        self.constant = float(constant)
        self.label = label

    def value(self, points) -> np.ndarray:
        pts = _as_points(points)
        out = np.full(len(pts), self.constant)
        if self.background is not None:
            out += self.background[0](pts)
        for d in self.layers:
            out += kernels.potential(d.mesh, d.values, pts)
        return out

    def gradient(self, points) -> np.ndarray:
        pts = _as_points(points)
        out = np.zeros((len(pts), 2))
        if self.background is not None:
            out += self.background[1](pts)
        for d in self.layers:
            out += kernels.potential_gradient(d.mesh, d.values, pts)
        return out

    def boundary_value(self, mesh: QuadratureMesh) -> np.ndarray:
        """Trace on one of the carried curves (single layers are continuous)."""
        if not any(d.mesh is mesh for d in self.layers):
            raise ValueError("mesh does not carry any density of this field")
        out = np.full(mesh.n, self.constant)
        if self.background is not None:
            out += self.background[0](mesh.points)
        for d in self.layers:
            if d.mesh is mesh:
                out += kernels.single_layer(d.mesh) @ d.values
            else:
                out += kernels.single_layer(d.mesh, mesh) @ d.values
        return out


# ---------------------------------------------------------------------------
# dense linear algebra with conditioning guard


def _solve_guarded(A: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    anorm = np.linalg.norm(A, 1)
    try:
        lu, piv = lu_factor(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - pathological input
        raise SolverError(f"{what}: factorization failed: {exc}") from exc
    (gecon,) = get_lapack_funcs(("gecon",), (A,))
    rcond, info = gecon(lu, anorm)
    if info != 0 or rcond == 0.0 or not np.isfinite(rcond):
        raise SolverError(f"{what}: condition estimate failed (info={info})")
    cond = 1.0 / rcond
    log.info("%s: n=%d cond~%.3e", what, A.shape[0], cond)
    if cond > COND_LIMIT:
        raise SolverError(f"{what}: system too ill-conditioned (cond ~ {cond:.3e})")
    return lu_solve((lu, piv), rhs)


def _block_neumann_solve(meshes, rhs_blocks, extra_rhs_label):
    """Solve (1/2 I + K*) on each curve with cross coupling and one
    mean-zero Lagrange row per density."""
    sizes = [m.n for m in meshes]
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    ntot = offs[-1]
    k = len(meshes)
    A = np.zeros((ntot + k, ntot + k))
    rhs = np.zeros(ntot + k)
    for i, mi in enumerate(meshes):
        si = slice(offs[i], offs[i + 1])
        A[si, si] = 0.5 * np.eye(mi.n) + kernels.np_star(mi)
        for j, mj in enumerate(meshes):
            if i != j:
                A[si, offs[j] : offs[j + 1]] = kernels.normal_derivative_matrix(mj, mi)
        A[si, ntot + i] = 1.0
        A[ntot + i, si] = mi.weights
        rhs[si] = rhs_blocks[i]
    sol = _solve_guarded(A, rhs, extra_rhs_label)
    parts = [sol[offs[i] : offs[i + 1]] for i in range(k)]
    multipliers = sol[ntot:]
    if np.abs(multipliers).max() > 1e-6 * max(1.0, np.abs(rhs).max()):
        log.warning("%s: large mean-zero multipliers %s", extra_rhs_label, multipliers)
    return parts


# ---------------------------------------------------------------------------
# solves


@dataclass
class ElectroSolution:
    densities: list[Density]
    evaluator: FieldEvaluator
    background: BackgroundField

    def normal_flux_on(self, mesh: QuadratureMesh) -> np.ndarray:
        """d(potential)/d nu at the nodes of a non-carrying curve."""
        grad = self.background.potential_gradient(mesh.points)
        out = np.einsum("ij,ij->i", grad, mesh.normals)
        for d in self.densities:
            out += kernels.normal_derivative_matrix(d.mesh, mesh) @ d.values
        return out


def solve_electrostatic(objects, background: BackgroundField) -> ElectroSolution:
    """Insulating objects in the harmonic driving potential.

    Solves (1/2 I + K*) phi_hat = -dH/dnu per object with cross-coupling,
    the exterior Neumann condition for phi = H + sum S[phi_hat].
    """
    objects = list(objects)
    rhs = []
    for m in objects:
        g = background.potential_gradient(m.points)
        rhs.append(-np.einsum("ij,ij->i", g, m.normals))
    parts = _block_neumann_solve(objects, rhs, "electrostatic")
    densities = [Density(m, v) for m, v in zip(objects, parts)]
    evaluator = FieldEvaluator(
        densities,
        background=(background.potential, background.potential_gradient),
        label="potential",
    )
    return ElectroSolution(densities, evaluator, background)


@dataclass
class PressureSolution:
    densities: list[Density]  # objects first, control-boundary densities last
    evaluator: FieldEvaluator
    background: BackgroundField
    zeta0: float


def solve_pressure(
    config: CloakConfig,
    background: BackgroundField,
    electro: ElectroSolution | None = None,
) -> PressureSolution:
    """Pressure with the slip-driven jump across the control boundaries.

    Each control-boundary density is 12 * zeta0 * dphi/dnu (known once the
    potential is solved); the object densities enforce the no-penetration
    condition.
    """
    if electro is None:
        electro = solve_electrostatic(config.objects, background)
    shell_densities = []
    for shell in config.shells:
        psi = 12.0 * config.zeta0 * electro.normal_flux_on(shell)
        # the flux integral vanishes analytically; drop the numerical residue
        # so the represented field decays cleanly
        psi -= (shell.weights @ psi) / shell.perimeter
        shell_densities.append(Density(shell, psi))

    rhs = []
    for m in config.objects:
        g = background.pressure_gradient(m.points)
        r = -np.einsum("ij,ij->i", g, m.normals)
        for d in shell_densities:
            r -= kernels.normal_derivative_matrix(d.mesh, m) @ d.values
        rhs.append(r)
    parts = _block_neumann_solve(config.objects, rhs, "pressure")
    densities = [Density(m, v) for m, v in zip(config.objects, parts)]
    densities.extend(shell_densities)
    evaluator = FieldEvaluator(
        densities,
        background=(background.pressure, background.pressure_gradient),
        label="pressure",
    )
    return PressureSolution(densities, evaluator, background, config.zeta0)


@dataclass
class BoundaryValueSolution:
    densities: list[Density]
    evaluator: FieldEvaluator
    background: BackgroundField

    def flux_on_exterior(self, side: str) -> np.ndarray:
        raise NotImplementedError


@dataclass
class MixedSolution(BoundaryValueSolution):
    """Interior mixed problem: no-penetration on objects, data on the shell rim."""

    def flux_on_exterior(self, side: str = "-") -> np.ndarray:
        """d p / d nu on the control boundary, from the shell side."""
        ext = self.densities[-1].mesh
        out = kernels.jump_normal_derivative(ext, self.densities[-1].values, side)
        for d in self.densities[:-1]:
            out += kernels.normal_derivative_matrix(d.mesh, ext) @ d.values
        return out


@dataclass
class DirichletSolution(BoundaryValueSolution):
    """Exterior problem: zero trace on the control boundary, background at infinity."""

    def flux_on_exterior(self, side: str = "+") -> np.ndarray:
        ext = self.densities[-1].mesh
        g = self.background.pressure_gradient(ext.points)
        out = np.einsum("ij,ij->i", g, ext.normals)
        out += kernels.jump_normal_derivative(ext, self.densities[-1].values, side)
        return out


def solve_interior_mixed(objects, exterior: QuadratureMesh, background: BackgroundField) -> MixedSolution:
    """Pressure in the shell alone: dp/dnu = 0 on objects, p = P on the rim.

    Representation: single layers on all curves plus a free constant, with
    a mean-zero constraint on the rim density (keeps the one-matrix solve
    uniquely solvable regardless of the rim's logarithmic capacity).
    """
    objects = list(objects)
    meshes = objects + [exterior]
    sizes = [m.n for m in meshes]
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    ntot = offs[-1]
    A = np.zeros((ntot + 1, ntot + 1))
    rhs = np.zeros(ntot + 1)

    for i, mi in enumerate(objects):
        si = slice(offs[i], offs[i + 1])
        A[si, si] = 0.5 * np.eye(mi.n) + kernels.np_star(mi)
        for j, mj in enumerate(meshes):
            if mj is not mi:
                A[si, offs[j] : offs[j + 1]] = kernels.normal_derivative_matrix(mj, mi)
        # constant column contributes nothing to a normal derivative
    se = slice(offs[-2], offs[-1])
    for j, mj in enumerate(objects):
        A[se, offs[j] : offs[j + 1]] = kernels.single_layer(mj, exterior)
    A[se, se] = kernels.single_layer(exterior)
    A[se, ntot] = 1.0
    A[ntot, se] = exterior.weights
    rhs[se] = background.pressure(exterior.points)

    sol = _solve_guarded(A, rhs, "interior-mixed")
    densities = [
        Density(m, sol[offs[i] : offs[i + 1]], mean_zero=False) for i, m in enumerate(meshes)
    ]
    evaluator = FieldEvaluator(densities, constant=float(sol[ntot]), label="pressure")
    return MixedSolution(densities, evaluator, background)


def solve_exterior_dirichlet(exterior: QuadratureMesh, background: BackgroundField) -> DirichletSolution:
    """Pressure outside a sealed control region: p = 0 on the rim, p -> P far away."""
    n = exterior.n
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = kernels.single_layer(exterior)
    A[:n, n] = 1.0
    A[n, :n] = exterior.weights
    rhs = np.zeros(n + 1)
    rhs[:n] = -background.pressure(exterior.points)
    sol = _solve_guarded(A, rhs, "exterior-dirichlet")
    densities = [Density(exterior, sol[:n])]
    evaluator = FieldEvaluator(
        densities,
        background=(background.pressure, background.pressure_gradient),
        constant=float(sol[n]),
        label="pressure",
    )
    return DirichletSolution(densities, evaluator, background)


# ---------------------------------------------------------------------------
# derived quantities


def evaluate_velocity(
    pressure_eval: FieldEvaluator,
    potential_eval: FieldEvaluator,
    config: CloakConfig,
    points,
) -> np.ndarray:
    """Depth-averaged velocity u = -grad p / 12 - zeta_mean grad phi."""
    pts = _as_points(points)
    u = -pressure_eval.gradient(pts) / 12.0
    zeta = config.zeta_mean(pts)
    active = zeta != 0.0
    if np.any(active):
        u[active] -= zeta[active, None] * potential_eval.gradient(pts[active])
    return u


def field_grid(
    config: CloakConfig,
    potential_eval: FieldEvaluator,
    pressure_eval: FieldEvaluator,
    window,
    resolution,
):
    """Sample phi, p and u on a rectangular grid.

    Returns a dict of flat row-major arrays (x2 varies slowest).  Points
    inside an object or within the near-field band of any curve are
    masked: mask = 1 and NaN fields.
    """
    x1min, x1max, x2min, x2max = map(float, window)
    nx, ny = map(int, resolution)
    if nx < 2 or ny < 2:
        raise ValueError("grid resolution must be at least 2 x 2")
    if not (x1max > x1min and x2max > x2min):
        raise ValueError("window must have positive extent")
    xs = np.linspace(x1min, x1max, nx)
    ys = np.linspace(x2min, x2max, ny)
    X, Y = np.meshgrid(xs, ys)  # row-major: x2 slowest
    pts = np.column_stack([X.ravel(), Y.ravel()])

    masked = np.zeros(len(pts), dtype=bool)
    for mesh in [*config.objects, *config.shells]:
        masked |= kernels.near_field_violation(mesh, pts)
    # winding is evaluated only off-curve; on-curve points are already masked
    clear = ~masked
    if np.any(clear):
        for obj in config.objects:
            inside = obj.winding_number(pts[clear]) == 1
            masked[np.flatnonzero(clear)[inside]] = True

    phi = np.full(len(pts), np.nan)
    p = np.full(len(pts), np.nan)
    u = np.full((len(pts), 2), np.nan)
    good = ~masked
    if np.any(good):
        phi[good] = potential_eval.value(pts[good])
        p[good] = pressure_eval.value(pts[good])
        u[good] = evaluate_velocity(pressure_eval, potential_eval, config, pts[good])
    return {
        "x1": pts[:, 0],
        "x2": pts[:, 1],
        "phi": phi,
        "p": p,
        "u1": u[:, 0],
        "u2": u[:, 1],
        "mask": masked.astype(int),
        "shape": (ny, nx),
    }


def force(config: CloakConfig, pressure: PressureSolution, object_index: int = 0) -> np.ndarray:
    """Net pressure force on one object, F = -closed-integral p nu ds."""
    mesh = config.objects[object_index]
    pvals = pressure.evaluator.boundary_value(mesh)
    return -np.array(
        [
            float(np.sum(pvals * mesh.normals[:, 0] * mesh.weights)),
            float(np.sum(pvals * mesh.normals[:, 1] * mesh.weights)),
        ]
    )
