"""Closed-form solutions for radially and confocally symmetric layouts.

For a disk or a confocal ellipse inside a matching control boundary the
coupled potential/pressure system separates, giving explicit slip-layer
strengths that either cancel the exterior pressure disturbance (cloak)
or null the pressure in the shell (shield), together with the fields and
layer densities themselves.  These are the oracles the Nystrom solver is
validated against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import EllipticFrame, GeometryError, _as_points

# relative shell thickness below which the layout counts as degenerate
DEGENERACY_THRESHOLD = 1e-6


class DegenerateLayoutError(ValueError):
    """Shell too thin (or inverted) for the closed forms to be meaningful."""


def _normalize_mode(mode: str) -> str:
    aliases = {"x": "x", "cos": "x", "y": "y", "sin": "y"}
    try:
        return aliases[mode]
    except KeyError:
        raise ValueError(f"mode must be one of {sorted(aliases)}, got {mode!r}") from None


@dataclass(frozen=True)
class AnnulusSpec:
    """Disk of radius ``ri`` centred in a circular control boundary ``re``."""

    ri: float
    re: float
    n: int = 1

    def __post_init__(self):
        if self.ri <= 0.0:
            raise GeometryError(f"inner radius must be positive, got {self.ri}")
        if self.n < 1:
            raise ValueError(f"mode order must be >= 1, got {self.n}")
        if (self.re - self.ri) / self.re < DEGENERACY_THRESHOLD:
            raise DegenerateLayoutError(
                f"shell {self.ri}..{self.re} is degenerate (relative gap below {DEGENERACY_THRESHOLD})"
            )


@dataclass(frozen=True)
class ConfocalSpec:
    """Coordinate ellipse xi_i inside the confocal control ellipse xi_e."""

    l: float
    xi_i: float
    xi_e: float
    n: int = 1

    def __post_init__(self):
        if self.l <= 0.0:
            raise GeometryError(f"focal half-distance must be positive, got {self.l}")
        if self.xi_i <= 0.0:
            raise GeometryError(f"inner coordinate must be positive, got {self.xi_i}")
        if self.n < 1:
            raise ValueError(f"mode order must be >= 1, got {self.n}")
        if self.xi_e - self.xi_i < DEGENERACY_THRESHOLD:
            raise DegenerateLayoutError(
                f"confocal shell {self.xi_i}..{self.xi_e} is degenerate "
                f"(gap below {DEGENERACY_THRESHOLD})"
            )

    @property
    def frame(self) -> EllipticFrame:
        return EllipticFrame(self.l)


# ---------------------------------------------------------------------------
# slip-layer strengths


def annulus_cloak_zeta(spec: AnnulusSpec) -> float:
    """Strength cancelling the exterior pressure disturbance of the disk."""
    ri2n = spec.ri ** (2 * spec.n)
    re2n = spec.re ** (2 * spec.n)
    return 2.0 * ri2n * re2n / (re2n**2 - ri2n**2)


def annulus_shield_zeta(spec: AnnulusSpec) -> float:
    """Strength nulling the pressure (hence the flow) inside the shell."""
    ri2n = spec.ri ** (2 * spec.n)
    re2n = spec.re ** (2 * spec.n)
    return 2.0 * re2n / (re2n - ri2n)


def _ellipse_q(spec: ConfocalSpec, mode: str) -> float:
    """Shared bracket sinh/cosh(n xi_e) - e^{n(xi_i - xi_e)} sinh/cosh(n xi_i).

    The two parities give the same number, which is why the shield strength
    does not depend on the background orientation.
    """
    n = spec.n
    fn = np.sinh if mode == "x" else np.cosh
    return float(fn(n * spec.xi_e) - np.exp(n * (spec.xi_i - spec.xi_e)) * fn(n * spec.xi_i))


def ellipse_cloak_zeta(spec: ConfocalSpec, mode: str = "x") -> float:
    mode = _normalize_mode(mode)
    n = spec.n
    fn = np.sinh if mode == "x" else np.cosh
    q = _ellipse_q(spec, mode)
    return float(fn(n * spec.xi_i) / (q * np.cosh(n * (spec.xi_e - spec.xi_i))))


def ellipse_shield_zeta(spec: ConfocalSpec, mode: str = "x") -> float:
    mode = _normalize_mode(mode)
    return float(np.exp(spec.n * spec.xi_e) / _ellipse_q(spec, mode))


# ---------------------------------------------------------------------------
# fields


def _polar(points):
    pts = _as_points(points)
    r = np.hypot(pts[:, 0], pts[:, 1])
    th = np.arctan2(pts[:, 1], pts[:, 0])
    return r, th


def annulus_fields(
    spec: AnnulusSpec,
    zeta0: float,
    points,
    mode: str = "x",
    amp_h: float = 1.0,
    amp_p: float | None = None,
):
    """Potential and pressure of the annular layout at the given points.

    Returns (phi, p); NaN inside the disk.  ``amp_p`` defaults to the
    standard coupling 12 * amp_h.
    """
    mode = _normalize_mode(mode)
    if amp_p is None:
        amp_p = 12.0 * amp_h
    n, ri, re = spec.n, spec.ri, spec.re
    r, th = _polar(points)
    trig = np.cos(n * th) if mode == "x" else np.sin(n * th)

    with np.errstate(divide="ignore", invalid="ignore"):
        neumann = r**n + ri ** (2 * n) / r**n  # d/dr vanishes at ri
        phi = amp_h * neumann * trig
        p = amp_p * neumann * trig
        # slip-driven correction, linear in zeta0
        shell = -(6.0 / re ** (2 * n)) * (re ** (2 * n) - ri ** (2 * n)) * neumann
        ext = -(6.0 / re ** (2 * n)) * (re ** (4 * n) - ri ** (4 * n)) / r**n
        p = p + amp_h * zeta0 * np.where(r <= re, shell, ext) * trig

    inside = r < ri
    phi[inside] = np.nan
    p[inside] = np.nan
    return phi, p


def ellipse_fields(
    spec: ConfocalSpec,
    zeta0: float,
    points,
    mode: str = "x",
    amp_h: float = 1.0,
    amp_p: float | None = None,
):
    """Potential and pressure of the confocal layout; NaN inside the object."""
    mode = _normalize_mode(mode)
    if amp_p is None:
        amp_p = 12.0 * amp_h
    n = spec.n
    xi, eta = spec.frame.to_elliptic(points)
    trig = np.cos(n * eta) if mode == "x" else np.sin(n * eta)
    q = _ellipse_q(spec, mode)

    if mode == "x":
        neumann = np.cosh(n * xi) + np.exp(n * spec.xi_i) * np.sinh(n * spec.xi_i) * np.exp(-n * xi)
    else:
        neumann = np.sinh(n * xi) + np.exp(n * spec.xi_i) * np.cosh(n * spec.xi_i) * np.exp(-n * xi)
    phi = amp_h * neumann * trig
    p = amp_p * neumann * trig

    shell = -(12.0 / np.exp(n * spec.xi_e)) * q * neumann
    ext = (
        -12.0
        * q
        * np.cosh(n * (spec.xi_e - spec.xi_i))
        * np.exp(n * spec.xi_i)
        * np.exp(-n * xi)
    )
    p = p + amp_h * zeta0 * np.where(xi <= spec.xi_e, shell, ext) * trig

    inside = xi < spec.xi_i
    phi = np.where(inside, np.nan, phi)
    p = np.where(inside, np.nan, p)
    return phi, p


# ---------------------------------------------------------------------------
# layer densities (nodal closed forms, for validating the solver)


def annulus_densities(spec: AnnulusSpec, zeta0: float, theta_i, theta_e, mode: str = "x",
                      amp_h: float = 1.0, amp_p: float | None = None):
    """Closed-form single-layer densities (phi_hat, psi_i, psi_e).

    ``theta_i`` / ``theta_e`` are polar angles of the nodes on the object
    and control circles.
    """
    mode = _normalize_mode(mode)
    if amp_p is None:
        amp_p = 12.0 * amp_h
    n, ri, re = spec.n, spec.ri, spec.re
    trig = np.cos if mode == "x" else np.sin
    c_shell = amp_p - amp_h * zeta0 * 6.0 * (re ** (2 * n) - ri ** (2 * n)) / re ** (2 * n)
    phi_hat = -amp_h * 2.0 * n * ri ** (n - 1) * trig(n * np.asarray(theta_i))
    psi_i = -2.0 * n * ri ** (n - 1) * c_shell * trig(n * np.asarray(theta_i))
    psi_e = (
        12.0 * zeta0 * amp_h * n * (re ** (n - 1) - ri ** (2 * n) / re ** (n + 1))
        * trig(n * np.asarray(theta_e))
    )
    return phi_hat, psi_i, psi_e


def ellipse_densities(spec: ConfocalSpec, zeta0: float, eta_i, eta_e, mode: str = "x",
                      amp_h: float = 1.0, amp_p: float | None = None):
    """Closed-form densities for the confocal layout, metric-weighted."""
    from .kernels import elliptic_basis

    mode = _normalize_mode(mode)
    if amp_p is None:
        amp_p = 12.0 * amp_h
    n = spec.n
    parity = "cos" if mode == "x" else "sin"
    q = _ellipse_q(spec, mode)
    ratio = np.tanh(n * spec.xi_i) if mode == "x" else 1.0 / np.tanh(n * spec.xi_i)
    beta_i = elliptic_basis(spec.frame, spec.xi_i, n, parity, np.asarray(eta_i))
    beta_e = elliptic_basis(spec.frame, spec.xi_e, n, parity, np.asarray(eta_e))

    phi_hat = -amp_h * n * np.exp(n * spec.xi_i) * ratio * beta_i
    c_shell = amp_p - 12.0 * amp_h * zeta0 * q * np.exp(-n * spec.xi_e)
    psi_i = -n * np.exp(n * spec.xi_i) * ratio * c_shell * beta_i
    psi_e = 12.0 * zeta0 * amp_h * n * q * beta_e
    return phi_hat, psi_i, psi_e
