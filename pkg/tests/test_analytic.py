import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helecloak import analytic, geometry, kernels
from helecloak.analytic import (
    AnnulusSpec,
    ConfocalSpec,
    DegenerateLayoutError,
)
from helecloak.geometry import GeometryError


class TestStrengths:
    def test_unit_annulus(self):
        spec = AnnulusSpec(1.0, 2.0)
        npt.assert_allclose(analytic.annulus_cloak_zeta(spec), 8.0 / 15.0, rtol=1e-15)
        npt.assert_allclose(analytic.annulus_shield_zeta(spec), 8.0 / 3.0, rtol=1e-15)

    def test_thin_annulus(self):
        spec = AnnulusSpec(100.0, 110.0)
        npt.assert_allclose(analytic.annulus_cloak_zeta(spec), 5.2143934496875675, rtol=1e-14)
        npt.assert_allclose(analytic.annulus_shield_zeta(spec), 11.523809523809524, rtol=1e-14)

    def test_confocal_pair(self):
        spec = ConfocalSpec(1.0, 0.5, 1.0)
        npt.assert_allclose(analytic.ellipse_cloak_zeta(spec, "x"), 0.5378828427399903, rtol=1e-14)
        npt.assert_allclose(analytic.ellipse_cloak_zeta(spec, "y"), 1.1639534137386527, rtol=1e-14)
        npt.assert_allclose(analytic.ellipse_shield_zeta(spec, "x"), 3.163953413738653, rtol=1e-14)

    def test_thin_confocal(self):
        spec = ConfocalSpec(1.0, 0.5, 0.7)
        npt.assert_allclose(analytic.ellipse_cloak_zeta(spec, "x"), 1.5389336082104417, rtol=1e-14)
        npt.assert_allclose(analytic.ellipse_cloak_zeta(spec, "y"), 3.330180635004127, rtol=1e-14)

    def test_shield_strength_is_parity_free(self):
        spec = ConfocalSpec(2.0, 0.4, 1.1, n=2)
        npt.assert_allclose(
            analytic.ellipse_shield_zeta(spec, "x"),
            analytic.ellipse_shield_zeta(spec, "y"),
            rtol=1e-14,
        )

    @settings(max_examples=50, deadline=None)
    @given(scale=st.floats(0.1, 10.0), ri=st.floats(0.5, 2.0), ratio=st.floats(1.5, 3.0))
    def test_annulus_strengths_scale_invariant(self, scale, ri, ratio):
        base = AnnulusSpec(ri, ri * ratio, n=2)
        scaled = AnnulusSpec(scale * ri, scale * ri * ratio, n=2)
        npt.assert_allclose(
            analytic.annulus_cloak_zeta(scaled), analytic.annulus_cloak_zeta(base), rtol=1e-12
        )
        npt.assert_allclose(
            analytic.annulus_shield_zeta(scaled), analytic.annulus_shield_zeta(base), rtol=1e-12
        )

    @settings(max_examples=30, deadline=None)
    @given(focal=st.floats(0.1, 10.0))
    def test_confocal_strengths_ignore_focal_length(self, focal):
        base = ConfocalSpec(1.0, 0.5, 1.0)
        other = ConfocalSpec(focal, 0.5, 1.0)
        npt.assert_allclose(
            analytic.ellipse_cloak_zeta(other, "y"),
            analytic.ellipse_cloak_zeta(base, "y"),
            rtol=1e-13,
        )


class TestValidation:
    def test_degenerate_annulus(self):
        with pytest.raises(DegenerateLayoutError):
            AnnulusSpec(1.0, 1.0 + 1e-7)
        with pytest.raises(DegenerateLayoutError):
            AnnulusSpec(2.0, 1.0)  # inverted

    def test_degenerate_confocal(self):
        with pytest.raises(DegenerateLayoutError):
            ConfocalSpec(1.0, 0.5, 0.5 + 1e-7)

    def test_bad_parameters(self):
        with pytest.raises(GeometryError):
            AnnulusSpec(-1.0, 2.0)
        with pytest.raises(ValueError):
            AnnulusSpec(1.0, 2.0, n=0)
        with pytest.raises(GeometryError):
            ConfocalSpec(0.0, 0.5, 1.0)
        with pytest.raises(GeometryError):
            ConfocalSpec(1.0, -0.5, 1.0)

    def test_mode_names(self):
        spec = AnnulusSpec(1.0, 2.0)
        with pytest.raises(ValueError):
            analytic.annulus_fields(spec, 0.0, [[3.0, 0.0]], mode="z")


class TestAnnulusFields:
    def _grid(self, radii, count=16):
        th = 2.0 * np.pi * np.arange(count) / count
        return np.concatenate(
            [np.column_stack([r * np.cos(th), r * np.sin(th)]) for r in radii]
        )

    def test_potential_ignores_slip(self):
        spec = AnnulusSpec(1.0, 2.0)
        pts = self._grid([1.5, 3.0])
        phi0, _ = analytic.annulus_fields(spec, 0.0, pts)
        phi1, _ = analytic.annulus_fields(spec, 1.3, pts)
        npt.assert_array_equal(phi0, phi1)

    def test_continuity_across_rim(self):
        spec = AnnulusSpec(1.0, 2.0, n=2)
        th = np.linspace(0.0, 2.0 * np.pi, 9)[:-1]
        inner = np.column_stack([2.0 * (1 - 1e-9) * np.cos(th), 2.0 * (1 - 1e-9) * np.sin(th)])
        outer = np.column_stack([2.0 * (1 + 1e-9) * np.cos(th), 2.0 * (1 + 1e-9) * np.sin(th)])
        _, p_in = analytic.annulus_fields(spec, 0.37, inner, mode="y")
        _, p_out = analytic.annulus_fields(spec, 0.37, outer, mode="y")
        npt.assert_allclose(p_in, p_out, atol=1e-6)

    @pytest.mark.parametrize("n", [1, 2])
    def test_perfect_cloak_restores_background(self, n):
        spec = AnnulusSpec(1.0, 2.0, n=n)
        zeta = analytic.annulus_cloak_zeta(spec)
        pts = self._grid([2.5, 4.0, 7.0])
        _, p = analytic.annulus_fields(spec, zeta, pts)
        r = np.hypot(pts[:, 0], pts[:, 1])
        th = np.arctan2(pts[:, 1], pts[:, 0])
        npt.assert_allclose(p, 12.0 * r**n * np.cos(n * th), atol=1e-12)

    def test_perfect_shield_nulls_shell_pressure(self):
        spec = AnnulusSpec(1.0, 2.0)
        zeta = analytic.annulus_shield_zeta(spec)
        pts = self._grid([1.1, 1.5, 1.9])
        _, p = analytic.annulus_fields(spec, zeta, pts)
        npt.assert_allclose(p, 0.0, atol=1e-12)

    def test_nan_inside_object(self):
        spec = AnnulusSpec(1.0, 2.0)
        phi, p = analytic.annulus_fields(spec, 0.5, [[0.2, 0.1], [1.5, 0.0]])
        assert np.isnan(phi[0]) and np.isnan(p[0])
        assert np.isfinite(phi[1]) and np.isfinite(p[1])

    def test_custom_amplitudes(self):
        spec = AnnulusSpec(1.0, 2.0)
        pts = self._grid([3.0])
        _, p_default = analytic.annulus_fields(spec, 0.4, pts, amp_h=2.0)
        _, p_explicit = analytic.annulus_fields(spec, 0.4, pts, amp_h=2.0, amp_p=24.0)
        npt.assert_array_equal(p_default, p_explicit)


class TestEllipseFields:
    def test_perfect_cloak_restores_background(self):
        spec = ConfocalSpec(2.0, 0.5, 1.0)
        zeta = analytic.ellipse_cloak_zeta(spec, "y")
        frame = spec.frame
        eta = np.array([0.2, 1.3, 2.9, 4.4])
        pts = np.array([frame.to_cartesian(1.6, e) for e in eta])
        _, p = analytic.ellipse_fields(spec, zeta, pts, mode="y")
        npt.assert_allclose(p, 12.0 * np.sinh(1.6) * np.sin(eta), atol=1e-12)

    def test_perfect_shield_nulls_shell_pressure(self):
        spec = ConfocalSpec(2.0, 0.5, 1.0)
        zeta = analytic.ellipse_shield_zeta(spec)
        frame = spec.frame
        eta = np.array([0.2, 1.3, 2.9, 4.4])
        pts = np.array([frame.to_cartesian(0.75, e) for e in eta])
        _, p = analytic.ellipse_fields(spec, zeta, pts, mode="x")
        npt.assert_allclose(p, 0.0, atol=1e-12)

    def test_nan_inside_object(self):
        spec = ConfocalSpec(2.0, 0.5, 1.0)
        phi, p = analytic.ellipse_fields(spec, 0.5, [[0.0, 0.0], [4.0, 0.0]])
        assert np.isnan(phi[0]) and np.isnan(p[0])
        assert np.isfinite(phi[1]) and np.isfinite(p[1])


class TestDensityClosedForms:
    # the density formulas must reproduce the fields through the layer
    # representation phi = bg + S_i[phi_hat], p = bg + S_i[psi_i] + S_e[psi_e]

    def test_annulus_reconstruction(self):
        spec = AnnulusSpec(1.0, 2.0, n=2)
        zeta0, amp = 0.37, 1.4
        mi = geometry.build_circle(1.0, n=128)
        me = geometry.build_circle(2.0, n=128)
        phi_hat, psi_i, psi_e = analytic.annulus_densities(
            spec, zeta0, mi.params, me.params, mode="y", amp_h=amp
        )
        pts = np.array([[1.5, 0.3], [0.2, 1.45], [3.1, -1.0], [-2.6, 2.6]])
        r = np.hypot(pts[:, 0], pts[:, 1])
        th = np.arctan2(pts[:, 1], pts[:, 0])
        bg = r**2 * np.sin(2 * th)
        phi_rec = amp * bg + kernels.potential(mi, phi_hat, pts)
        p_rec = (
            12.0 * amp * bg
            + kernels.potential(mi, psi_i, pts)
            + kernels.potential(me, psi_e, pts)
        )
        phi, p = analytic.annulus_fields(spec, zeta0, pts, mode="y", amp_h=amp)
        npt.assert_allclose(phi_rec, phi, atol=1e-12)
        npt.assert_allclose(p_rec, p, atol=1e-12)

    def test_ellipse_reconstruction(self):
        spec = ConfocalSpec(2.0, 0.5, 1.0)
        zeta0 = 0.8
        frame = spec.frame
        mi = geometry.build_confocal_ellipse(frame, 0.5, n=128)
        me = geometry.build_confocal_ellipse(frame, 1.0, n=128)
        phi_hat, psi_i, psi_e = analytic.ellipse_densities(
            spec, zeta0, mi.params, me.params, mode="x"
        )
        eta = np.array([0.4, 2.2, 3.9])
        pts = np.vstack(
            [[frame.to_cartesian(0.75, e) for e in eta], [frame.to_cartesian(1.5, e) for e in eta]]
        )
        xi, eta_all = frame.to_elliptic(pts)
        bg = np.cosh(xi) * np.cos(eta_all)
        phi_rec = bg + kernels.potential(mi, phi_hat, pts)
        p_rec = (
            12.0 * bg
            + kernels.potential(mi, psi_i, pts)
            + kernels.potential(me, psi_e, pts)
        )
        phi, p = analytic.ellipse_fields(spec, zeta0, pts, mode="x")
        npt.assert_allclose(phi_rec, phi, atol=1e-12)
        npt.assert_allclose(p_rec, p, atol=1e-12)
