"""End-to-end acceptance checks.

One test per shipped claim, each printing a single PASS line with the
observed numbers (visible with pytest -s).  Tolerances are stated inline;
reference values come from separation-of-variables closed forms or from
hand-computed chains, never from the solver under test.
"""

import time

import numpy as np
import numpy.testing as npt
import pytest

from helecloak import analytic, cli, design, geometry, kernels, solver
from helecloak.analytic import AnnulusSpec, ConfocalSpec
from helecloak.design import DesignProblem, dimensionalize_zeta
from helecloak.geometry import EllipticFrame
from helecloak.solver import BackgroundField, CloakConfig, uniform_flow_background

N = 256
VOLTS_PER_UNIT = -0.24011299435028247  # reference-device scale, checked in test_design


def report(num, detail):
    print(f"[criterion {num:02d}] PASS {detail}")


def rel(a, b):
    return abs(a - b) / abs(b)


# -- shared expensive fixtures ----------------------------------------------


@pytest.fixture(scope="module")
def general_cloaks():
    """Optimized cloak designs for the four non-symmetric presets."""
    rim = geometry.build_circle(2.0, n=N)
    bg = uniform_flow_background()
    shapes = {
        "flower": geometry.build_flower(n=N),
        "kite": geometry.build_kite(n=N),
        "peanut": geometry.build_peanut(n=N),
        "rounded-triangle": geometry.build_regular_polygon(3, 1.0, 0.2, n=N),
    }
    out = {}
    for name, mesh in shapes.items():
        problem = DesignProblem([mesh], rim, bg, "cloak")
        result = problem.certify(problem.optimize())
        out[name] = (mesh, rim, bg, problem, result)
    return out


# -- criteria ----------------------------------------------------------------


def test_criterion_01_circular_shell_voltages(capsys):
    start = time.perf_counter()
    spec = AnnulusSpec(1.0, 2.0)  # 100 um object in a 200 um shell, rescaled
    shield_v = dimensionalize_zeta(analytic.annulus_shield_zeta(spec))
    cloak_v = dimensionalize_zeta(analytic.annulus_cloak_zeta(spec))
    elapsed = time.perf_counter() - start

    assert rel(shield_v, -0.64) <= 0.01
    assert rel(cloak_v, -0.128) <= 0.01

    code = cli.main(["analytic", "--shape", "annulus", "--mode", "shield", "--ri", "1", "--re", "2"])
    out_shield = capsys.readouterr().out
    assert code == 0 and "-0.6403 V" in out_shield
    code = cli.main(["analytic", "--shape", "annulus", "--mode", "cloak", "--ri", "1", "--re", "2"])
    out_cloak = capsys.readouterr().out
    assert code == 0 and "-0.1281 V" in out_cloak
    assert elapsed < 1.0

    report(1, f"shield {shield_v:.4f} V, cloak {cloak_v:.4f} V in {elapsed * 1e3:.1f} ms")


def test_criterion_02_confocal_shell_voltages():
    start = time.perf_counter()
    spec = ConfocalSpec(1.0, 0.5, 1.0)
    shield_x = dimensionalize_zeta(analytic.ellipse_shield_zeta(spec, "x"))
    shield_y = dimensionalize_zeta(analytic.ellipse_shield_zeta(spec, "y"))
    cloak_x = dimensionalize_zeta(analytic.ellipse_cloak_zeta(spec, "x"))
    cloak_y = dimensionalize_zeta(analytic.ellipse_cloak_zeta(spec, "y"))
    elapsed = time.perf_counter() - start

    npt.assert_allclose(shield_x, shield_y, rtol=1e-14)  # parity-independent
    assert rel(shield_x, -0.7593) <= 0.005
    assert rel(cloak_x, -0.1291) <= 0.005
    assert rel(cloak_y, -0.2793) <= 0.005
    assert elapsed < 1.0

    report(2, f"shield {shield_x:.4f} V, cloak ({cloak_x:.4f}, {cloak_y:.4f}) V")


def test_criterion_03_thin_shell_voltages():
    thin_disk = dimensionalize_zeta(analytic.annulus_cloak_zeta(AnnulusSpec(100.0, 110.0)))
    assert rel(thin_disk, -1.2515) <= 0.001

    spec = ConfocalSpec(1.0, 0.5, 0.7)
    thin_x = dimensionalize_zeta(analytic.ellipse_cloak_zeta(spec, "x"))
    thin_y = dimensionalize_zeta(analytic.ellipse_cloak_zeta(spec, "y"))
    assert rel(thin_x, -0.3693) <= 0.002
    assert rel(thin_y, -0.7992) <= 0.002

    report(3, f"thin disk {thin_disk:.4f} V, thin ellipse ({thin_x:.4f}, {thin_y:.4f}) V")


def test_criterion_04_solver_matches_closed_forms():
    rng = np.random.default_rng(42)

    # circular layout
    start = time.perf_counter()
    disk = geometry.build_circle(1.0, n=N)
    rim = geometry.build_circle(2.0, n=N)
    bg = uniform_flow_background()
    electro = solver.solve_electrostatic([disk], bg)
    ang = rng.uniform(0.0, 2.0 * np.pi, 20)
    rad = np.concatenate([rng.uniform(1.3, 1.7, 10), rng.uniform(2.4, 5.0, 10)])
    pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    spec = AnnulusSpec(1.0, 2.0)
    zetas = [analytic.annulus_cloak_zeta(spec), analytic.annulus_shield_zeta(spec)]
    zetas += list(rng.uniform(-2.0, 3.0, 5))
    worst_disk = 0.0
    for z in zetas:
        sol = solver.solve_pressure(CloakConfig([disk], rim, z), bg, electro)
        _, p_exact = analytic.annulus_fields(spec, z, pts)
        err = np.abs(sol.evaluator.value(pts) - p_exact).max() / np.abs(p_exact).max()
        worst_disk = max(worst_disk, err)
        assert err <= 1e-6
    t_disk = time.perf_counter() - start
    assert t_disk < 10.0

    # confocal layout
    start = time.perf_counter()
    frame = EllipticFrame(2.0)
    obj = geometry.build_confocal_ellipse(frame, 0.5, n=N)
    ctrl = geometry.build_confocal_ellipse(frame, 1.0, n=N)
    bg_e = BackgroundField(n=1, parity="cos", frame=frame)
    electro_e = solver.solve_electrostatic([obj], bg_e)
    xi = np.concatenate([rng.uniform(0.62, 0.88, 10), rng.uniform(1.12, 2.0, 10)])
    eta = rng.uniform(0.0, 2.0 * np.pi, 20)
    pts_e = frame.to_cartesian(xi, eta)
    spec_e = ConfocalSpec(2.0, 0.5, 1.0)
    zetas_e = [analytic.ellipse_cloak_zeta(spec_e, "x"), analytic.ellipse_shield_zeta(spec_e)]
    zetas_e += list(rng.uniform(-2.0, 3.0, 5))
    worst_ell = 0.0
    for z in zetas_e:
        sol = solver.solve_pressure(CloakConfig([obj], ctrl, z), bg_e, electro_e)
        _, p_exact = analytic.ellipse_fields(spec_e, z, pts_e, mode="x")
        err = np.abs(sol.evaluator.value(pts_e) - p_exact).max() / np.abs(p_exact).max()
        worst_ell = max(worst_ell, err)
        assert err <= 1e-6
    t_ell = time.perf_counter() - start
    assert t_ell < 10.0

    report(4, f"worst rel err disk {worst_disk:.2e}, ellipse {worst_ell:.2e} "
              f"({t_disk:.2f} s / {t_ell:.2f} s)")


def test_criterion_05_optimizer_recovery():
    disk = geometry.build_circle(1.0, n=N)
    rim = geometry.build_circle(2.0, n=N)
    bg = uniform_flow_background()
    spec = AnnulusSpec(1.0, 2.0)

    cloak = design.optimize_zeta([disk], rim, bg, "cloak", certified=False)
    assert rel(cloak.zeta0_opt, analytic.annulus_cloak_zeta(spec)) <= 1e-6
    assert cloak.cost <= 1e-10
    shield = design.optimize_zeta([disk], rim, bg, "shield", certified=False)
    assert rel(shield.zeta0_opt, analytic.annulus_shield_zeta(spec)) <= 1e-6
    assert shield.cost <= 1e-10

    frame = EllipticFrame(2.0)
    obj = geometry.build_confocal_ellipse(frame, 0.5, n=N)
    ctrl = geometry.build_confocal_ellipse(frame, 1.0, n=N)
    bg_y = BackgroundField(n=1, parity="sin", frame=frame)
    spec_e = ConfocalSpec(2.0, 0.5, 1.0)
    e_cloak = design.optimize_zeta([obj], ctrl, bg_y, "cloak", certified=False)
    assert rel(e_cloak.zeta0_opt, analytic.ellipse_cloak_zeta(spec_e, "y")) <= 1e-6
    assert e_cloak.cost <= 1e-10
    e_shield = design.optimize_zeta([obj], ctrl, bg_y, "shield", certified=False)
    assert rel(e_shield.zeta0_opt, analytic.ellipse_shield_zeta(spec_e)) <= 1e-6
    assert e_shield.cost <= 1e-10

    # hand-computed chain for the unit annulus: rim misfit 4.8 cos(t),
    # slip response 0.75 cos(t) (cloak); sealed flux 24 cos(t) (shield)
    assert 4.8 / (12.0 * 0.75) == pytest.approx(analytic.annulus_cloak_zeta(spec), rel=1e-14)
    assert 24.0 / (12.0 * 0.75) == pytest.approx(analytic.annulus_shield_zeta(spec), rel=1e-14)

    report(5, f"disk ({cloak.zeta0_opt:.12f}, {shield.zeta0_opt:.12f}), "
              f"ellipse ({e_cloak.zeta0_opt:.12f}, {e_shield.zeta0_opt:.12f})")


def test_criterion_06_operator_identities():
    circle = geometry.build_circle(1.0, n=N)
    t = circle.params
    K = kernels.np_star(circle)
    k_err = max(np.abs(K @ np.cos(t)).max(), np.abs(K @ np.sin(t)).max())
    assert k_err <= 1e-8

    # S[e^{it}] two-branch closed form: -(r/2) e^{it} inside, -(1/2r) e^{it} outside
    s_err = 0.0
    for r in (0.45, 3.0):
        ang = np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False)
        pts = np.column_stack([r * np.cos(ang), r * np.sin(ang)])
        factor = -0.5 * (r if r < 1.0 else 1.0 / r)
        for dens, exact in ((np.cos(t), factor * np.cos(ang)), (np.sin(t), factor * np.sin(ang))):
            s_err = max(s_err, np.abs(kernels.potential(circle, dens, pts) - exact).max())
    assert s_err <= 1e-8

    frame = EllipticFrame(2.0)
    xi0 = 0.5
    ell = geometry.build_confocal_ellipse(frame, xi0, n=N)
    Ke = kernels.np_star(ell)
    np_err = 0.0
    for k in (1, 2, 3):
        for parity, sign in (("cos", 1.0), ("sin", -1.0)):
            phi = kernels.elliptic_basis(frame, xi0, k, parity, ell)
            lam = sign * np.exp(-2.0 * k * xi0) / 2.0
            np_err = max(np_err, np.abs(Ke @ phi - lam * phi).max() / np.abs(phi).max())
    assert np_err <= 1e-8

    report(6, f"K* {k_err:.2e}, S two-branch {s_err:.2e}, ellipse NP {np_err:.2e}")


def test_criterion_07_shield_kills_force_and_shell_pressure():
    disk = geometry.build_circle(1.0, n=N)
    rim = geometry.build_circle(2.0, n=N)
    bg = uniform_flow_background()
    zeta = analytic.annulus_shield_zeta(AnnulusSpec(1.0, 2.0))
    config = CloakConfig([disk], rim, zeta)
    sol = solver.solve_pressure(config, bg)

    f = design.force(config, sol)
    f_norm = float(np.hypot(*f))
    f_tol = 1e-8 * 12.0 * disk.perimeter
    assert f_norm <= f_tol

    ang = np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False)
    shell_pts = np.concatenate(
        [np.column_stack([r * np.cos(ang), r * np.sin(ang)]) for r in (1.2, 1.5, 1.8)]
    )
    p_shell = np.abs(sol.evaluator.value(shell_pts)).max()
    assert p_shell <= 1e-8

    report(7, f"|F| {f_norm:.2e} (tol {f_tol:.2e}), sup shell |p| {p_shell:.2e}")


def test_criterion_08_certified_cloaking_of_general_shapes(general_cloaks):
    details = []
    for name, (mesh, rim, bg, problem, result) in general_cloaks.items():
        probes = problem.default_probes()
        electro = solver.solve_electrostatic([mesh], bg)
        p_bg = bg.pressure(probes)

        at_opt = solver.solve_pressure(CloakConfig([mesh], rim, result.zeta0_opt), bg, electro)
        sup_opt = np.abs(at_opt.evaluator.value(probes) - p_bg).max()
        at_zero = solver.solve_pressure(CloakConfig([mesh], rim, 0.0), bg, electro)
        sup_zero = np.abs(at_zero.evaluator.value(probes) - p_bg).max()

        assert sup_opt <= result.bound, f"{name}: bound violated"
        assert sup_zero >= 10.0 * sup_opt, f"{name}: improvement below 10x"
        details.append(f"{name} {sup_zero / sup_opt:.0f}x (bound margin "
                       f"{result.bound / sup_opt:.1f}x)")
    report(8, "; ".join(details))


def test_criterion_09_two_cell_cloaking():
    zeta = analytic.annulus_cloak_zeta(AnnulusSpec(1.0, 2.0))  # single-cell strength
    centers = [(-2.1, 0.0), (2.1, 0.0)]
    objs = [geometry.build_circle(1.0, center=c, n=N) for c in centers]
    shells = [geometry.build_circle(2.0, center=c, n=N) for c in centers]
    bg = uniform_flow_background()
    electro = solver.solve_electrostatic(objs, bg)

    ang = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    probes = np.column_stack([5.0 * np.cos(ang), 5.0 * np.sin(ang)])
    p_bg = bg.pressure(probes)

    bare = solver.solve_pressure(CloakConfig(objs, shells, 0.0), bg, electro)
    cloaked = solver.solve_pressure(CloakConfig(objs, shells, zeta), bg, electro)
    d_bare = bare.evaluator.value(probes) - p_bg
    d_cloak = cloaked.evaluator.value(probes) - p_bg

    sup_ratio = np.abs(d_bare).max() / np.abs(d_cloak).max()
    l2_ratio = np.linalg.norm(d_bare) / np.linalg.norm(d_cloak)
    assert sup_ratio >= 10.0
    assert l2_ratio >= 10.0

    report(9, f"deviation reduced {sup_ratio:.1f}x (sup), {l2_ratio:.1f}x (L2)")


def test_criterion_10_convexity_and_stability(general_cloaks):
    disk = geometry.build_circle(1.0, n=N)
    rim = geometry.build_circle(2.0, n=N)
    bg = uniform_flow_background()
    problems = {
        "disk-cloak": DesignProblem([disk], rim, bg, "cloak"),
        "disk-shield": DesignProblem([disk], rim, bg, "shield"),
    }
    for name, (_, _, _, problem, _) in general_cloaks.items():
        problems[name] = problem

    worst_resid = 0.0
    zs = np.array([-2.0, -0.7, 0.4, 1.3, 2.6])
    for name, problem in problems.items():
        cs = np.array([problem.cost(z) for z in zs])
        coeffs = np.polyfit(zs, cs, 2)
        resid = np.abs(np.polyval(coeffs, zs) - cs).max() / cs.max()
        worst_resid = max(worst_resid, resid)
        assert resid <= 1e-9, f"{name}: parabola residual {resid:.2e}"

    # stability: 1e-6 relative rim perturbation, for the symmetric and one
    # general layout
    delta = 1e-6
    rim_moved = geometry.build_circle(2.0 * (1.0 + delta), n=N)
    moves = []
    for shape_name, mesh in (("disk", disk), ("kite", geometry.build_kite(n=N))):
        base = DesignProblem([mesh], rim, bg, "cloak").optimize()
        moved = DesignProblem([mesh], rim_moved, bg, "cloak").optimize()
        move = rel(moved.zeta0_opt, base.zeta0_opt)
        moves.append(f"{shape_name} {move:.2e}")
        assert move <= 1e-4

    report(10, f"worst parabola residual {worst_resid:.2e}; zeta* moves {', '.join(moves)}")
