"""Tangent-flow analysis tools, anchored by an independent quadrature.

The first class re-derives the Gaussian-density values by brute-force 2-D
integration over the swept surface, with no Bessel reduction, and pins
the closed-form implementation against it.  Everything downstream
(monotonicity, rescaling, cone decomposition) is tested on exactly
solvable circle flows and on line/hyperbola fixtures whose limits are
known by construction.
"""
import math

import numpy as np
import pytest

from lagflow.analysis import (
    angle_spectrum,
    cone_decomposition,
    gaussian_density,
    local_density_ratio,
    monotonicity_check,
    normalized_rescaling,
    polar_profile,
    quadrant_monotonicity,
    rescale_flow,
)
from lagflow.flow import (
    FlowState,
    RadialProfile,
    Trajectory,
    TrajectoryRangeError,
)
from lagflow.geometry import CurveConfigError, PlaneCurve
from lagflow.scenarios import line_pair_curve, x_cone_curve


def circle(n=256, rho=2.0, center=(0.0, 0.0)):
    u = 2 * np.pi * np.arange(n) / n
    pts = np.column_stack([rho * np.cos(u), rho * np.sin(u)])
    return PlaneCurve(pts + np.asarray(center))


def single_line(phi=0.3, L=12.0, n=2048):
    # a full line through the origin, nodes half-offset so none sits at 0
    u = -L + (np.arange(n) + 0.5) * (2 * L / n)
    e = np.array([math.cos(phi), math.sin(phi)])
    return PlaneCurve(np.outer(u, e), closed=False)


def hyperbola_pair(b=0.1, L=3.0, per_branch=401):
    # both branches of y^2 - x^2 = b^2: the exact special-Lagrangian
    # fixture, theta = pi/2 identically (mod pi)
    x = np.linspace(-L, L, per_branch)
    up = np.column_stack([x, np.sqrt(x * x + b * b)])
    dn = np.column_stack([x, -np.sqrt(x * x + b * b)])[::-1]
    return PlaneCurve(np.vstack([up, dn]), closed=False)


def circle_trajectory(rho0=2.0, t_grid=None, n=128):
    """Exact shrinking-circle records rho(t) = sqrt(rho0^2 - 4t)."""
    if t_grid is None:
        t_grid = np.linspace(0.0, 0.8, 33)
    c = rho0 * rho0 / 2.0
    states = [
        FlowState(
            curve=circle(n, rho=math.sqrt(rho0 * rho0 - 4.0 * t)),
            t=float(t),
            initial_constant=c,
            step_index=i,
        )
        for i, t in enumerate(t_grid)
    ]
    return Trajectory(
        states=states,
        diagnostics={"t": np.asarray(t_grid, float)},
        initial_constant=c,
    )


# ---------------------------------------------------------------------------
# independent density quadrature (no Bessel reduction anywhere)
# ---------------------------------------------------------------------------


def quadrature_density(z, speed, u, x0, tau, closed, n_alpha=512):
    """Theta by direct 2-D integration over the swept surface.

    Surface element |gamma| |gamma'| du d(alpha); the (u, alpha) chart
    covers the surface twice for a full antipodal curve, hence the 1/2.
    """
    x0c = complex(x0[0], x0[1])
    r2 = np.abs(z) ** 2 + abs(x0c) ** 2
    cross = 2.0 * np.real(z * np.conj(x0c))
    alpha = 2 * np.pi * np.arange(n_alpha) / n_alpha
    expo = -(r2[:, None] - np.outer(cross, np.cos(alpha))) / (4.0 * tau)
    f_u = (np.abs(z) * speed) * np.exp(expo).mean(axis=1) * 2 * np.pi
    if closed:
        du = u[1] - u[0]
        total = f_u.sum() * du  # periodic trapezoid
    else:
        from scipy.integrate import simpson

        total = simpson(f_u, x=u)
    return total / (8.0 * np.pi * tau)


class TestGaussianDensityOracle:
    def test_self_similar_circle_against_quadrature_and_closed_form(self):
        # circle of radius 2 at tau = 1: both routes must give 2*pi/e
        n = 2048
        s = 2 * np.pi * np.arange(n) / n
        z = 2.0 * np.exp(1j * s)
        quad = quadrature_density(z, np.full(n, 2.0), s, (0.0, 0.0), 1.0, closed=True)
        assert quad == pytest.approx(2 * math.pi / math.e, rel=1e-9)
        code = gaussian_density(circle(1024, rho=2.0), (0.0, 0.0), T=1.0, t=0.0)
        assert code.value == pytest.approx(quad, rel=1e-6)

    def test_off_center_point_matches_quadrature(self):
        # nonzero base point exercises the Bessel reduction proper
        n = 2048
        s = 2 * np.pi * np.arange(n) / n
        z = 2.0 * np.exp(1j * s)
        x0 = (0.3, -0.2)
        tau = 0.7
        quad = quadrature_density(
            z, np.full(n, 2.0), s, x0, tau, closed=True, n_alpha=1024
        )
        code = gaussian_density(circle(1024, rho=2.0), x0, T=tau, t=0.0)
        assert code.value == pytest.approx(quad, rel=1e-6)

    def test_static_line_has_unit_density(self):
        # one Lagrangian plane through the base point: density exactly 1
        phi, L, n = 0.3, 12.0, 4097
        u = np.linspace(-L, L, n)
        z = u * np.exp(1j * phi)
        quad = quadrature_density(
            z, np.ones(n), u, (0.0, 0.0), 1.0, closed=False, n_alpha=64
        )
        assert quad == pytest.approx(1.0, rel=1e-6)
        code = gaussian_density(single_line(phi), (0.0, 0.0), T=1.0, t=0.0)
        assert code.value == pytest.approx(1.0, rel=1e-4)

    def test_transverse_line_pair_has_density_two(self):
        code = gaussian_density(x_cone_curve(2048, truncation=12.0), (0.0, 0.0), T=1.0, t=0.0)
        assert code.value == pytest.approx(2.0, rel=1e-4)

    def test_density_constant_along_self_similar_flow(self):
        # rho(t) = sqrt(4 - 4t) with T = 1 keeps rho^2 = 4*tau, the
        # equality case of the monotonicity formula
        for t in (0.0, 0.3, 0.6, 0.9):
            rho = math.sqrt(4.0 - 4.0 * t)
            smp = gaussian_density(circle(1024, rho=rho), (0.0, 0.0), T=1.0, t=t)
            assert smp.value == pytest.approx(2 * math.pi / math.e, rel=1e-6)

    def test_far_point_sees_nothing(self):
        smp = gaussian_density(circle(256, rho=2.0), (40.0, 0.0), T=1.0, t=0.0)
        assert smp.value < 1e-12

    def test_time_past_reference_rejected(self):
        with pytest.raises(ValueError):
            gaussian_density(circle(64), (0.0, 0.0), T=1.0, t=1.0)
        with pytest.raises(ValueError):
            gaussian_density(circle(64), (0.0, 0.0), T=1.0, t=1.5)


class TestMonotonicityCheck:
    def test_self_similar_flow_is_flat(self):
        traj = circle_trajectory(rho0=2.0, n=256)
        rep = monotonicity_check(traj, (0.0, 0.0), T=1.0)
        assert rep.passed
        assert rep.max_increase < 1e-6
        assert np.all(np.abs(rep.values - 2 * math.pi / math.e) < 1e-5)

    def test_cutoff_skips_late_records(self):
        traj = circle_trajectory(rho0=2.0, n=128)
        rep = monotonicity_check(traj, (0.0, 0.0), T=1.0, t_max=0.5)
        assert rep.times.max() < 0.5

    def test_artificial_growth_flagged(self):
        # a curve family that grows violates the decay law
        t_grid = [0.0, 0.5]
        states = [
            FlowState(curve=circle(128, rho=1.0), t=0.0, initial_constant=0.5, step_index=0),
            FlowState(curve=circle(128, rho=1.99), t=0.5, initial_constant=0.5, step_index=1),
        ]
        traj = Trajectory(
            states=states,
            diagnostics={"t": np.asarray(t_grid)},
            initial_constant=0.5,
        )
        rep = monotonicity_check(traj, (0.0, 0.0), T=1.0)
        assert not rep.passed
        assert rep.max_increase > 0.1


class TestLocalDensityRatio:
    def test_line_through_center_is_one(self):
        ratio = local_density_ratio(single_line(0.3, n=512), (0.0, 0.0), delta=0.5)
        assert ratio.value == pytest.approx(1.0, abs=1e-9)
        assert not ratio.under_resolved

    def test_circle_arc_matches_geometry(self):
        # length of the circle of radius a inside B_delta(p), p on the
        # circle: 4a*asin(delta/(2a))
        a, delta = 2.0, 0.3
        c = circle(4096, rho=a)
        ratio = local_density_ratio(c, (a, 0.0), delta=delta)
        exact = 4 * a * math.asin(delta / (2 * a)) / (2 * delta)
        assert ratio.value == pytest.approx(exact, rel=1e-4)

    def test_far_center_is_zero(self):
        ratio = local_density_ratio(circle(128, rho=2.0), (10.0, 0.0), delta=0.5)
        assert ratio.value == 0.0

    def test_under_resolved_flagged(self):
        ratio = local_density_ratio(circle(64, rho=2.0), (2.0, 0.0), delta=0.1)
        assert ratio.under_resolved

    def test_bad_delta_rejected(self):
        with pytest.raises(ValueError):
            local_density_ratio(circle(64), (0.0, 0.0), delta=0.0)


class TestRescaleFlow:
    def test_self_similar_circle_is_scale_invariant(self):
        traj = circle_trajectory(rho0=2.0, t_grid=np.linspace(0.0, 0.99, 199), n=128)
        views = rescale_flow(traj, (0.0, 0.0), T=1.0, scales=[2.0, 4.0, 8.0], s=-1.0)
        assert len(views) == 3
        for view in views:
            radii = np.linalg.norm(view.curve.points, axis=1)
            assert np.max(np.abs(radii - 2.0)) < 5e-3
            assert view.curve.closed

    def test_out_of_range_scale_names_offender(self):
        traj = circle_trajectory(rho0=2.0, t_grid=np.linspace(0.0, 0.9, 19), n=128)
        with pytest.raises(TrajectoryRangeError, match="sigma=32"):
            rescale_flow(traj, (0.0, 0.0), T=1.0, scales=[2.0, 32.0], s=-1.0)

    def test_tiny_window_rejected(self):
        traj = circle_trajectory(rho0=2.0, t_grid=np.linspace(0.0, 0.9, 19), n=128)
        with pytest.raises(CurveConfigError):
            rescale_flow(
                traj, (0.0, 0.0), T=1.0, scales=[2.0], s=-1.0, window=1e-3
            )


class TestNormalizedRescaling:
    def test_unit_constant_circle_is_a_fixed_point(self):
        # c = 1 circle has rho0 = sqrt(2); e^s * rho(t(s)) = sqrt(2) for
        # every s, the stationary point of the normalized flow
        traj = circle_trajectory(
            rho0=math.sqrt(2.0), t_grid=np.linspace(0.0, 0.48, 193), n=128
        )
        for s in (0.0, 0.5, 1.5):
            frame = normalized_rescaling(traj, (0.0, 0.0), s)
            radii = np.linalg.norm(frame.points, axis=1)
            assert np.max(np.abs(radii - math.sqrt(2.0))) < 5e-3

    def test_horizon_raises_range_error(self):
        traj = circle_trajectory(
            rho0=math.sqrt(2.0), t_grid=np.linspace(0.0, 0.48, 97), n=128
        )
        with pytest.raises(TrajectoryRangeError):
            normalized_rescaling(traj, (0.0, 0.0), s=3.0)

    def test_wrong_constant_rejected(self):
        traj = circle_trajectory(rho0=2.0, n=128)  # c = 2
        with pytest.raises(CurveConfigError):
            normalized_rescaling(traj, (0.0, 0.0), s=0.5)


class TestConeDecomposition:
    def test_transverse_pair_gives_two_clean_lines(self):
        dec = cone_decomposition(x_cone_curve(1024, truncation=10.0), R=1.0)
        assert len(dec.components) == 2
        dirs = sorted(c.direction for c in dec.components)
        assert dirs[0] == pytest.approx(math.pi / 4, abs=1e-6)
        assert dirs[1] == pytest.approx(3 * math.pi / 4, abs=1e-6)
        for comp in dec.components:
            assert comp.angle_spread < 1e-6
            assert abs(comp.mean_doubled_angle - (-1.0)) < 1e-6
            assert comp.residual < 1e-9

    def test_rotated_pair_follows_phi(self):
        phi = 0.3
        dec = cone_decomposition(line_pair_curve(1024, phi=phi), R=1.0)
        dirs = sorted(c.direction for c in dec.components)
        assert dirs[0] == pytest.approx(phi, abs=1e-6)
        assert dirs[1] == pytest.approx(phi + math.pi / 2, abs=1e-6)

    def test_single_line_is_one_component(self):
        dec = cone_decomposition(single_line(0.3, n=512), R=1.0)
        assert len(dec.components) == 1
        assert dec.components[0].direction == pytest.approx(0.3, abs=1e-6)

    def test_closed_survivor_has_no_direction(self):
        dec = cone_decomposition(circle(256, rho=2.0), R=2.5)
        assert len(dec.components) == 1
        comp = dec.components[0]
        assert math.isnan(comp.direction)
        assert comp.mass == pytest.approx(4 * math.pi, rel=1e-4)

    def test_curve_missing_core_gives_nothing(self):
        dec = cone_decomposition(circle(256, rho=2.0), R=1.0)
        assert dec.components == ()

    def test_hyperbola_pair_splits_at_apexes(self):
        # The exact minimal fixture: both branches of y^2 - x^2 = b^2 have
        # constant angle (pi/2 mod pi) and apex distance b; the split at
        # the two apex minima must produce exactly the two asymptote
        # directions, each carrying half the mass.
        dec = cone_decomposition(hyperbola_pair(b=0.1), R=1.0)
        assert len(dec.components) == 2
        dirs = sorted(c.direction for c in dec.components)
        assert dirs[0] == pytest.approx(math.pi / 4, abs=0.03)
        assert dirs[1] == pytest.approx(3 * math.pi / 4, abs=0.03)
        masses = [c.mass for c in dec.components]
        assert masses[0] == pytest.approx(masses[1], rel=0.05)
        for comp in dec.components:
            assert comp.angle_spread < 0.05
            assert abs(comp.mean_doubled_angle - (-1.0)) < 0.1
            assert comp.residual < 0.05


class TestAngleSpectrum:
    def test_total_is_first_radial_moment(self):
        spec = angle_spectrum(circle(512, rho=2.0))
        assert spec.total == pytest.approx(math.pi * 2.0 * 4 * math.pi, rel=1e-6)
        assert spec.mass.sum() == pytest.approx(spec.total, rel=1e-12)

    def test_circle_spectrum_is_flat(self):
        # theta = 2s + pi/2 sweeps the angle circle twice at constant
        # speed, so every bin receives the same mass.  The half-node phase
        # offset keeps node angles off the bin edges, where assignment
        # would be a rounding coin-flip.
        n = 720
        u = 2 * np.pi * (np.arange(n) + 0.5) / n
        c = PlaneCurve(np.column_stack([2 * np.cos(u), 2 * np.sin(u)]))
        spec = angle_spectrum(c, bins=36)
        expected = spec.total / 36
        assert np.max(np.abs(spec.mass - expected)) < 0.05 * expected

    def test_line_concentrates_in_antipodal_bins(self):
        spec = angle_spectrum(single_line(0.3, n=512), bins=36)
        order = np.argsort(spec.mass)[::-1]
        top_mass = spec.mass[order[:2]].sum()
        assert top_mass > 0.99 * spec.total

    def test_x_cone_bins(self):
        # theta is pi/2 on one line and 3*pi/2 on the other (mod 2*pi)
        spec = angle_spectrum(x_cone_curve(512), bins=36)
        idx = np.nonzero(spec.mass > 1e-9)[0]
        assert len(idx) <= 4
        centers = (spec.edges[:-1] + spec.edges[1:]) / 2
        hit = centers[spec.mass > 0.2 * spec.total]
        assert len(hit) == 2

    def test_too_few_bins_rejected(self):
        with pytest.raises(CurveConfigError):
            angle_spectrum(circle(64), bins=4)


class TestQuadrantMonotonicity:
    @staticmethod
    def ellipse_profile(n=128, a=3.0, b=2.0):
        s = 2 * np.pi * np.arange(n) / n
        return a * b / np.sqrt(b**2 * np.cos(s) ** 2 + a**2 * np.sin(s) ** 2)

    def test_axis_aligned_ellipse_passes(self):
        rep = quadrant_monotonicity(self.ellipse_profile())
        assert rep.passed
        assert rep.worst_violation <= 1e-6 * 3.0

    def test_circle_passes(self):
        rep = quadrant_monotonicity(np.full(64, 2.0))
        assert rep.passed

    def test_bump_in_first_quadrant_fails(self):
        r = self.ellipse_profile().copy()
        # the bump must beat the profile's own decrement (~0.036 per node
        # here) before the difference turns positive
        r[5] += 0.08  # strictly inside (0, pi/2)
        rep = quadrant_monotonicity(r)
        assert not rep.passed
        assert rep.worst_violation > 0.03

    def test_boundary_straddling_exempt(self):
        # n not divisible by 4 leaves differences across quadrant corners;
        # they must not be scored
        n = 66
        s = 2 * np.pi * np.arange(n) / n
        r = 6.0 / np.sqrt(4 * np.cos(s) ** 2 + 9 * np.sin(s) ** 2)
        rep = quadrant_monotonicity(r)
        assert rep.passed


class TestPolarProfile:
    def test_ellipse_profile_recovered(self):
        n = 256
        u = 2 * np.pi * np.arange(n) / n
        curve = PlaneCurve(np.column_stack([3 * np.cos(u), 2 * np.sin(u)]))
        prof = polar_profile(curve, samples=n)
        s = 2 * np.pi * np.arange(n) / n
        exact = 6.0 / np.sqrt(4 * np.cos(s) ** 2 + 9 * np.sin(s) ** 2)
        assert np.max(np.abs(prof.r - exact)) < 1e-5

    def test_orientation_irrelevant(self):
        n = 128
        u = 2 * np.pi * np.arange(n) / n
        pts = np.column_stack([3 * np.cos(u), 2 * np.sin(u)])
        fw = polar_profile(PlaneCurve(pts), samples=64)
        bw = polar_profile(PlaneCurve(pts[::-1]), samples=64)
        assert np.max(np.abs(fw.r - bw.r)) < 1e-9

    def test_sample_count_override(self):
        prof = polar_profile(circle(128, rho=2.0), samples=64)
        assert len(prof.r) == 64
        assert np.max(np.abs(prof.r - 2.0)) < 1e-12

    def test_non_star_curve_rejected(self):
        # a circle not containing the origin sweeps no full turn
        with pytest.raises(CurveConfigError):
            polar_profile(circle(128, rho=1.0, center=(3.0, 0.0)))

    def test_open_curve_rejected(self):
        with pytest.raises(CurveConfigError):
            polar_profile(line_pair_curve(128))
