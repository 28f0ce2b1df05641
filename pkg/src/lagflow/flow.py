"""Explicit time stepping for the equivariant curve flow.

The evolution law is

    d gamma / dt  =  kappa * n  -  x_perp / |x|^2

where kappa*n is the curvature vector and x_perp is the normal part of the
position vector.  It is curve shortening plus a radial forcing that makes
the swept surface in C^2 move by mean curvature.  Both terms together are
what the invariants in :mod:`lagflow.lagrangian` are exact for: enclosed
area drains at the constant rate 4*pi per unit time on winding-one curves,
so the flow has a built-in clock against which every run is checked.

Integration is explicit (Euler by default, Heun optionally) with a
stability-limited step

    dt = safety * min( h^2,  h * min|x|^2 / (2 max|<x,n>|),  h / (2 max|v|) )

where h is the smallest arclength spacing.  The Euler stability limit of
the 4th-order second-difference stencil is 0.375 h^2, so the default
safety 0.2 keeps the diffusive step comfortably inside it.  Nodes
are pushed back to equal arclength spacing every few steps, and curves
detected (or declared) antipodally symmetric are reprojected onto exact
symmetry each step so the pinch stays centered.

A run ends either at a requested time or at one of three singularity
triggers, checked in priority order before every step:

* ``origin_contact``    -- a node of a closed curve enters a small disk
                           around the origin (the flow law is singular
                           there, and reaching it is the interesting event);
* ``curvature_blowup``  -- max |kappa| * h exceeds 1, i.e. the curve bends
                           faster than the node spacing can represent;
* ``step_underflow``    -- the stable step fell below ``dt_min``.

Diagnostics are sampled on a uniform time grid (plus a geometric cascade
of extra records as the minimum radius collapses) and carried as plain
column arrays, one row per recorded state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    CurveConfigError,
    FrameData,
    OriginContactError,
    PlaneCurve,
    antipodal_defect,
    antipodal_symmetrize,
    component_slices,
    compute_frame,
    enclosed_area,
    normal_projection,
    resample,
)
from .lagrangian import NonMonotoneError, lagrangian_angle, monotone_data

__all__ = [
    "IntegrationError",
    "StepUnderflowError",
    "TrajectoryRangeError",
    "FlowConfig",
    "StopConditions",
    "RecordingConfig",
    "FlowState",
    "make_state",
    "velocity",
    "stability_dt",
    "step",
    "evolve",
    "Trajectory",
    "SingularityReport",
    "TimeEstimate",
    "estimate_singular_time",
    "DIAGNOSTIC_COLUMNS",
    "RadialProfile",
    "RadialTrajectory",
    "radial_rhs",
    "radial_stability_dt",
    "radial_evolve",
]

DIAGNOSTIC_COLUMNS = (
    "t",
    "dt",
    "area",
    "liouville_integral",
    "maslov_integral",
    "monotone_defect",
    "max_curvature",
    "min_radius",
    "gaussian_density_origin",
    "angle_min",
    "angle_max",
)

# Node-level antipodal defect below this fraction of the diameter counts
# as "the curve is symmetric" for auto-detection.
ANTIPODAL_DETECT_TOL = 1e-9


class IntegrationError(RuntimeError):
    """The integrator lost the curve (non-finite values, step budget).

    ``last_state`` holds the most recent usable state when available.
    """

    def __init__(self, message: str, last_state: "FlowState | None" = None):
        super().__init__(message)
        self.last_state = last_state


class StepUnderflowError(IntegrationError):
    """The stability-limited step fell below the configured floor."""


class TrajectoryRangeError(ValueError):
    """A time or scale outside the span actually covered by a run."""


@dataclass(frozen=True)
class FlowConfig:
    """Integrator knobs.

    ``enforce_antipodal=None`` means auto-detect from the initial curve;
    pass True/False to force.  ``redistribute_every=0`` disables arclength
    redistribution.
    """

    safety: float = 0.2
    scheme: str = "euler"
    redistribute_every: int = 10
    dt_min: float = 1e-14
    origin_contact_factor: float = 0.005
    curvature_blowup_product: float = 1.0
    enforce_antipodal: bool | None = None
    max_steps: int = 2_000_000

    def __post_init__(self):
        if self.scheme not in ("euler", "heun"):
            raise CurveConfigError(f"unknown scheme {self.scheme!r}")
        if not 0.0 < self.safety <= 1.0:
            raise CurveConfigError("safety must be in (0, 1]")


@dataclass(frozen=True)
class StopConditions:
    """When to stop short of a singularity.  ``t_end=None`` runs until a
    trigger fires (or the step budget runs out)."""

    t_end: float | None = None


@dataclass(frozen=True)
class RecordingConfig:
    """Diagnostic sampling.

    ``snapshot_dt=None`` picks (c/2)/50 on closed curves with a positive
    c-constant (50 records across the nominal drain time), or t_end/40
    when only a stop time is available.  Once the enclosed area has
    dropped below ``area_switch`` times its initial value, an extra record
    is taken whenever the minimum radius falls below ``tail_factor`` times
    its value at the previous record, so the approach to a pinch is
    resolved geometrically.
    """

    snapshot_dt: float | None = None
    area_switch: float = 0.25
    tail_factor: float = 0.95


@dataclass(frozen=True)
class FlowState:
    """A curve at a moment of flow time.

    ``initial_constant`` is the c-constant of the run's initial curve
    (nan when undefined); it rides along so drift from the drainage law
    can be measured at any later state.
    """

    curve: PlaneCurve
    t: float
    initial_constant: float
    step_index: int = 0


@dataclass(frozen=True)
class SingularityReport:
    """What stopped the run and where the singular time must lie.

    For a detected singularity, [t_low, t_high] brackets the blow-up time:
    t_low is the last time reached, t_high extrapolates the collapse of
    the minimum radius.  ``singular_point`` is the best guess for the
    blow-up point (the origin, for centered pinches).
    """

    detected: bool
    trigger: str | None
    t_low: float
    t_high: float
    singular_point: np.ndarray | None
    max_curvature_at_stop: float
    min_radius_at_stop: float


@dataclass(frozen=True)
class TimeEstimate:
    value: float
    width: float
    conclusive: bool


@dataclass
class Trajectory:
    """Recorded states plus diagnostic columns (one entry per record)."""

    states: list[FlowState]
    diagnostics: dict[str, np.ndarray]
    initial_constant: float

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def curve_at(self, t: float) -> PlaneCurve:
        """Curve at time t, linearly interpolated between records."""
        times = self.times
        if not times[0] <= t <= times[-1]:
            raise TrajectoryRangeError(
                f"t={t:.6g} outside recorded span [{times[0]:.6g}, {times[-1]:.6g}]"
            )
        i = int(np.searchsorted(times, t, side="right") - 1)
        if i >= len(times) - 1:
            return self.states[-1].curve
        t0, t1 = times[i], times[i + 1]
        if t1 == t0:
            return self.states[i].curve
        lam = (t - t0) / (t1 - t0)
        a, b = self.states[i].curve, self.states[i + 1].curve
        if a.node_count != b.node_count:
            raise TrajectoryRangeError("records have mismatched node counts")
        return PlaneCurve((1.0 - lam) * a.points + lam * b.points, closed=a.closed)


def make_state(curve: PlaneCurve, t: float = 0.0) -> FlowState:
    """Initial flow state; the c-constant is computed here and frozen."""
    try:
        c = monotone_data(curve, compute_frame(curve)).constant_c
    except (NonMonotoneError, OriginContactError, CurveConfigError):
        c = float("nan")
    return FlowState(curve=curve, t=float(t), initial_constant=c, step_index=0)


def velocity(curve: PlaneCurve, frame: FrameData) -> np.ndarray:
    """kappa*n - x_perp/|x|^2 per node, shape (N, 2)."""
    r2 = np.einsum("ij,ij->i", curve.points, curve.points)
    guard = (1e-10 * max(curve.diameter, 1e-300)) ** 2
    if r2.min() <= guard:
        raise OriginContactError(
            f"node at distance {math.sqrt(r2.min()):.3e} from the origin; "
            "velocity is singular there"
        )
    xperp = normal_projection(curve, frame)
    return frame.curvature[:, None] * frame.normal - xperp / r2[:, None]


def _min_spacing(curve: PlaneCurve, frame: FrameData) -> float:
    if curve.closed:
        return float(frame.weight.min())
    spacings = []
    for sl in component_slices(curve):
        seg = curve.points[sl]
        if len(seg) >= 2:
            spacings.append(np.linalg.norm(np.diff(seg, axis=0), axis=1).min())
    if not spacings:
        raise CurveConfigError("open curve has no differentiable component")
    return float(min(spacings))


def stability_dt(
    curve: PlaneCurve, frame: FrameData, vel: np.ndarray, safety: float
) -> float:
    """Largest explicit step the current geometry supports."""
    h = _min_spacing(curve, frame)
    # safety <= 0.375 keeps the h^2 term inside the stencil stability limit
    caps = [h * h]
    r2 = np.einsum("ij,ij->i", curve.points, curve.points)
    dots = np.abs(np.einsum("ij,ij->i", curve.points, frame.normal))
    dmax = dots.max()
    if dmax > 0.0:
        caps.append(h * r2.min() / (2.0 * dmax))
    vmax = float(np.linalg.norm(vel, axis=1).max())
    if vmax > 0.0:
        caps.append(h / (2.0 * vmax))
    return safety * min(caps)


def _advance(
    state: FlowState,
    frame: FrameData,
    vel: np.ndarray,
    dt: float,
    config: FlowConfig,
) -> FlowState:
    pts = state.curve.points
    if config.scheme == "euler":
        new_pts = pts + dt * vel
    else:  # heun
        pred = pts + dt * vel
        if not np.all(np.isfinite(pred)):
            raise IntegrationError(
                f"non-finite predictor at t={state.t:.6g}", last_state=state
            )
        mid = PlaneCurve(pred, closed=state.curve.closed)
        vel2 = velocity(mid, compute_frame(mid))
        new_pts = pts + 0.5 * dt * (vel + vel2)
    if not np.all(np.isfinite(new_pts)):
        raise IntegrationError(
            f"non-finite node positions at t={state.t:.6g}", last_state=state
        )
    return FlowState(
        curve=PlaneCurve(new_pts, closed=state.curve.closed),
        t=state.t + dt,
        initial_constant=state.initial_constant,
        step_index=state.step_index + 1,
    )


def step(state: FlowState, config: FlowConfig, max_dt: float | None = None) -> FlowState:
    """One explicit step at the stability-limited size (capped by max_dt)."""
    frame = compute_frame(state.curve)
    vel = velocity(state.curve, frame)
    dt = stability_dt(state.curve, frame, vel, config.safety)
    if max_dt is not None:
        dt = min(dt, max_dt)
    if dt < config.dt_min:
        raise StepUnderflowError(
            f"stable step {dt:.3e} below floor {config.dt_min:.3e}",
            last_state=state,
        )
    return _advance(state, frame, vel, dt, config)


def _gaussian_density_origin(points: np.ndarray, weight: np.ndarray, tau: float) -> float:
    # density of the swept surface at the space-time point (origin, t + tau);
    # the azimuthal integral collapses because |X| is constant on each orbit.
    r = np.linalg.norm(points, axis=1)
    return float(np.sum(weight * r * np.exp(-(r * r) / (4.0 * tau))) / (4.0 * tau))


def _diagnostics_row(
    state: FlowState, frame: FrameData, dt_auto: float
) -> dict[str, float]:
    curve = state.curve
    nan = float("nan")
    row = {
        "t": state.t,
        "dt": dt_auto,
        "area": nan,
        "liouville_integral": nan,
        "maslov_integral": nan,
        "monotone_defect": nan,
        "max_curvature": float(np.abs(frame.curvature).max()),
        "min_radius": float(np.linalg.norm(curve.points, axis=1).min()),
        "gaussian_density_origin": nan,
        "angle_min": nan,
        "angle_max": nan,
    }
    try:
        angle = lagrangian_angle(curve, frame)
        row["angle_min"] = float(angle.theta.min())
        row["angle_max"] = float(angle.theta.max())
    except OriginContactError:
        angle = None
    if curve.closed:
        row["area"] = enclosed_area(curve)
        if angle is not None:
            try:
                md = monotone_data(curve, frame, angle)
            except NonMonotoneError:
                md = None
            if md is not None:
                row["liouville_integral"] = md.liouville_integral
                row["maslov_integral"] = md.maslov_integral
                c0 = state.initial_constant
                if math.isfinite(c0):
                    expected = (c0 - 2.0 * state.t) * md.maslov_integral
                    row["monotone_defect"] = abs(
                        md.liouville_integral - expected
                    ) / abs(md.maslov_integral)
    # reference time for the density column: the nominal drain time c/2
    # when one exists, a fixed lookahead otherwise
    c0 = state.initial_constant
    if curve.closed and math.isfinite(c0) and c0 > 0.0:
        tau = 0.5 * c0 - state.t
    else:
        tau = 0.25
    if tau > 0.0:
        row["gaussian_density_origin"] = _gaussian_density_origin(
            curve.points, frame.weight, tau
        )
    return row


def _auto_snapshot_dt(state: FlowState, stop: StopConditions) -> float:
    candidates = []
    c0 = state.initial_constant
    if state.curve.closed and math.isfinite(c0) and c0 > 0.0:
        candidates.append(0.5 * c0 / 50.0)
    if stop.t_end is not None:
        candidates.append((stop.t_end - state.t) / 40.0)
    if not candidates:
        raise CurveConfigError(
            "cannot choose a recording interval: no c-constant and no t_end; "
            "set RecordingConfig.snapshot_dt explicitly"
        )
    return min(candidates)


def estimate_singular_time(trajectory: Trajectory) -> TimeEstimate:
    """Extrapolated vanishing time of the minimum radius.

    Fits min_radius^2 against t over the trailing run of records where it
    decreases strictly (at most 12, at least 3) and returns the root of
    the linear fit, padded by the fit residual.  Inconclusive when the
    tail is too short or the fit does not point at a vanishing radius.
    """
    t = np.asarray(trajectory.diagnostics["t"], dtype=float)
    r = np.asarray(trajectory.diagnostics["min_radius"], dtype=float)
    k = len(r) - 1
    while k > 0 and r[k - 1] > r[k] and len(r) - k < 12:
        k -= 1
    tt, yy = t[k:], r[k:] ** 2
    t_last = float(t[-1])
    if len(tt) < 3:
        return TimeEstimate(value=t_last, width=float("inf"), conclusive=False)
    slope, intercept = np.polyfit(tt, yy, 1)
    if slope >= 0.0:
        return TimeEstimate(value=t_last, width=float("inf"), conclusive=False)
    root = -intercept / slope
    resid = float(np.sqrt(np.mean((yy - (slope * tt + intercept)) ** 2)))
    margin = 2.0 * resid / abs(slope)
    value = max(root, t_last)
    return TimeEstimate(value=value, width=value - t_last + margin, conclusive=True)


def evolve(
    state: FlowState,
    config: FlowConfig | None = None,
    stop: StopConditions | None = None,
    recording: RecordingConfig | None = None,
) -> tuple[Trajectory, SingularityReport]:
    """Run the flow from ``state`` until t_end or a singularity trigger.

    Returns the recorded trajectory and a report.  Records land exactly on
    the uniform snapshot grid (the step is shortened to hit it); the final
    state is always recorded.  Numerical failure (non-finite values, step
    budget) raises IntegrationError instead of returning.
    """
    config = config or FlowConfig()
    stop = stop or StopConditions()
    recording = recording or RecordingConfig()

    curve = state.curve
    enforce = config.enforce_antipodal
    if enforce is None:
        enforce = (
            curve.closed
            and curve.node_count % 2 == 0
            and antipodal_defect(curve) <= ANTIPODAL_DETECT_TOL * curve.diameter
        )
    elif enforce and curve.node_count % 2 != 0:
        raise CurveConfigError("antipodal enforcement needs an even node count")
    if enforce:
        state = FlowState(
            curve=antipodal_symmetrize(curve),
            t=state.t,
            initial_constant=state.initial_constant,
            step_index=state.step_index,
        )

    snapshot_dt = recording.snapshot_dt or _auto_snapshot_dt(state, stop)
    if snapshot_dt <= 0.0:
        raise CurveConfigError("snapshot_dt must be positive")

    diam0 = state.curve.diameter
    area0 = abs(enclosed_area(state.curve)) if state.curve.closed else float("nan")
    contact_radius = config.origin_contact_factor * diam0

    states: list[FlowState] = []
    columns: dict[str, list[float]] = {k: [] for k in DIAGNOSTIC_COLUMNS}
    last_recorded_min_r = float("inf")
    next_grid = state.t + snapshot_dt
    grid_tol = 1e-9 * snapshot_dt

    def record(st: FlowState, frame: FrameData, dt_auto: float) -> None:
        nonlocal last_recorded_min_r
        row = _diagnostics_row(st, frame, dt_auto)
        for k in DIAGNOSTIC_COLUMNS:
            columns[k].append(row[k])
        states.append(st)
        last_recorded_min_r = row["min_radius"]

    def finish(st, frame, dt_auto, trigger) -> tuple[Trajectory, SingularityReport]:
        if not states or states[-1].t != st.t:
            record(st, frame, dt_auto)
        traj = Trajectory(
            states=states,
            diagnostics={k: np.asarray(v) for k, v in columns.items()},
            initial_constant=state.initial_constant,
        )
        radii = np.linalg.norm(st.curve.points, axis=1)
        max_k = float(np.abs(frame.curvature).max())
        if trigger is None:
            report = SingularityReport(
                detected=False,
                trigger=None,
                t_low=st.t,
                t_high=st.t,
                singular_point=None,
                max_curvature_at_stop=max_k,
                min_radius_at_stop=float(radii.min()),
            )
            return traj, report
        est = estimate_singular_time(traj)
        t_high = est.value + est.width if est.conclusive else st.t + 50.0 * dt_auto
        if (
            st.curve.closed
            and math.isfinite(state.initial_constant)
            and state.initial_constant > 0.0
            and columns["maslov_integral"]
            and math.isfinite(columns["maslov_integral"][-1])
            and abs(columns["maslov_integral"][-1] - 4.0 * math.pi) < 1e-3
        ):
            # The enclosed area of a once-winding monotone curve drains
            # linearly, 2*area = (c - 2t) * 4*pi, so the flow cannot outlive
            # t = c/2; tighten the extrapolated bracket with that hard bound
            # (unless discretization error already carried the run past it).
            cap = 0.5 * state.initial_constant
            if cap >= st.t:
                t_high = min(t_high, cap)
        if trigger == "curvature_blowup":
            i = int(np.abs(frame.curvature).argmax())
            point = st.curve.points[i].copy()
        else:
            i = int(radii.argmin())
            n = st.curve.node_count
            if st.curve.closed and n % 2 == 0:
                point = 0.5 * (st.curve.points[i] + st.curve.points[(i + n // 2) % n])
            else:
                point = st.curve.points[i].copy()
        report = SingularityReport(
            detected=True,
            trigger=trigger,
            t_low=st.t,
            t_high=float(t_high),
            singular_point=point,
            max_curvature_at_stop=max_k,
            min_radius_at_stop=float(radii.min()),
        )
        return traj, report

    current = state
    while True:
        frame = compute_frame(current.curve)
        vel = velocity(current.curve, frame)
        dt_auto = stability_dt(current.curve, frame, vel, config.safety)
        radii = np.linalg.norm(current.curve.points, axis=1)
        min_r = float(radii.min())

        # --- recording at the current state -----------------------------
        on_grid = abs(current.t - next_grid) <= grid_tol
        is_first = not states
        tail_hit = (
            current.curve.closed
            and min_r <= recording.tail_factor * last_recorded_min_r
            and not math.isnan(area0)
            and abs(enclosed_area(current.curve)) < recording.area_switch * area0
        )
        if is_first or on_grid or tail_hit:
            record(current, frame, dt_auto)
            if on_grid:
                next_grid += snapshot_dt

        # --- stop checks (before stepping) -------------------------------
        h = _min_spacing(current.curve, frame)
        if current.curve.closed and min_r < contact_radius:
            return finish(current, frame, dt_auto, "origin_contact")
        if float(np.abs(frame.curvature).max()) * h > config.curvature_blowup_product:
            return finish(current, frame, dt_auto, "curvature_blowup")
        if dt_auto < config.dt_min:
            return finish(current, frame, dt_auto, "step_underflow")
        if stop.t_end is not None and current.t >= stop.t_end - 1e-12 * max(
            1.0, abs(stop.t_end)
        ):
            return finish(current, frame, dt_auto, None)
        if current.step_index - state.step_index >= config.max_steps:
            raise IntegrationError(
                f"step budget {config.max_steps} exhausted at t={current.t:.6g}",
                last_state=current,
            )

        # --- one step, shortened to land on the grid / t_end exactly ----
        dt = dt_auto
        gap = next_grid - current.t
        if gap <= grid_tol:
            # missed the grid point by a rounding hair without detection
            next_grid += snapshot_dt
            gap = next_grid - current.t
        if gap <= dt * (1.0 + 1e-9):
            dt = gap
        if stop.t_end is not None and stop.t_end - current.t < dt:
            dt = stop.t_end - current.t
        current = _advance(current, frame, vel, dt, config)

        if enforce:
            current = FlowState(
                curve=antipodal_symmetrize(current.curve),
                t=current.t,
                initial_constant=current.initial_constant,
                step_index=current.step_index,
            )
        if (
            config.redistribute_every > 0
            and current.curve.closed
            and current.step_index % config.redistribute_every == 0
        ):
            redistributed = resample(current.curve, current.curve.node_count)
            if enforce:
                redistributed = antipodal_symmetrize(redistributed)
            current = FlowState(
                curve=redistributed,
                t=current.t,
                initial_constant=current.initial_constant,
                step_index=current.step_index,
            )


# ---------------------------------------------------------------------------
# radial twin: the same flow for star-shaped antipodal curves written as a
# graph r(s) over the polar angle.  Used as an independent cross-check of
# the node-based integrator (one PDE, two discretizations).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialProfile:
    """Radius over the uniform polar-angle grid s_j = 2*pi*j/N, at time t.

    Valid only while the curve is a star-shaped graph over the angle; the
    parametric solver is the arbiter when that property is in doubt.
    """

    r: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        r = np.asarray(self.r, dtype=np.float64)
        if r.ndim != 1 or len(r) < 16:
            raise CurveConfigError("radial profile needs at least 16 samples")
        if not np.all(np.isfinite(r)) or r.min() <= 0.0:
            raise CurveConfigError("radial profile must be positive and finite")
        r = r.copy()
        r.setflags(write=False)
        object.__setattr__(self, "r", r)


@dataclass
class RadialTrajectory:
    """Recorded radial profiles plus per-node dr/dt at each record."""

    profiles: list[RadialProfile]
    rates: list[np.ndarray]

    @property
    def times(self) -> np.ndarray:
        return np.array([p.t for p in self.profiles])


def _radial_d1(r: np.ndarray) -> np.ndarray:
    h = 2.0 * np.pi / len(r)
    return (
        8.0 * (np.roll(r, -1) - np.roll(r, 1)) - (np.roll(r, -2) - np.roll(r, 2))
    ) / (12.0 * h)


def radial_rhs(profile: RadialProfile | np.ndarray) -> np.ndarray:
    """dr/dt for the flow written over the polar angle.

    For gamma(s) = r(s) e^{is} the normal motion kappa*n - x_perp/|x|^2
    pushed onto the radial graph reads

        dr/dt = (r r'' - 2 r^2 - 3 r'^2) / (r r'^2 + r^3),

    which reduces to dr/dt = -2/r on circles (r' = r'' = 0).  Equivalently
    dr/dt = -theta'/r with theta the angle field of the reconstructed
    curve — the cross-check used in the test suite.
    """
    r = profile.r if isinstance(profile, RadialProfile) else np.asarray(profile)
    if r.min() <= 0.0:
        raise OriginContactError("radial profile touched zero")
    h = 2.0 * np.pi / len(r)
    d1 = _radial_d1(r)
    d2 = (
        16.0 * (np.roll(r, -1) + np.roll(r, 1))
        - (np.roll(r, -2) + np.roll(r, 2))
        - 30.0 * r
    ) / (12.0 * h * h)
    return (r * d2 - 2.0 * r * r - 3.0 * d1 * d1) / (r * d1 * d1 + r**3)


def radial_stability_dt(r: np.ndarray, rhs: np.ndarray, safety: float) -> float:
    h = 2.0 * np.pi / len(r)
    d1 = _radial_d1(r)
    # arclength spacing is h*sqrt(r^2 + r'^2); the r'' term has diffusion
    # coefficient 1/(r^2 + r'^2), so this is the same h_min^2 cap as the
    # parametric solver
    caps = [h * h * float((r * r + d1 * d1).min())]
    rate = float(np.abs(rhs).max())
    if rate > 0.0:
        caps.append(0.5 * float(r.min()) / rate)
    return safety * min(caps)


def radial_evolve(
    profile: RadialProfile,
    t_end: float | None = None,
    snapshot_dt: float | None = None,
    safety: float = 0.2,
    stop_radius: float | None = None,
    dt_min: float = 1e-14,
    max_steps: int = 2_000_000,
) -> tuple[RadialTrajectory, SingularityReport]:
    """Integrate the radial law with the same stepping contract as evolve.

    Stops at ``t_end``, or when min r drops below ``stop_radius`` (default
    0.5% of the initial diameter, matching the origin-contact trigger), or
    on step underflow.  Records land exactly on the snapshot grid and
    carry per-node dr/dt.
    """
    if not isinstance(profile, RadialProfile):
        profile = RadialProfile(np.asarray(profile, dtype=np.float64), 0.0)
    r = profile.r.copy()
    t = float(profile.t)
    if snapshot_dt is None:
        if t_end is None:
            raise CurveConfigError("radial runs need t_end or snapshot_dt")
        snapshot_dt = (t_end - t) / 40.0
    if snapshot_dt <= 0.0:
        raise CurveConfigError("snapshot_dt must be positive")
    if stop_radius is None:
        stop_radius = 0.005 * 2.0 * float(r.max())

    times: list[float] = []
    profiles: list[RadialProfile] = []
    rates: list[np.ndarray] = []
    next_grid = t + snapshot_dt
    grid_tol = 1e-9 * snapshot_dt
    trigger = None
    for _ in range(max_steps):
        rhs = radial_rhs(r)
        if not times or abs(t - next_grid) <= grid_tol:
            if times:
                next_grid += snapshot_dt
            times.append(t)
            profiles.append(RadialProfile(r, t))
            rates.append(rhs.copy())
        if float(r.min()) < stop_radius:
            trigger = "origin_contact"
            break
        dt = radial_stability_dt(r, rhs, safety)
        if dt < dt_min:
            trigger = "step_underflow"
            break
        if t_end is not None and t >= t_end - 1e-12 * max(1.0, abs(t_end)):
            break
        gap = next_grid - t
        if gap <= grid_tol:
            next_grid += snapshot_dt
            gap = next_grid - t
        if gap <= dt * (1.0 + 1e-9):
            dt = gap
        if t_end is not None and t_end - t < dt:
            dt = t_end - t
        r = r + dt * rhs
        if not np.all(np.isfinite(r)):
            raise IntegrationError(f"non-finite radial profile at t={t:.6g}")
        t += dt
    else:
        raise IntegrationError(f"radial step budget exhausted at t={t:.6g}")

    if times[-1] != t:
        times.append(t)
        profiles.append(RadialProfile(r, t))
        rates.append(radial_rhs(r))
    traj = RadialTrajectory(profiles=profiles, rates=rates)

    minima = np.array([float(p.r.min()) for p in profiles])
    i_min = int(np.argmin(profiles[-1].r))
    n = len(r)
    angle = 2.0 * np.pi * i_min / n
    near = profiles[-1].r[i_min] * np.array([math.cos(angle), math.sin(angle)])
    far = profiles[-1].r[(i_min + n // 2) % n] * np.array(
        [math.cos(angle + np.pi), math.sin(angle + np.pi)]
    )
    if trigger is None:
        report = SingularityReport(
            detected=False,
            trigger=None,
            t_low=t,
            t_high=t,
            singular_point=None,
            max_curvature_at_stop=float("nan"),
            min_radius_at_stop=float(minima[-1]),
        )
        return traj, report
    # same square-root extrapolation as the parametric solver
    fit = Trajectory(
        states=[],
        diagnostics={"t": np.array(times), "min_radius": minima},
        initial_constant=float("nan"),
    )
    est = estimate_singular_time(fit)
    t_high = est.value + est.width if est.conclusive else t + 50.0 * snapshot_dt
    report = SingularityReport(
        detected=True,
        trigger=trigger,
        t_low=t,
        t_high=float(t_high),
        singular_point=0.5 * (near + far),
        max_curvature_at_stop=float("nan"),
        min_radius_at_stop=float(minima[-1]),
    )
    return traj, report
