"""Singularity analysis: Gaussian density, rescalings, cones, spectra.

Everything here treats the curve as the profile of the swept surface
L = {(gamma cos a, gamma sin a)} in C^2 and asks the blow-up questions:
how much surface concentrates at a space-time point (Gaussian density and
local length ratios), and what the flow looks like through a parabolic
magnifying glass centered there (rescaled curves, their decomposition
into ray components with fitted directions and angle statistics).

Conventions that matter:

* Surface integrals carry the weight pi * |gamma| per unit curve length.
  The (s, alpha) parametrization covers the surface twice for antipodally
  symmetric curves, hence the factor 1/2 folded into pi = 2*pi/2.  The
  convention is pinned by the density-of-a-line oracle: a single straight
  line through the reference point has Gaussian density 1.
* A plane point x0 embeds into C^2 as (x0, 0).  For the density integral
  the azimuthal direction then enters only through a Bessel factor,
  evaluated here in its exponentially-scaled form for stability.
* Angles are compared as exp(2i*theta): the two rays of one line carry
  theta values differing by pi, so only the doubled angle is a property
  of the line itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import i0e

from .flow import RadialProfile, Trajectory, TrajectoryRangeError
from .geometry import (
    CurveConfigError,
    PlaneCurve,
    component_slices,
    compute_frame,
)
from .lagrangian import lagrangian_angle

__all__ = [
    "TrajectoryRangeError",
    "DensitySample",
    "gaussian_density",
    "MonotonicityReport",
    "monotonicity_check",
    "DensityRatio",
    "local_density_ratio",
    "RescaledCurve",
    "rescale_flow",
    "normalized_rescaling",
    "ConeComponent",
    "ConeDecomposition",
    "cone_decomposition",
    "AngleSpectrum",
    "angle_spectrum",
    "QuadrantReport",
    "quadrant_monotonicity",
    "polar_profile",
]

# chords longer than this multiple of the median are clip/jump gaps, not
# curve (same convention as geometry.component_slices)
GAP_FACTOR = 8.0


@dataclass(frozen=True)
class DensitySample:
    """Gaussian density of the swept surface at space-time point (x0, T),
    evaluated from the curve at time t < T."""

    x0: np.ndarray
    T: float
    t: float
    value: float


def gaussian_density(curve: PlaneCurve, x0, T: float, t: float) -> DensitySample:
    """Backward-heat-kernel mass of the swept surface.

    Theta = (4 pi tau)^{-1} * (1/2) * integral over (s, alpha) of
    exp(-|X - (x0,0)|^2 / (4 tau)) dH^2 with tau = T - t.  The alpha
    integral is a modified Bessel function; with the scaled form the
    exponent is -(|gamma| - |x0|)^2/(4 tau) and never overflows.

    Calibration: a static line through x0 gives 1, two transverse lines
    give 2, the circle of radius 2*sqrt(tau) about the origin gives
    2*pi/e - the full-surface 2-D quadrature agrees, see the test suite.
    """
    tau = T - t
    if tau <= 0.0:
        raise ValueError(f"evaluation time t={t:.6g} must precede T={T:.6g}")
    p = np.asarray(x0, dtype=np.float64).reshape(2)
    frame = compute_frame(curve)
    pts = curve.points
    r = np.linalg.norm(pts, axis=1)
    p_norm2 = float(p @ p)
    b = (pts @ p) / (2.0 * tau)
    kernel = i0e(b) * np.exp(-(r * r + p_norm2) / (4.0 * tau) + np.abs(b))
    value = float(np.sum(frame.weight * r * kernel) / (4.0 * tau))
    return DensitySample(x0=p, T=float(T), t=float(t), value=value)


@dataclass(frozen=True)
class MonotonicityReport:
    passed: bool
    max_increase: float
    times: np.ndarray
    values: np.ndarray


def monotonicity_check(
    trajectory: Trajectory,
    x0,
    T: float,
    drift_tol: float = 1e-3,
    t_max: float | None = None,
) -> MonotonicityReport:
    """Evaluate Theta(x0, T; t_k) along the recorded states and check it
    never increases by more than ``drift_tol`` between records.

    Records at or past T (or past ``t_max``) are skipped; by the
    monotonicity of the smooth flow the sequence should be nonincreasing
    up to quadrature noise.
    """
    cutoff = T if t_max is None else min(T, t_max)
    times, values = [], []
    for state in trajectory.states:
        if state.t >= cutoff:
            continue
        sample = gaussian_density(state.curve, x0, T, state.t)
        times.append(state.t)
        values.append(sample.value)
    values_arr = np.asarray(values)
    if len(values_arr) >= 2:
        max_increase = float(np.max(np.diff(values_arr)))
        max_increase = max(max_increase, 0.0)
    else:
        max_increase = 0.0
    return MonotonicityReport(
        passed=max_increase <= drift_tol,
        max_increase=max_increase,
        times=np.asarray(times),
        values=values_arr,
    )


@dataclass(frozen=True)
class DensityRatio:
    """H^1(curve ∩ B_delta(x0)) / (2 delta), with a resolution flag."""

    value: float
    under_resolved: bool


def _segment_clip_length(a: np.ndarray, b: np.ndarray, center: np.ndarray, delta: float) -> float:
    # exact length of segment [a, b] inside the disk B_delta(center)
    d = b - a
    f = a - center
    A = float(d @ d)
    if A == 0.0:
        return 0.0
    B = 2.0 * float(f @ d)
    C = float(f @ f) - delta * delta
    disc = B * B - 4.0 * A * C
    if disc <= 0.0:
        return 0.0
    sq = math.sqrt(disc)
    lo = max((-B - sq) / (2.0 * A), 0.0)
    hi = min((-B + sq) / (2.0 * A), 1.0)
    if hi <= lo:
        return 0.0
    return (hi - lo) * math.sqrt(A)


def local_density_ratio(curve: PlaneCurve, x0, delta: float) -> DensityRatio:
    """Curve length inside the disk of radius delta about x0, over 2*delta.

    Partial segments are clipped exactly.  The result is flagged
    under-resolved when delta is not at least 5 local node spacings, the
    scale below which a polyline stops resembling its curve.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    p = np.asarray(x0, dtype=np.float64).reshape(2)
    pts = curve.points
    total = 0.0
    touched: list[float] = []
    for sl in component_slices(curve):
        seg = pts[sl]
        pairs = zip(seg[:-1], seg[1:])
        for a, b in pairs:
            ln = _segment_clip_length(a, b, p, delta)
            if ln > 0.0:
                total += ln
                touched.append(float(np.linalg.norm(b - a)))
    if curve.closed:
        ln = _segment_clip_length(pts[-1], pts[0], p, delta)
        if ln > 0.0:
            total += ln
            touched.append(float(np.linalg.norm(pts[0] - pts[-1])))
    under = bool(touched) and delta <= 5.0 * float(np.median(touched))
    return DensityRatio(value=total / (2.0 * delta), under_resolved=under)


@dataclass(frozen=True)
class RescaledCurve:
    """A parabolic rescaling sigma * (curve(T + s/sigma^2) - x0), clipped
    to a window about the origin (open arc if the clip cut anything)."""

    s: float
    sigma: float
    curve: PlaneCurve


def _clip_to_window(pts: np.ndarray, closed: bool, window: float) -> tuple[np.ndarray, bool]:
    rad = np.linalg.norm(pts, axis=1)
    keep = rad <= window
    if keep.all():
        return pts, closed
    if not keep.any():
        return pts[:0], False
    # rotate so index 0 starts a kept run, then drop the rest; the splice
    # points become jump chords that component_slices recognizes
    n = len(pts)
    starts = np.nonzero(keep & ~np.roll(keep, 1))[0]
    shift = int(starts[0]) if closed else 0
    rolled = np.roll(pts, -shift, axis=0)
    keep_rolled = np.roll(keep, -shift)
    return rolled[keep_rolled], False


def rescale_flow(
    trajectory: Trajectory,
    x0,
    T: float,
    scales,
    s: float,
    window: float = 10.0,
) -> list[RescaledCurve]:
    """Magnified views of the flow approaching (x0, T).

    For each sigma the curve at time T + s/sigma^2 (linear interpolation
    between records) is translated to put x0 at the origin, stretched by
    sigma, and clipped to B_window(0).  Along a convergent blow-up the
    outputs stabilize as sigma grows.
    """
    p = np.asarray(x0, dtype=np.float64).reshape(2)
    span = trajectory.times
    out = []
    failures = []
    for sigma in scales:
        t = T + s / (sigma * sigma)
        try:
            curve = trajectory.curve_at(t)
        except TrajectoryRangeError:
            overshoot = max(span[0] - t, t - span[-1])
            failures.append((overshoot, sigma, t))
            continue
        pts = sigma * (curve.points - p)
        clipped, closed = _clip_to_window(pts, curve.closed, window)
        if len(clipped) < 16:
            raise CurveConfigError(
                f"window {window} leaves {len(clipped)} nodes at sigma={sigma:g}; "
                "increase the window or the run resolution"
            )
        out.append(
            RescaledCurve(s=float(s), sigma=float(sigma), curve=PlaneCurve(clipped, closed=closed))
        )
    if failures:
        failures.sort()
        _, sigma, t = failures[-1]
        raise TrajectoryRangeError(
            f"sigma={sigma:g} requests t={t:.6g}, outside the recorded span "
            f"[{span[0]:.6g}, {span[-1]:.6g}]"
        )
    return out


def normalized_rescaling(trajectory: Trajectory, x1, s: float) -> PlaneCurve:
    """The time-s frame of the normalized flow, e^s*(curve(t(s)) - x1)
    with t(s) = (1 - e^{-2s})/2.

    Only makes sense on a run whose initial c-constant is 1; t(s) tends
    to 1/2 as s grows, so a flow singular at T < 1/2 runs out of data at
    s = -log(1 - 2T)/2 and the range error is the singular horizon.
    """
    c = trajectory.initial_constant
    if not (math.isfinite(c) and abs(c - 1.0) <= 1e-3):
        raise CurveConfigError(
            f"normalized rescaling needs a run with c = 1, got c = {c:.6g}"
        )
    t = 0.5 * (1.0 - math.exp(-2.0 * s))
    curve = trajectory.curve_at(t)
    p = np.asarray(x1, dtype=np.float64).reshape(2)
    return PlaneCurve(math.exp(s) * (curve.points - p), closed=curve.closed)


# ---------------------------------------------------------------------------
# cone decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConeComponent:
    """One ray-like piece of a blown-up curve.

    ``direction`` is the fitted line direction in [0, pi) (nan for a
    component that stays closed, e.g. a rescaled circle).  The angle
    statistics are circular moments of exp(2i*theta): ``angle_spread`` is
    half the circular standard deviation of the doubled angle, i.e. the
    dispersion of theta mod pi.  ``residual`` is the worst node distance
    to the fitted line divided by the clip radius 4R.
    """

    direction: float
    mean_doubled_angle: complex
    angle_spread: float
    mass: float
    residual: float


@dataclass(frozen=True)
class ConeDecomposition:
    components: tuple[ConeComponent, ...]
    radius: float


def _arc_theta(pts: np.ndarray) -> np.ndarray:
    # continuous angle lift along a raw open arc (no PlaneCurve ceremony)
    g = np.gradient(pts, axis=0)
    z = pts[:, 0] + 1j * pts[:, 1]
    tz = g[:, 0] + 1j * g[:, 1]
    return np.unwrap(np.angle(z * tz))


def _chord_weights(pts: np.ndarray) -> np.ndarray:
    ch = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    w = np.zeros(len(pts))
    w[:-1] += 0.5 * ch
    w[1:] += 0.5 * ch
    return w


def _split_mask_runs(keep: np.ndarray, closed: bool) -> list[np.ndarray]:
    # contiguous index runs of True, cyclic when closed
    n = len(keep)
    idx = np.nonzero(keep)[0]
    if len(idx) == 0:
        return []
    if keep.all():
        return [np.arange(n)]
    breaks = np.nonzero(np.diff(idx) > 1)[0]
    runs = np.split(idx, breaks + 1)
    if closed and len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == n - 1:
        runs[0] = np.concatenate([runs[-1], runs[0]])
        runs.pop()
    return runs


def cone_decomposition(
    rescaled: RescaledCurve | PlaneCurve,
    R: float = 1.0,
    merge_tol: float = 0.15,
) -> ConeDecomposition:
    """Resolve a blown-up curve into lines through the origin.

    The curve is clipped to B_{4R}; connected arcs (node adjacency) that
    miss B_R are discarded; surviving arcs are cut at strict interior
    minima of |x| inside B_R (where a strand passes the origin) so each
    piece is a single approximate ray; pieces are then merged greedily by
    line direction modulo pi (doubled-direction chord < ``merge_tol``).
    Each component reports the arclength-weighted principal direction
    through the origin, circular statistics of exp(2i*theta), total
    length, and worst distance to the fitted line.

    A closed curve that survives clipping whole (a rescaled circle) is a
    single component with nan direction.
    """
    curve = rescaled.curve if isinstance(rescaled, RescaledCurve) else rescaled
    pts = curve.points
    rad = np.linalg.norm(pts, axis=1)
    keep = rad <= 4.0 * R
    runs = _split_mask_runs(keep, curve.closed)

    # split runs at jump chords (clip gaps and multi-component fixtures)
    arcs: list[np.ndarray] = []
    all_chords = []
    for run in runs:
        seg = pts[run]
        if len(seg) >= 2:
            all_chords.append(np.linalg.norm(np.diff(seg, axis=0), axis=1))
    med = float(np.median(np.concatenate(all_chords))) if all_chords else 0.0
    for run in runs:
        if len(run) < 3:
            continue
        seg = pts[run]
        ch = np.linalg.norm(np.diff(seg, axis=0), axis=1)
        cuts = np.nonzero(ch > GAP_FACTOR * med)[0] if med > 0 else np.array([], int)
        for piece in np.split(run, cuts + 1):
            if len(piece) >= 3:
                arcs.append(piece)

    fully_closed = curve.closed and keep.all() and len(arcs) == 1

    # discard arcs that never enter B_R
    arcs = [a for a in arcs if rad[a].min() <= R]
    if not arcs:
        return ConeDecomposition(components=(), radius=float(R))

    # cut each arc at strict interior minima of |x| inside B_R
    pieces: list[np.ndarray] = []
    if fully_closed:
        pieces = arcs
    else:
        for a in arcs:
            rr = rad[a]
            interior = np.arange(1, len(a) - 1)
            is_min = (
                (rr[interior] < rr[interior - 1])
                & (rr[interior] < rr[interior + 1])
                & (rr[interior] < R)
            )
            cuts = interior[is_min]
            prev = 0
            for c in cuts:
                pieces.append(a[prev : c + 1])
                prev = c
            pieces.append(a[prev:])
        pieces = [p for p in pieces if len(p) >= 3]

    # angle and direction moments per piece
    items = []
    for p in pieces:
        seg = pts[p]
        if fully_closed:
            frame = compute_frame(curve)
            theta = lagrangian_angle(curve, frame).theta
            w = frame.weight
        else:
            theta = _arc_theta(seg)
            w = _chord_weights(seg)
        z = seg[:, 0] + 1j * seg[:, 1]
        zr = np.abs(z)
        safe = zr > 0
        dir_moment = complex(np.sum(w[safe] * z[safe] ** 2 / zr[safe]))
        ang_moment = complex(np.sum(w * np.exp(2j * theta)))
        items.append(
            {
                "mass": float(w.sum()),
                "dir": dir_moment,
                "ang": ang_moment,
                "nodes": seg,
            }
        )

    # greedy merge by line direction mod pi, heaviest first
    items.sort(key=lambda d: -d["mass"])
    groups: list[dict] = []
    for it in items:
        placed = False
        if not fully_closed and abs(it["dir"]) > 0:
            u = it["dir"] / abs(it["dir"])
            for g in groups:
                if abs(g["dir"]) == 0:
                    continue
                v = g["dir"] / abs(g["dir"])
                if abs(u - v) < merge_tol:
                    g["mass"] += it["mass"]
                    g["dir"] += it["dir"]
                    g["ang"] += it["ang"]
                    g["nodes"].append(it["nodes"])
                    placed = True
                    break
        if not placed:
            groups.append(
                {
                    "mass": it["mass"],
                    "dir": it["dir"],
                    "ang": it["ang"],
                    "nodes": [it["nodes"]],
                }
            )

    comps = []
    for g in sorted(groups, key=lambda d: -d["mass"]):
        if fully_closed or abs(g["dir"]) == 0:
            direction = float("nan")
            residual = float("nan")
        else:
            phi = 0.5 * math.atan2(g["dir"].imag, g["dir"].real)
            phi %= math.pi
            direction = phi
            e = np.exp(-1j * phi)
            worst = 0.0
            for seg in g["nodes"]:
                z = seg[:, 0] + 1j * seg[:, 1]
                worst = max(worst, float(np.abs((z * e).imag).max()))
            residual = worst / (4.0 * R)
        amag = abs(g["ang"])
        if amag > 0 and g["mass"] > 0:
            rho = min(amag / g["mass"], 1.0)
            spread = 0.5 * math.sqrt(max(-2.0 * math.log(max(rho, 1e-300)), 0.0))
            mean_ang = g["ang"] / amag
        else:
            spread = float("inf")
            mean_ang = complex(float("nan"), float("nan"))
        comps.append(
            ConeComponent(
                direction=direction,
                mean_doubled_angle=mean_ang,
                angle_spread=spread,
                mass=g["mass"],
                residual=residual,
            )
        )
    return ConeDecomposition(components=tuple(comps), radius=float(R))


@dataclass(frozen=True)
class AngleSpectrum:
    """Mass-weighted histogram of the angle field over [0, 2*pi)."""

    edges: np.ndarray
    mass: np.ndarray
    total: float


def angle_spectrum(curve: PlaneCurve, bins: int = 36) -> AngleSpectrum:
    """Distribution of surface mass over the angle circle.

    Weight per node is pi * |x| * ds (the equivariant area element), so
    ``total`` equals pi times the first radial moment of the curve.  At a
    conical blow-up limit the spectrum concentrates on finitely many
    values.
    """
    if bins < 8:
        raise CurveConfigError("need at least 8 bins")
    frame = compute_frame(curve)
    theta = lagrangian_angle(curve, frame).theta
    r = np.linalg.norm(curve.points, axis=1)
    mu = np.pi * r * frame.weight
    idx = np.floor((theta % (2.0 * np.pi)) / (2.0 * np.pi) * bins).astype(int)
    idx = np.clip(idx, 0, bins - 1)
    mass = np.bincount(idx, weights=mu, minlength=bins)
    edges = np.linspace(0.0, 2.0 * np.pi, bins + 1)
    return AngleSpectrum(edges=edges, mass=mass, total=float(mu.sum()))


@dataclass(frozen=True)
class QuadrantReport:
    passed: bool
    worst_violation: float


def quadrant_monotonicity(
    profile: RadialProfile | np.ndarray, tol: float | None = None
) -> QuadrantReport:
    """Check the four-quadrant radius pattern of an axis-aligned profile.

    r must be nonincreasing for s in [0, pi/2] and [pi, 3pi/2], and
    nondecreasing on [pi/2, pi] and [3pi/2, 2pi] (major axis along x).
    Differences whose endpoints straddle a quadrant boundary are exempt.
    Tolerance defaults to 1e-6 * max r.
    """
    r = profile.r if isinstance(profile, RadialProfile) else np.asarray(profile)
    n = len(r)
    if tol is None:
        tol = 1e-6 * float(r.max())
    j = np.arange(n)
    q = (4 * j) // n                       # quadrant whose left edge is <= s_j
    inside = 4 * (j + 1) <= (q + 1) * n    # s_{j+1} within the same closed quadrant
    d = np.roll(r, -1) - r
    worst = 0.0
    down = inside & ((q % 2) == 0)   # quadrants 1 and 3: nonincreasing
    up = inside & ((q % 2) == 1)     # quadrants 2 and 4: nondecreasing
    if down.any():
        worst = max(worst, float(np.max(d[down], initial=0.0)))
    if up.any():
        worst = max(worst, float(np.max(-d[up], initial=0.0)))
    return QuadrantReport(passed=worst <= tol, worst_violation=worst)


def polar_profile(curve: PlaneCurve, samples: int | None = None, t: float = 0.0) -> RadialProfile:
    """Radius of a star-shaped curve on the uniform polar-angle grid.

    The nodes' polar angles must wind monotonically once around the
    origin; radius is interpolated at s_j = 2*pi*j/samples by a periodic
    cubic spline in the angle.  This is the bridge from the parametric
    solver to the radial one.
    """
    if not curve.closed:
        raise CurveConfigError("polar profile requires a closed curve")
    n = samples if samples is not None else curve.node_count
    if n < 16:
        raise CurveConfigError("need at least 16 samples")
    pts = curve.points
    phi = np.unwrap(np.arctan2(pts[:, 1], pts[:, 0]))
    r = np.linalg.norm(pts, axis=1)
    dphi = np.diff(phi)
    total = phi[-1] - phi[0]
    if dphi.min() <= 0.0 and dphi.max() >= 0.0:
        raise CurveConfigError("curve is not star-shaped about the origin")
    if total < 0.0:
        phi, r = phi[::-1], r[::-1]
        total = -total
    wrap = 2.0 * np.pi - total
    if not 0.0 < wrap < 2.0 * np.pi:
        raise CurveConfigError(
            f"polar angle sweeps {total:.4f} across the nodes, expected a single turn"
        )
    phi_ext = np.concatenate([phi, [phi[0] + 2.0 * np.pi]])
    r_ext = np.concatenate([r, [r[0]]])
    spline = CubicSpline(phi_ext, r_ext, bc_type="periodic")
    targets = 2.0 * np.pi * np.arange(n) / n
    shifted = phi[0] + (targets - phi[0]) % (2.0 * np.pi)
    return RadialProfile(spline(shifted), t)
