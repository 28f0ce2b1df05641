"""Initial-curve builders for the standard runs and analysis fixtures.

Closed scenarios are sampled with antipodal node pairing (node k and
node k + N/2 are exact reflections), which the solver detects and then
preserves.  Open fixtures are unions of straight lines through the
origin sampled on half-offset grids, so no node ever sits exactly at
the origin where the angle field is undefined.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import (
    CurveConfigError,
    PlaneCurve,
    antipodal_symmetrize,
    resample,
)

__all__ = [
    "SEMI_MINOR",
    "Scenario",
    "SCENARIOS",
    "build_scenario",
    "scenario_table",
    "circle_curve",
    "ellipse_curve",
    "line_pair_curve",
    "x_cone_curve",
]

SEMI_MINOR = 2.0


def circle_curve(resolution: int, rho: float = 2.0) -> PlaneCurve:
    """Origin-centered circle of radius rho; shrinks self-similarly."""
    if rho <= 0.0:
        raise CurveConfigError("circle radius must be positive")
    _check_resolution(resolution)
    u = 2.0 * np.pi * np.arange(resolution) / resolution
    pts = rho * np.column_stack([np.cos(u), np.sin(u)])
    return antipodal_symmetrize(PlaneCurve(pts))


def ellipse_curve(resolution: int, a: float = 3.0) -> PlaneCurve:
    """Axis-aligned ellipse with semi-major a and semi-minor fixed at 2,
    resampled to uniform arclength with node 0 at (a, 0)."""
    if a < SEMI_MINOR:
        raise CurveConfigError(f"semi-major axis must be >= {SEMI_MINOR}")
    _check_resolution(resolution)
    u = 2.0 * np.pi * np.arange(resolution) / resolution
    pts = np.column_stack([a * np.cos(u), SEMI_MINOR * np.sin(u)])
    curve = resample(PlaneCurve(pts), resolution)
    return antipodal_symmetrize(curve)


def line_pair_curve(resolution: int, phi: float = 0.3, truncation: float = 10.0) -> PlaneCurve:
    """Two full lines through the origin at angles phi and phi + pi/2.

    This is the special Lagrangian cone fixture: the velocity field
    vanishes identically on straight lines through the origin, so the
    curve is an exact equilibrium of the discrete flow as well.
    """
    if truncation <= 0.0:
        raise CurveConfigError("truncation half-width must be positive")
    _check_resolution(resolution, minimum=32)
    half = resolution // 2
    first = _line_nodes(phi, truncation, half)
    second = _line_nodes(phi + 0.5 * np.pi, truncation, resolution - half)
    return PlaneCurve(np.vstack([first, second]), closed=False)


def x_cone_curve(resolution: int, truncation: float = 10.0) -> PlaneCurve:
    """The transverse pair of lines at pi/4 and 3*pi/4 (both branches
    carry the same doubled angle exp(2*i*theta) = -1)."""
    return line_pair_curve(resolution, phi=0.25 * np.pi, truncation=truncation)


def _line_nodes(angle: float, half_width: float, count: int) -> np.ndarray:
    step = 2.0 * half_width / count
    u = -half_width + (np.arange(count) + 0.5) * step
    e = np.array([np.cos(angle), np.sin(angle)])
    return u[:, None] * e[None, :]


def _check_resolution(resolution: int, minimum: int = 16) -> None:
    if resolution < minimum:
        raise CurveConfigError(f"resolution must be at least {minimum}")
    if resolution % 2:
        raise CurveConfigError("resolution must be even (antipodal node pairing)")


@dataclass(frozen=True)
class Scenario:
    name: str
    params: dict
    builder: Callable[..., PlaneCurve]
    closed: bool
    notes: str


SCENARIOS: dict[str, Scenario] = {
    "circle": Scenario(
        name="circle",
        params={"rho": 2.0},
        builder=circle_curve,
        closed=True,
        notes="shrinks self-similarly to the origin; lifespan rho^2/4",
    ),
    "ellipse": Scenario(
        name="ellipse",
        params={"a": 3.0},
        builder=ellipse_curve,
        closed=True,
        notes="semi-minor fixed at 2; pinches onto a line pair at the origin",
    ),
    "slag_cone": Scenario(
        name="slag_cone",
        params={"phi": 0.3, "truncation": 10.0},
        builder=line_pair_curve,
        closed=False,
        notes="perpendicular lines through the origin; analysis fixture, stationary",
    ),
    "x_cone": Scenario(
        name="x_cone",
        params={"truncation": 10.0},
        builder=x_cone_curve,
        closed=False,
        notes="line pair at pi/4 and 3pi/4; analysis fixture, stationary",
    ),
    "custom": Scenario(
        name="custom",
        params={"path": ""},
        builder=None,  # resolved by the CLI, which owns file I/O
        closed=True,
        notes="initial curve loaded from a snapshot file",
    ),
}


def build_scenario(name: str, resolution: int, params: dict | None = None) -> PlaneCurve:
    """Instantiate a named scenario, rejecting unknown parameter keys."""
    if name not in SCENARIOS:
        raise CurveConfigError(
            f"unknown scenario {name!r}; choices: {', '.join(sorted(SCENARIOS))}"
        )
    if name == "custom":
        raise CurveConfigError("custom scenarios are built from a snapshot path")
    scenario = SCENARIOS[name]
    given = dict(params or {})
    unknown = sorted(set(given) - set(scenario.params))
    if unknown:
        raise CurveConfigError(
            f"unknown parameter(s) for scenario {name!r}: {', '.join(unknown)}"
        )
    merged = {**scenario.params, **given}
    return scenario.builder(resolution, **merged)


def scenario_table() -> str:
    """Plain-text table of the available scenarios."""
    rows = [("name", "parameters", "notes")]
    for sc in SCENARIOS.values():
        if sc.name == "custom":
            pstr = "path=<snapshot.json>"
        else:
            pstr = ", ".join(f"{k}={v:g}" for k, v in sc.params.items())
        rows.append((sc.name, pstr, sc.notes))
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = []
    for i, r in enumerate(rows):
        lines.append("  ".join(r[j].ljust(widths[j]) for j in range(3)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[j] for j in range(3)))
    return "\n".join(lines)
