"""Circular-arc smoothing of a planar corner and its turning integrals.

A corner of interior angle theta sits at the origin with one edge along
the positive x-axis and the other along the ray at angle theta (the domain
is the sector swept counterclockwise between them).  The corner is rounded
by the circular fillet tangent to both edges:

- theta < pi: the arc lies inside the domain, signed curvature +1/r;
- theta > pi: the arc lies in the complementary wedge outside the domain,
  signed curvature -1/r (its center-pointing normal is outward).

In both cases the total turning ``integral k ds`` equals ``pi - theta``,
and against a test function the integrals converge to
``(pi - theta) phi(vertex)^2`` at first order in the radius.  Curvature is
constant along the canonical fillet; the constraint it realizes is only
``|k| <= 1/r`` with a fixed sign, so the circle is the simplest admissible
representative.

Scope: only planar (codimension-two) corners are smoothed here.  Rounding
strata of codimension three and higher needs an iterated resolution of the
corner structure whose cross-term curvatures are not pinned down by the
planar data; that machinery is deliberately out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expressions import Expr, parse_expression

__all__ = [
    "SmoothedCorner",
    "smoothing_arc",
    "turning_integral",
    "mean_curvature_limit",
]

ARC_SAMPLES = 2048  # composite-Simpson sample count along the arc


@dataclass(frozen=True)
class SmoothedCorner:
    """Arclength samples of the smoothing arc of one corner."""

    angle: float
    radius: float
    arclength: np.ndarray  # (m,)
    points: np.ndarray     # (m, 2)
    tangents: np.ndarray   # (m, 2) unit
    curvature: np.ndarray  # (m,) signed

    @property
    def tangent_point_distance(self) -> float:
        """Distance from the vertex to the points where the arc meets the
        edges."""
        return float(np.linalg.norm(self.points[0]))


def smoothing_arc(angle: float, radius: float,
                  edge_length: float = 1.0) -> SmoothedCorner:
    """Canonical circular fillet for a corner of interior ``angle``.

    ``angle`` must lie in (0, pi) u (pi, 2 pi); a straight corner needs no
    smoothing and is rejected.  ``radius`` must leave the tangent points
    within the edges.
    """
    if not (0.0 < angle < 2.0 * math.pi) or angle == math.pi:
        raise ValueError("corner angle must lie in (0, pi) or (pi, 2 pi)")
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    if angle < math.pi:
        opening = angle        # fillet of the corner itself, inside
        sign = 1.0
    else:
        opening = 2.0 * math.pi - angle  # fillet of the complementary wedge
        sign = -1.0
    half = 0.5 * opening
    tangent_dist = radius / math.tan(half)
    if tangent_dist > edge_length:
        raise ValueError(
            f"radius {radius} needs tangent points at distance "
            f"{tangent_dist:.3g} > edge length {edge_length}"
        )
    center_dist = radius / math.sin(half)
    if angle < math.pi:
        center_angle = 0.5 * angle
    else:
        # bisector of the complementary wedge, outside the domain
        center_angle = angle + half
    center = center_dist * np.array([math.cos(center_angle),
                                     math.sin(center_angle)])
    sweep = math.pi - opening
    length = radius * sweep

    # radius direction at the tangent point on the x-axis edge; the arc is
    # traversed from there to the other edge (radius vector rotating
    # clockwise for the interior fillet, counterclockwise for the exterior)
    p_start = np.array([tangent_dist, 0.0])
    start_dir = (p_start - center) / radius
    phi0 = math.atan2(start_dir[1], start_dir[0])
    m = ARC_SAMPLES + 1
    s = np.linspace(0.0, length, m)
    phis = phi0 - sign * s / radius
    points = center + radius * np.stack([np.cos(phis), np.sin(phis)], axis=1)
    tangents = sign * np.stack([np.sin(phis), -np.cos(phis)], axis=1)
    curvature = np.full(m, sign / radius)
    return SmoothedCorner(angle, radius, s, points, tangents, curvature)


def _simpson(values: np.ndarray, spacing: float) -> float:
    if len(values) % 2 == 0:
        raise ValueError("composite Simpson needs an odd sample count")
    weights = np.ones(len(values))
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return float(np.dot(weights, values)) * spacing / 3.0


def turning_integral(corner: SmoothedCorner) -> float:
    """Total signed turning ``integral k ds`` along the arc (= pi - angle)."""
    spacing = corner.arclength[1] - corner.arclength[0]
    return _simpson(corner.curvature, spacing)


def mean_curvature_limit(angle: float, test_function: Expr | str,
                         radii: list[float] | tuple = (0.1, 0.05, 0.025),
                         edge_length: float | None = None) -> list[float]:
    """Integrals ``integral k(s) phi(x(s))^2 ds`` for a shrinking fillet.

    As the radius drops to zero these converge to
    ``(pi - angle) phi(vertex)^2`` with an O(radius) error; consecutive
    errors shrink proportionally to the radius ratio.
    """
    phi = (parse_expression(test_function)
           if isinstance(test_function, str) else test_function)
    if edge_length is None:
        edge_length = max(1.0, 10.0 * max(radii))
    out = []
    for r in radii:
        corner = smoothing_arc(angle, r, edge_length=edge_length)
        values = np.array([phi.eval(p) for p in corner.points])
        spacing = corner.arclength[1] - corner.arclength[0]
        out.append(_simpson(corner.curvature * values**2, spacing))
    return out
