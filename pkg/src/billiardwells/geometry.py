"""Double-well billiard geometries.

Six mirror-symmetric double wells (rectangle, circle, stadium, sinai,
butterfly, concave), each with per-well area 4.8, a barrier of average
width 0.1 between the wells, and hard walls everywhere else.  A geometry
is an exact region classifier (vectorized) plus an ordered boundary path
of line and circular-arc segments per well.

Conventions:
  * the symmetry axis is the vertical line x = 0, the barrier straddles it,
  * the left well lives at x < 0, the right well is its mirror image,
  * boundary paths run counterclockwise (interior on the left of travel),
    s = 0 at the lowest barrier-adjacent corner of each well (for the
    circle: the lowest point of the arc cap facing the barrier),
  * points exactly on a well/barrier interface classify as Barrier;
    points on an outer hard wall classify as Outside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

SHAPE_KINDS = ("rectangle", "circle", "stadium", "sinai", "butterfly", "concave")

_TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    """Raised when a shape cannot be constructed from its parameters."""


class Region(IntEnum):
    OUTSIDE = 0      # hard wall, V = infinity
    LEFT_WELL = 1    # V = 0
    RIGHT_WELL = 2   # V = 0
    BARRIER = 3      # V = V_b


# Free parameters of each family; the one solved for area closure is listed
# in _AREA_PARAM.  All remaining dimensions follow the shape decisions
# documented in the module docstring of each builder.
_DEFAULT_PARAMS = {
    "rectangle": {"ly": 2.4},
    "circle": {"cap_fraction": 1.0 / 3.0},
    "stadium": {"cap_width": 1.8},
    "sinai": {"lx": 2.2, "ly": 2.4},
    "butterfly": {"ly": 2.4, "sagitta": 0.4},
    "concave": {"ly": 2.4, "sagitta": 0.3},
}


@dataclass(frozen=True)
class ShapeSpec:
    """Parameters of one double-well family member."""

    kind: str
    barrier_width: float = 0.1
    barrier_height: float = 1000.0
    well_area: float = 4.8
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise GeometryError(f"unknown shape kind {self.kind!r}")
        if self.barrier_width <= 0 or self.barrier_height <= 0 or self.well_area <= 0:
            raise GeometryError("barrier_width, barrier_height, well_area must be > 0")
        merged = dict(_DEFAULT_PARAMS[self.kind])
        for key, val in self.params.items():
            if key not in merged:
                raise GeometryError(f"unknown parameter {key!r} for shape {self.kind!r}")
            if not val > 0:
                raise GeometryError(f"parameter {key!r} must be > 0")
            merged[key] = float(val)
        object.__setattr__(self, "params", merged)


# ----------------------------------------------------------------------
# Boundary segments
# ----------------------------------------------------------------------

def _rot90ccw(v):
    return np.array([-v[1], v[0]])


@dataclass(frozen=True)
class Line:
    p0: tuple
    p1: tuple

    @property
    def length(self):
        return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])

    def point_at(self, t):
        f = t / self.length
        return np.array([self.p0[0] + f * (self.p1[0] - self.p0[0]),
                         self.p0[1] + f * (self.p1[1] - self.p0[1])])

    def tangent_at(self, t):
        d = np.array([self.p1[0] - self.p0[0], self.p1[1] - self.p0[1]])
        return d / self.length

    def normal_at(self, t):
        # interior on the left of the direction of travel
        return _rot90ccw(self.tangent_at(t))

    def mirror_reversed(self):
        return Line((-self.p1[0], self.p1[1]), (-self.p0[0], self.p0[1]))


@dataclass(frozen=True)
class Arc:
    """Circular arc from angle theta0 to theta1; positive sweep is CCW."""

    center: tuple
    radius: float
    theta0: float
    theta1: float

    @property
    def sweep(self):
        return self.theta1 - self.theta0

    @property
    def length(self):
        return self.radius * abs(self.sweep)

    def angle_at(self, t):
        return self.theta0 + math.copysign(t / self.radius, self.sweep)

    def point_at(self, t):
        th = self.angle_at(t)
        return np.array([self.center[0] + self.radius * math.cos(th),
                         self.center[1] + self.radius * math.sin(th)])

    def tangent_at(self, t):
        th = self.angle_at(t)
        sgn = 1.0 if self.sweep >= 0 else -1.0
        return np.array([-sgn * math.sin(th), sgn * math.cos(th)])

    def normal_at(self, t):
        return _rot90ccw(self.tangent_at(t))

    def mirror_reversed(self):
        return Arc((-self.center[0], self.center[1]), self.radius,
                   math.pi - self.theta1, math.pi - self.theta0)


def _mirror_loops(loops):
    """Mirror x -> -x and reverse traversal, keeping interior on the left."""
    return [[seg.mirror_reversed() for seg in reversed(loop)] for loop in loops]


def _circular_segment_area(chord, sagitta):
    """Area between a chord and its circular arc."""
    r = (chord * chord / 4.0 + sagitta * sagitta) / (2.0 * sagitta)
    alpha = math.asin(chord / (2.0 * r))
    return r * r * (alpha - math.sin(alpha) * math.cos(alpha))


def _segment_radius(chord, sagitta):
    return (chord * chord / 4.0 + sagitta * sagitta) / (2.0 * sagitta)


# ----------------------------------------------------------------------
# Geometry object
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DoubleWellGeometry:
    """One resolved double well: classifier plus boundary paths.

    Immutable after construction; safe to share across workers.
    ``left_loops``/``right_loops`` are lists of closed segment loops (the
    sinai well has two: outer rectangle and inner disk).
    """

    spec: ShapeSpec
    resolved: dict
    left_loops: list
    right_loops: list
    bbox: tuple                   # (xmin, xmax, ymin, ymax) of the full domain
    barrier_y_halfspan: float     # y half-extent of the barrier-facing interval
    left_interface_x_min: float   # leftmost x of the left well/barrier interface
    _classify_half: callable = field(repr=False)

    # -- classification ------------------------------------------------

    def classify(self, x, y):
        """Region codes for points (x, y); accepts scalars or arrays."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        scalar = x.ndim == 0 and y.ndim == 0
        x, y = np.broadcast_arrays(np.atleast_1d(x), np.atleast_1d(y))
        # evaluate on the left half and mirror; this makes the mirror
        # symmetry of the classifier exact by construction
        out = self._classify_half(-np.abs(x), y)
        out = np.where((x > 0) & (out == Region.LEFT_WELL),
                       np.int8(Region.RIGHT_WELL), out)
        return out[0] if scalar else out

    def classify_point(self, p):
        return Region(int(self.classify(p[0], p[1])))

    def potential(self, x, y):
        """V on the finite regions; Outside is handled by node elimination."""
        region = np.asarray(self.classify(x, y))
        return np.where(region == Region.BARRIER, self.spec.barrier_height, 0.0)

    # -- boundary ------------------------------------------------------

    def loops(self, side):
        if side == "left":
            return self.left_loops
        if side == "right":
            return self.right_loops
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")

    def loop_lengths(self, side):
        return [sum(seg.length for seg in loop) for loop in self.loops(side)]

    def perimeter(self, side="left"):
        return sum(self.loop_lengths(side))

    @property
    def perimeter_total(self):
        """Hard-wall perimeter of both wells (barrier faces included)."""
        return self.perimeter("left") + self.perimeter("right")

    @property
    def area_total(self):
        return 2.0 * self.spec.well_area

    def boundary_point(self, side, s):
        """Point and inward unit normal at arc length s along the well boundary.

        A corner belongs to the segment that starts there.
        """
        total = self.perimeter(side)
        if not 0.0 <= s < total:
            raise ValueError(f"arc length {s} outside [0, {total})")
        for loop in self.loops(side):
            for seg in loop:
                if s < seg.length:
                    return seg.point_at(s), seg.normal_at(s)
                s -= seg.length
        seg = self.loops(side)[-1][-1]  # float residue at the very end
        return seg.point_at(seg.length), seg.normal_at(seg.length)

    def boundary_polyline(self, side, n_points):
        """(s, x, y, nx, ny) rows sampled uniformly in arc length."""
        total = self.perimeter(side)
        rows = np.empty((n_points, 5))
        for i in range(n_points):
            s = total * i / n_points
            p, nrm = self.boundary_point(side, s)
            rows[i] = (s, p[0], p[1], nrm[0], nrm[1])
        return rows

    def write_boundary_csv(self, side, n_points, path):
        """Export the boundary path as a CSV polyline."""
        from .csvio import write_csv
        write_csv(path, ["s", "x", "y", "nx", "ny"],
                  [tuple(row) for row in self.boundary_polyline(side, n_points)])


# ----------------------------------------------------------------------
# Shape builders (left-half classifiers + left-well loops)
# ----------------------------------------------------------------------
# Each builder returns (resolved, classify_half, left_loops, bbox,
# barrier_y_halfspan, left_interface_x_min).  classify_half sees x <= 0 only.

def _rect_like_barrier(hw, yspan):
    def barrier_mask(x, y):
        return (x >= -hw) & (np.abs(y) < yspan)
    return barrier_mask


def _build_rectangle(spec):
    hw = spec.barrier_width / 2.0
    ly = spec.params["ly"]
    lx = spec.well_area / ly
    x_out = -(hw + lx)
    barrier = _rect_like_barrier(hw, ly / 2.0)

    def classify_half(x, y):
        out = np.zeros(x.shape, dtype=np.int8)
        out[barrier(x, y)] = Region.BARRIER
        well = (x > x_out) & (x < -hw) & (np.abs(y) < ly / 2.0)
        out[well & (out == 0)] = Region.LEFT_WELL
        return out

    loops = [[
        Line((-hw, -ly / 2), (-hw, ly / 2)),
        Line((-hw, ly / 2), (x_out, ly / 2)),
        Line((x_out, ly / 2), (x_out, -ly / 2)),
        Line((x_out, -ly / 2), (-hw, -ly / 2)),
    ]]
    resolved = {"lx": lx, "ly": ly}
    return resolved, classify_half, loops, (x_out, -x_out, -ly / 2, ly / 2), ly / 2.0, -hw


def _build_circle(spec):
    r = math.sqrt(spec.well_area / math.pi)
    y_b = spec.params["cap_fraction"] * r
    if not y_b < r:
        raise GeometryError("cap_fraction must place the cap strictly inside the disk")
    # center offset c solved so the mean gap over |y| <= y_b equals the
    # barrier width:  mean gap = 2c - (2/y_b) * int_0^{y_b} sqrt(r^2-y^2) dy
    integral, _ = quad(lambda y: math.sqrt(r * r - y * y), 0.0, y_b)
    c = (spec.barrier_width + 2.0 * integral / y_b) / 2.0
    if c <= r:
        raise GeometryError("barrier_width too small: disks overlap (parameter barrier_width)")
    x_cap = math.sqrt(r * r - y_b * y_b)  # facing arc x relative to disk center

    def classify_half(x, y):
        out = np.zeros(x.shape, dtype=np.int8)
        inside_cap = np.abs(y) < y_b
        arc_x = -c + np.sqrt(np.maximum(r * r - y * y, 0.0))
        out[inside_cap & (x >= arc_x)] = Region.BARRIER
        well = (x + c) ** 2 + y ** 2 < r * r
        out[well & (out == 0)] = Region.LEFT_WELL
        return out

    phi = math.asin(y_b / r)
    loops = [[Arc((-c, 0.0), r, -phi, -phi + _TWO_PI)]]
    resolved = {"r": r, "center_offset": c, "y_b": y_b, "min_gap": 2.0 * (c - r)}
    return (resolved, classify_half, loops, (-(c + r), c + r, -r, r),
            y_b, -c + x_cap)


def _build_stadium(spec):
    hw = spec.barrier_width / 2.0
    cw = spec.params["cap_width"]
    cap_r = cw / 2.0
    a = (spec.well_area - math.pi * cap_r * cap_r) / cw
    if a <= 0:
        raise GeometryError("cap_width too large for well_area (parameter cap_width)")
    cx = -(hw + cap_r)            # stadium axis
    x_out = -(hw + cw)
    barrier = _rect_like_barrier(hw, a / 2.0)

    def classify_half(x, y):
        out = np.zeros(x.shape, dtype=np.int8)
        out[barrier(x, y)] = Region.BARRIER
        well = (x > x_out) & (x < -hw) & (np.abs(y) <= a / 2.0)
        well |= (x - cx) ** 2 + (np.abs(y) - a / 2.0) ** 2 < cap_r * cap_r
        well &= x < -hw
        out[well & (out == 0)] = Region.LEFT_WELL
        return out

    loops = [[
        Line((-hw, -a / 2), (-hw, a / 2)),
        Arc((cx, a / 2), cap_r, 0.0, math.pi),
        Line((x_out, a / 2), (x_out, -a / 2)),
        Arc((cx, -a / 2), cap_r, math.pi, _TWO_PI),
    ]]
    resolved = {"straight_length": a, "cap_width": cw}
    return (resolved, classify_half, loops,
            (x_out, -x_out, -(a / 2 + cap_r), a / 2 + cap_r), a / 2.0, -hw)


def _build_sinai(spec):
    hw = spec.barrier_width / 2.0
    lx, ly = spec.params["lx"], spec.params["ly"]
    excess = lx * ly - spec.well_area
    if excess <= 0:
        raise GeometryError("rectangle smaller than well_area (parameter lx)")
    r = math.sqrt(excess / math.pi)
    if 2.0 * r >= min(lx, ly):
        raise GeometryError("scatterer disk does not fit (parameter lx)")
    cx = -(hw + lx / 2.0)
    x_out = -(hw + lx)
    barrier = _rect_like_barrier(hw, ly / 2.0)

    def classify_half(x, y):
        out = np.zeros(x.shape, dtype=np.int8)
        out[barrier(x, y)] = Region.BARRIER
        well = ((x > x_out) & (x < -hw) & (np.abs(y) < ly / 2.0)
                & ((x - cx) ** 2 + y ** 2 > r * r))
        out[well & (out == 0)] = Region.LEFT_WELL
        return out

    loops = [
        [
            Line((-hw, -ly / 2), (-hw, ly / 2)),
            Line((-hw, ly / 2), (x_out, ly / 2)),
            Line((x_out, ly / 2), (x_out, -ly / 2)),
            Line((x_out, -ly / 2), (-hw, -ly / 2)),
        ],
        # inner scatterer, clockwise so the well interior stays on the left
        [Arc((cx, 0.0), r, 0.0, -_TWO_PI)],
    ]
    resolved = {"lx": lx, "ly": ly, "scatterer_radius": r}
    return resolved, classify_half, loops, (x_out, -x_out, -ly / 2, ly / 2), ly / 2.0, -hw


def _build_butterfly(spec):
    hw = spec.barrier_width / 2.0
    ly, sg = spec.params["ly"], spec.params["sagitta"]
    if sg >= ly / 2.0:
        raise GeometryError("sagitta too large (parameter sagitta)")
    lx = (spec.well_area + _circular_segment_area(ly, sg)) / ly
    x_far = -(hw + lx)
    r = _segment_radius(ly, sg)
    arc_cx = x_far - (r - sg)
    barrier = _rect_like_barrier(hw, ly / 2.0)

    def classify_half(x, y):
        out = np.zeros(x.shape, dtype=np.int8)
        out[barrier(x, y)] = Region.BARRIER
        arc_x = arc_cx + np.sqrt(np.maximum(r * r - y * y, 0.0))
        well = (x < -hw) & (np.abs(y) < ly / 2.0) & (x > arc_x)
        out[well & (out == 0)] = Region.LEFT_WELL
        return out

    phi = math.atan2(ly / 2.0, r - sg)
    loops = [[
        Line((-hw, -ly / 2), (-hw, ly / 2)),
        Line((-hw, ly / 2), (x_far, ly / 2)),
        Arc((arc_cx, 0.0), r, phi, -phi),
        Line((x_far, -ly / 2), (-hw, -ly / 2)),
    ]]
    resolved = {"lx": lx, "ly": ly, "indent_radius": r}
    return resolved, classify_half, loops, (x_far, -x_far, -ly / 2, ly / 2), ly / 2.0, -hw


def _build_concave(spec):
    hw = spec.barrier_width / 2.0
    ly, sg = spec.params["ly"], spec.params["sagitta"]
    if sg >= ly / 2.0:
        raise GeometryError("sagitta too large (parameter sagitta)")
    seg_far = _circular_segment_area(ly, sg)

    def area_of(lx):
        return lx * ly - seg_far - 2.0 * _circular_segment_area(lx, sg)

    lo, hi = spec.well_area / ly, spec.well_area / ly + 2.0
    try:
        lx = brentq(lambda v: area_of(v) - spec.well_area, lo, hi, xtol=1e-13)
    except ValueError as exc:
        raise GeometryError(f"cannot bracket area solve for lx: {exc}") from exc

    x_far = -(hw + lx)
    mid_x = -(hw + lx / 2.0)
    r_far = _segment_radius(ly, sg)
    far_cx = x_far - (r_far - sg)
    r_tb = _segment_radius(lx, sg)
    top_cy = ly / 2.0 - sg + r_tb     # top arc center (above the chord)
    barrier = _rect_like_barrier(hw, ly / 2.0)

    def classify_half(x, y):
        out = np.zeros(x.shape, dtype=np.int8)
        out[barrier(x, y)] = Region.BARRIER
        arc_far = far_cx + np.sqrt(np.maximum(r_far * r_far - y * y, 0.0))
        dx2 = np.maximum(r_tb * r_tb - (x - mid_x) ** 2, 0.0)
        y_top = top_cy - np.sqrt(dx2)
        well = ((x < -hw) & (x > arc_far) & (np.abs(x - mid_x) < r_tb)
                & (y < y_top) & (y > -y_top))
        out[well & (out == 0)] = Region.LEFT_WELL
        return out

    phi_far = math.atan2(ly / 2.0, r_far - sg)
    th_r = math.atan2(sg - r_tb, lx / 2.0)   # top arc angle at barrier-side corner
    th_l = math.atan2(sg - r_tb, -lx / 2.0)
    loops = [[
        Line((-hw, -ly / 2), (-hw, ly / 2)),
        Arc((mid_x, top_cy), r_tb, th_r, th_l),
        Arc((far_cx, 0.0), r_far, phi_far, -phi_far),
        Arc((mid_x, -top_cy), r_tb, -th_l, -th_r),
    ]]
    resolved = {"lx": lx, "ly": ly, "side_radius": r_far, "top_radius": r_tb}
    return resolved, classify_half, loops, (x_far, -x_far, -ly / 2, ly / 2), ly / 2.0, -hw


_BUILDERS = {
    "rectangle": _build_rectangle,
    "circle": _build_circle,
    "stadium": _build_stadium,
    "sinai": _build_sinai,
    "butterfly": _build_butterfly,
    "concave": _build_concave,
}


def build_double_well(spec):
    """Resolve free parameters for per-well area and assemble the geometry."""
    if isinstance(spec, str):
        spec = ShapeSpec(kind=spec)
    resolved, classify_half, left_loops, bbox, yspan, iface = _BUILDERS[spec.kind](spec)
    return DoubleWellGeometry(
        spec=spec,
        resolved=resolved,
        left_loops=left_loops,
        right_loops=_mirror_loops(left_loops),
        bbox=bbox,
        barrier_y_halfspan=yspan,
        left_interface_x_min=iface,
        _classify_half=classify_half,
    )


# ----------------------------------------------------------------------
# Monte-Carlo area
# ----------------------------------------------------------------------

def region_area(g, region, n_samples, seed, chunk=1_000_000):
    """Monte-Carlo area of one region over the bounding box.

    Returns (area_estimate, standard_error); reproducible for a fixed seed.
    """
    if n_samples < 10_000:
        raise ValueError("n_samples must be >= 10^4")
    xmin, xmax, ymin, ymax = g.bbox
    box_area = (xmax - xmin) * (ymax - ymin)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    hits = 0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        x = rng.uniform(xmin, xmax, m)
        y = rng.uniform(ymin, ymax, m)
        hits += int(np.count_nonzero(g.classify(x, y) == region))
        done += m
    p = hits / n_samples
    area = p * box_area
    stderr = box_area * math.sqrt(max(p * (1.0 - p), 0.0) / n_samples)
    return area, stderr
