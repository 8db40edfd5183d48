"""Classical single-well billiard dynamics.

Specular reflection inside one well of a double-well geometry (the
barrier face is a hard wall classically).  Collisions are found against
the exact line/arc segments of the boundary path; arcs are intersected
analytically, never polygonized.  Bounce maps use Birkhoff coordinates
(s, c): arc length of the collision point and the sine of the incidence
angle, signed positive when the incoming tangential velocity points
toward increasing s.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Arc, Line

EPS_GEOM = 1e-9     # corner window and minimum travel distance
EPS_TANGENT = 1e-10


class GeometryLeak(RuntimeError):
    """A ray found no boundary intersection: inconsistent geometry."""


@dataclass(frozen=True)
class BounceState:
    s: float
    c: float


@dataclass(frozen=True)
class WellBoundary:
    """Flattened boundary of one well: segments with arc-length offsets."""
    segments: tuple
    offsets: tuple
    total_length: float

    @classmethod
    def from_geometry(cls, g, side="left"):
        segs, offs = [], []
        pos = 0.0
        for loop in g.loops(side):
            for seg in loop:
                segs.append(seg)
                offs.append(pos)
                pos += seg.length
        return cls(segments=tuple(segs), offsets=tuple(offs), total_length=pos)

    def locate(self, s):
        """(segment index, local arc length) for global arc length s."""
        s = s % self.total_length
        i = bisect.bisect_right(self.offsets, s) - 1
        return i, s - self.offsets[i]

    def point_normal_tangent(self, s):
        i, t = self.locate(s)
        seg = self.segments[i]
        t = min(max(t, 0.0), seg.length)
        return seg.point_at(t), seg.normal_at(t), seg.tangent_at(t)


def reflect(v, n):
    """Specular reflection v' = v - 2 (v.n) n; requires an approaching ray."""
    v = np.asarray(v, dtype=float)
    n = np.asarray(n, dtype=float)
    vn = float(v @ n)
    if vn >= 0.0:
        raise ValueError(f"ray leaves the surface: v.n = {vn:.3e} >= 0")
    out = v - 2.0 * vn * n
    return out / np.linalg.norm(out)


def _line_intersections(seg, origin, direction):
    d = (seg.p1[0] - seg.p0[0], seg.p1[1] - seg.p0[1])
    denom = direction[0] * d[1] - direction[1] * d[0]
    if abs(denom) < 1e-14:
        return []
    rx, ry = seg.p0[0] - origin[0], seg.p0[1] - origin[1]
    t = (rx * d[1] - ry * d[0]) / denom
    u = (rx * direction[1] - ry * direction[0]) / denom
    length = seg.length
    if t <= EPS_GEOM or u < -1e-12 / length or u > 1.0 + 1e-12 / length:
        return []
    return [(t, min(max(u, 0.0), 1.0) * length)]

def _arc_intersections(seg, origin, direction):
    ox, oy = origin[0] - seg.center[0], origin[1] - seg.center[1]
    b = ox * direction[0] + oy * direction[1]
    disc = b * b - (ox * ox + oy * oy - seg.radius * seg.radius)
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    hits = []
    sweep = seg.sweep
    for t in (-b - sq, -b + sq):
        if t <= EPS_GEOM:
            continue
        px = ox + t * direction[0]
        py = oy + t * direction[1]
        theta = math.atan2(py, px)
        if sweep >= 0:
            a = (theta - seg.theta0) % (2.0 * math.pi)
        else:
            a = (seg.theta0 - theta) % (2.0 * math.pi)
        s_local = a * seg.radius
        if s_local <= abs(sweep) * seg.radius + 1e-9:
            hits.append((t, s_local))
    return hits


@dataclass(frozen=True)
class Collision:
    point: np.ndarray
    segment: int
    distance: float
    bounce: BounceState
    flag: str | None = None     # None, 'corner', or 'tangent'


def next_collision(well, origin, direction):
    """Nearest boundary collision of a ray strictly inside the well.

    Raises GeometryLeak if no segment is hit.  Corner hits (within
    EPS_GEOM of a segment endpoint) and near-tangent hits are returned
    flagged; callers terminate such trajectories.
    """
    best = None
    for i, seg in enumerate(well.segments):
        finder = _arc_intersections if isinstance(seg, Arc) else _line_intersections
        for t, s_local in finder(seg, origin, direction):
            if best is None or t < best[0]:
                best = (t, i, s_local)
    if best is None:
        raise GeometryLeak(f"no intersection from {tuple(origin)} toward {tuple(direction)}")
    t, i, s_local = best
    seg = well.segments[i]
    point = seg.point_at(s_local)
    normal = seg.normal_at(s_local)
    tangent = seg.tangent_at(s_local)
    c = float(direction @ tangent)
    if abs(c) > 1.0:
        if abs(c) > 1.0 + 1e-12:
            raise GeometryLeak(f"|c| = {abs(c)} > 1 at s = {well.offsets[i] + s_local}")
        c = math.copysign(1.0, c)
    flag = None
    if s_local < EPS_GEOM or seg.length - s_local < EPS_GEOM:
        flag = "corner"
    elif abs(float(direction @ normal)) < EPS_TANGENT:
        flag = "tangent"
    s = well.offsets[i] + s_local
    if s >= well.total_length:
        s -= well.total_length
    return Collision(point=point, segment=i, distance=t,
                     bounce=BounceState(s=s, c=c), flag=flag)


def launch_direction(well, state):
    """Outgoing unit velocity of a bounce state (tangential c preserved)."""
    _, normal, tangent = well.point_normal_tangent(state.s)
    c = min(max(state.c, -1.0), 1.0)
    return c * tangent + math.sqrt(max(1.0 - c * c, 0.0)) * normal


def step(well, state):
    """One application of the bounce map; returns a flagged Collision."""
    point, _, _ = well.point_normal_tangent(state.s)
    return next_collision(well, point, launch_direction(well, state))


@dataclass
class TraceResult:
    states: list
    termination: str | None = None   # 'corner' / 'tangent', else None
    terminated_at: int | None = None


def trace(well, initial, n_bounces):
    """Iterate the bounce map n_bounces times from an initial (s, c).

    The initial condition is not included in the output; early termination
    (corner or tangency) reports the reason and the bounce index.
    """
    if n_bounces < 1:
        raise ValueError("n_bounces must be >= 1")
    states = []
    origin, _, _ = well.point_normal_tangent(initial.s)
    direction = launch_direction(well, initial)
    for k in range(n_bounces):
        col = next_collision(well, origin, direction)
        states.append(col.bounce)
        if col.flag is not None:
            return TraceResult(states=states, termination=col.flag, terminated_at=k)
        normal, _ = _normal_tangent_of(well, col)
        try:
            direction = reflect(direction, normal)
        except ValueError:
            return TraceResult(states=states, termination="tangent", terminated_at=k)
        origin = col.point
    return TraceResult(states=states)


def _normal_tangent_of(well, col):
    seg = well.segments[col.segment]
    t = col.bounce.s - well.offsets[col.segment]
    t = min(max(t, 0.0), seg.length)
    return seg.normal_at(t), seg.tangent_at(t)


def poincare_section(well, n_traj=400, n_bounces=400, seed=0):
    """Bounce-map sampling: uniform random initial conditions in (s, c).

    Returns an (n_rows, 4) array with columns (trajectory, bounce, s, c);
    early-terminated trajectories contribute their prefix.  Per-trajectory
    RNG streams are derived from (seed, trajectory) so results do not
    depend on execution order.
    """
    rows = []
    for traj in range(n_traj):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, traj))))
        s0 = rng.uniform(0.0, well.total_length)
        c0 = rng.uniform(-1.0, 1.0)
        if abs(c0) >= 1.0 - 1e-12:
            c0 *= 0.5
        result = trace(well, BounceState(s=s0, c=c0), n_bounces)
        for k, st in enumerate(result.states):
            rows.append((traj, k, st.s, st.c))
    return np.array(rows, dtype=float)


def chaos_indicator(well, initial, n_bounces=400, delta0=1e-9):
    """Mean exponential separation rate per bounce (nats).

    Benettin-style two-trajectory estimate in normalized (s/L, c/2)
    coordinates with renormalization to delta0 after every bounce.  The
    first half of the bounces lets the separation align with the most
    expanding direction and is excluded from the average, so integrable
    shear (linear separation growth) reads as ~0 rather than a slow
    transient tail.  Raises if either trajectory terminates before 50
    bounces.
    """
    if delta0 > 1e-8:
        raise ValueError("delta0 must be <= 1e-8")
    L = well.total_length
    ref = BounceState(s=initial.s % L, c=min(max(initial.c, -1.0 + 1e-9), 1.0 - 1e-9))
    off = delta0 / math.sqrt(2.0)
    pert = BounceState(s=(ref.s + off * L) % L,
                       c=ref.c - math.copysign(2.0 * off, ref.c))
    logs = []
    for k in range(n_bounces):
        col_r = step(well, ref)
        col_p = step(well, pert)
        if col_r.flag or col_p.flag:
            if k < 50:
                raise RuntimeError(
                    f"trajectory terminated ({col_r.flag or col_p.flag}) at bounce {k} < 50")
            break
        ref, new_p = col_r.bounce, col_p.bounce
        ds = (new_p.s - ref.s + L / 2.0) % L - L / 2.0
        dc = new_p.c - ref.c
        d = math.hypot(ds / L, dc / 2.0)
        if d <= 0.0:
            d = 1e-300
        logs.append(math.log(d / delta0))
        f = delta0 / d
        pert = BounceState(s=(ref.s + ds * f) % L,
                           c=min(max(ref.c + dc * f, -1.0), 1.0))
    if not logs:
        raise RuntimeError("no complete bounces")
    tail = logs[len(logs) // 2:]
    return float(np.mean(tail))


def mean_chaos_indicator(well, n_traj=400, n_bounces=400, seed=0, delta0=1e-9):
    """Average chaos indicator over seeded random initial conditions."""
    vals = []
    for traj in range(n_traj):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, traj))))
        s0 = rng.uniform(0.0, well.total_length)
        c0 = rng.uniform(-0.999, 0.999)
        try:
            vals.append(chaos_indicator(well, BounceState(s=s0, c=c0),
                                        n_bounces=n_bounces, delta0=delta0))
        except RuntimeError:
            continue
    if not vals:
        raise RuntimeError("all trajectories terminated early")
    return float(np.mean(vals))
