"""Hand positions to reference tuple to attitude/altitude setpoints.

Two screen zones, each with a nested dead rect. The left hand in zone 1
commands height (vertical axis) and yaw (horizontal); the right hand in
zone 2 commands pitch (vertical) and roll (horizontal). Deflection from a
zone's center, normalized by the outer half-width, gives a component of
r = (r1, r2, r3, r4), each in [-1, 1].
"""

from __future__ import annotations

from typing import NamedTuple

from .pose import HandPair


class Rect(NamedTuple):
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)


class Zone(NamedTuple):
    outer: Rect
    dead: Rect
    center: tuple[float, float]


def make_zone(outer: Rect, dead: Rect) -> Zone:
    # Center is the outer midpoint, which puts |r| = 1 exactly on the outer edge.
    return Zone(outer=outer, dead=dead, center=outer.center)


class ReferenceVector(NamedTuple):
    r1: float  # height
    r2: float  # yaw
    r3: float  # pitch
    r4: float  # roll


ZERO_REFERENCE = ReferenceVector(0.0, 0.0, 0.0, 0.0)


class ScalingFactors(NamedTuple):
    s_z: float      # m per tick
    s_phi: float    # rad, absolute
    s_theta: float  # rad, absolute
    s_psi: float    # rad per tick


class Setpoints(NamedTuple):
    phi: float    # roll, rad
    theta: float  # pitch, rad
    psi: float    # yaw, rad, integrated
    z: float      # height, m, integrated


def map_axis(p: float, outer_lo: float, dead_lo: float, dead_hi: float,
             outer_hi: float, center: float, *,
             rescale_continuous: bool = False, clamp_outside: bool = False) -> float:
    """One axis of the zone map.

    Dead interval (closed) yields 0. The active band [outer_lo, dead_lo) and
    (dead_hi, outer_hi] yields (center - p) / half-width of the outer interval,
    so the outer boundary itself maps to +/-1 when the bands are centered.
    Outside the outer interval: 0, unless clamp_outside holds the edge value.
    rescale_continuous removes the jump at the dead edge by stretching each
    active band from 0 at the dead edge to the full value at the outer edge.
    """
    if not outer_lo < dead_lo < dead_hi < outer_hi:
        raise ValueError("axis bands must satisfy outer_lo < dead_lo < dead_hi < outer_hi")
    if p < outer_lo or p > outer_hi:
        if not clamp_outside:
            return 0.0
        p = outer_lo if p < outer_lo else outer_hi
    if dead_lo <= p <= dead_hi:
        return 0.0
    if rescale_continuous:
        if p < dead_lo:
            return (dead_lo - p) / (dead_lo - outer_lo) * ((center - outer_lo) / ((outer_hi - outer_lo) / 2.0))
        return (dead_hi - p) / (outer_hi - dead_hi) * ((outer_hi - center) / ((outer_hi - outer_lo) / 2.0))
    return (center - p) / ((outer_hi - outer_lo) / 2.0)


def _clip(v: float) -> float:
    return -1.0 if v < -1.0 else 1.0 if v > 1.0 else v


def make_reference(hands: HandPair, zone1: Zone, zone2: Zone, *,
                   armed: bool = True, rescale_continuous: bool = False,
                   clamp_outside: bool = False) -> ReferenceVector:
    """Both hands through both zones. Disarmed output is all zeros.

    Hand above a zone center (smaller image y) gives positive r1/r3; hand left
    of center gives positive r2/r4.
    """
    if not armed:
        return ZERO_REFERENCE
    lx, ly = hands.left
    rx, ry = hands.right
    kw = dict(rescale_continuous=rescale_continuous, clamp_outside=clamp_outside)
    r1 = map_axis(ly, zone1.outer.y_min, zone1.dead.y_min, zone1.dead.y_max,
                  zone1.outer.y_max, zone1.center[1], **kw)
    r2 = map_axis(lx, zone1.outer.x_min, zone1.dead.x_min, zone1.dead.x_max,
                  zone1.outer.x_max, zone1.center[0], **kw)
    r3 = map_axis(ry, zone2.outer.y_min, zone2.dead.y_min, zone2.dead.y_max,
                  zone2.outer.y_max, zone2.center[1], **kw)
    r4 = map_axis(rx, zone2.outer.x_min, zone2.dead.x_min, zone2.dead.x_max,
                  zone2.outer.x_max, zone2.center[0], **kw)
    return ReferenceVector(_clip(r1), _clip(r2), _clip(r3), _clip(r4))


def hands_in_dead_zones(hands: HandPair, zone1: Zone, zone2: Zone) -> bool:
    """Arming condition: left hand inside zone 1's dead rect, right inside zone 2's."""
    return (zone1.dead.contains(*hands.left) and zone2.dead.contains(*hands.right))


def integrate_setpoints(prev: Setpoints, r: ReferenceVector, s: ScalingFactors) -> Setpoints:
    """One reference tick: roll/pitch are direct, yaw/height accumulate."""
    return Setpoints(
        phi=r.r4 * s.s_phi,
        theta=r.r3 * s.s_theta,
        psi=prev.psi + r.r2 * s.s_psi,
        z=prev.z + r.r1 * s.s_z,
    )


def joy_to_reference(axes, axis_map=(0, 1, 2, 3), invert=(False, False, False, False)) -> ReferenceVector:
    """Gamepad axes to the same reference type the pose path produces."""
    if len(axes) != 4:
        raise ValueError(f"expected 4 axes, got {len(axes)}")
    vals = []
    for i in range(4):
        v = float(axes[axis_map[i]])
        if invert[i]:
            v = -v
        vals.append(_clip(v))
    return ReferenceVector(*vals)
