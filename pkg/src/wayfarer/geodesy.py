"""Geographic math: great-circle distance, bearing, and a local planar frame.

Everything assumes a spherical Earth with the mean radius (6,371 km); at the
sub-10 km scales an episode covers, the ellipsoidal correction is far below
consumer GPS noise. The execution frame is an equirectangular tangent plane
anchored at a fixed origin: x grows east, y grows north, both in meters.
Yaw is radians, counterclockwise-positive, zero along +x (east). Bearings
are the usual navigation convention (zero at north, clockwise-positive) and
are converted at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateSegment, OutOfFrameRange

EARTH_RADIUS_M = 6_371_000.0

# Tangent-plane validity limit; beyond this the equirectangular error grows
# past what the arrival checks tolerate.
MAX_FRAME_RANGE_M = 50_000.0


def wrap_angle(a: float) -> float:
    """Normalize an angle in radians into (-pi, pi]."""
    r = math.fmod(a + math.pi, 2.0 * math.pi)
    if r <= 0.0:
        r += 2.0 * math.pi
    return r - math.pi


@dataclass(frozen=True)
class GeoPoint:
    """WGS84 latitude/longitude in degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError(f"non-finite coordinates ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class LocalPose:
    """Planar pose in a LocalFrame: meters east/north plus yaw in (-pi, pi]."""

    x: float
    y: float
    yaw: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.yaw)):
            raise ValueError(f"non-finite pose ({self.x}, {self.y}, {self.yaw})")
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class LocalFrame:
    """Equirectangular tangent plane anchored at `origin` for one episode."""

    origin: GeoPoint


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points, in meters."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def bearing(a: GeoPoint, b: GeoPoint) -> float:
    """Initial great-circle bearing from a to b.

    Radians in (-pi, pi], zero at north, clockwise-positive (east = +pi/2).
    Raises DegenerateSegment when the points are closer than 1e-9 m.
    """
    if haversine_distance(a, b) < 1e-9:
        raise DegenerateSegment(f"cannot take bearing over a {a} -> {b} segment")
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dlam = math.radians(b.lon - a.lon)
    y = math.sin(dlam) * math.cos(phi2)
    x = math.cos(phi1) * math.sin(phi2) - math.sin(phi1) * math.cos(phi2) * math.cos(dlam)
    return wrap_angle(math.atan2(y, x))


def to_local(frame: LocalFrame, p: GeoPoint) -> tuple[float, float]:
    """Project a GeoPoint into frame-relative (x east, y north) meters."""
    if haversine_distance(frame.origin, p) > MAX_FRAME_RANGE_M:
        raise OutOfFrameRange(f"{p} is beyond {MAX_FRAME_RANGE_M / 1000:.0f} km of the frame origin")
    lat0 = math.radians(frame.origin.lat)
    x = EARTH_RADIUS_M * math.radians(p.lon - frame.origin.lon) * math.cos(lat0)
    y = EARTH_RADIUS_M * math.radians(p.lat - frame.origin.lat)
    return (x, y)


def to_geo(frame: LocalFrame, x: float, y: float) -> GeoPoint:
    """Inverse of to_local: lift frame-relative meters back to a GeoPoint."""
    if math.hypot(x, y) > MAX_FRAME_RANGE_M:
        raise OutOfFrameRange(f"({x:.1f}, {y:.1f}) m is beyond the tangent-plane range")
    lat0 = math.radians(frame.origin.lat)
    lat = frame.origin.lat + math.degrees(y / EARTH_RADIUS_M)
    lon = frame.origin.lon + math.degrees(x / (EARTH_RADIUS_M * math.cos(lat0)))
    return GeoPoint(lat, lon)


def bearing_to_yaw(b: float) -> float:
    """Convert a north-referenced clockwise bearing to a local-frame yaw."""
    return wrap_angle(math.pi / 2.0 - b)


def yaw_to_bearing(yaw: float) -> float:
    """Convert a local-frame yaw to a north-referenced clockwise bearing."""
    return wrap_angle(math.pi / 2.0 - yaw)
