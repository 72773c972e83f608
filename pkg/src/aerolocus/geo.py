"""Coordinate transforms between WGS84 lat/lon, a local flat metric plane,
the localization-map pixel grid, and the 0-100 regression space.

The region of interest is small enough (tens of km) that a flat local
tangent plane is adequate: one degree of latitude is METERS_PER_DEG
meters everywhere, and one degree of longitude is scaled by the cosine
of the frame origin's latitude.  Pixel convention for the localization
grid: integer (row, col) addresses the center of that cell, row 0 is the
northern edge, and rows grow southward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import OutOfFrame, OutOfRange

# Equirectangular small-area approximation: meters per degree of latitude.
METERS_PER_DEG = 111320.0


class GeoPoint(NamedTuple):
    lat: float
    lon: float


class LocalXY(NamedTuple):
    """Meters east (x) and north (y) of the frame origin."""
    x: float
    y: float


class PixelCoord(NamedTuple):
    """Fractional localization-grid coordinates; may lie outside the grid."""
    row: float
    col: float


@dataclass(frozen=True)
class RegionFrame:
    """Georeferenced flat rectangle tying all coordinate spaces together.

    ``origin`` is the south-west corner.  The localization grid is
    ``locmap_px`` pixels on a side and must cover the frame with square
    pixels, i.e. width_m / locmap_px == height_m / locmap_px.
    """

    origin: GeoPoint
    width_m: float
    height_m: float
    locmap_px: int = 128

    def __post_init__(self):
        if self.width_m <= 0 or self.height_m <= 0:
            raise ValueError("frame extents must be positive")
        if self.locmap_px < 2:
            raise ValueError("locmap_px must be at least 2")
        if not (-90.0 <= self.origin.lat <= 90.0 and -180.0 <= self.origin.lon <= 180.0):
            raise ValueError("origin must be a valid WGS84 point")
        if abs(self.width_m / self.locmap_px - self.height_m / self.locmap_px) > 1e-9:
            raise ValueError("localization-grid pixels must be square")

    @property
    def pixel_m(self) -> float:
        """Meters per localization-grid pixel."""
        return self.width_m / self.locmap_px

    @property
    def cos_lat(self) -> float:
        return math.cos(math.radians(self.origin.lat))

    def to_json_dict(self) -> dict:
        return {
            "origin_lat": self.origin.lat,
            "origin_lon": self.origin.lon,
            "width_m": self.width_m,
            "height_m": self.height_m,
            "locmap_px": self.locmap_px,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "RegionFrame":
        return cls(
            origin=GeoPoint(float(d["origin_lat"]), float(d["origin_lon"])),
            width_m=float(d["width_m"]),
            height_m=float(d["height_m"]),
            locmap_px=int(d.get("locmap_px", 128)),
        )


def latlon_to_local(p: GeoPoint, f: RegionFrame) -> LocalXY:
    """Project onto the frame's flat tangent plane (meters east/north of origin)."""
    y = (p.lat - f.origin.lat) * METERS_PER_DEG
    x = (p.lon - f.origin.lon) * METERS_PER_DEG * f.cos_lat
    return LocalXY(x, y)


def local_to_latlon(q: LocalXY, f: RegionFrame) -> GeoPoint:
    """Exact algebraic inverse of :func:`latlon_to_local`."""
    lat = f.origin.lat + q.y / METERS_PER_DEG
    lon = f.origin.lon + q.x / (METERS_PER_DEG * f.cos_lat)
    return GeoPoint(lat, lon)


def local_to_locmap(q: LocalXY, f: RegionFrame) -> PixelCoord:
    """Local meters to fractional grid coordinates; no clamping."""
    col = q.x / f.pixel_m - 0.5
    row = (f.height_m - q.y) / f.pixel_m - 0.5
    return PixelCoord(row, col)


def locmap_to_local(c: PixelCoord, f: RegionFrame) -> LocalXY:
    """Exact algebraic inverse of :func:`local_to_locmap`."""
    x = (c.col + 0.5) * f.pixel_m
    y = f.height_m - (c.row + 0.5) * f.pixel_m
    return LocalXY(x, y)


def in_frame(p: GeoPoint, f: RegionFrame) -> bool:
    q = latlon_to_local(p, f)
    return 0.0 <= q.x <= f.width_m and 0.0 <= q.y <= f.height_m


def latlon_to_regression(p: GeoPoint, f: RegionFrame) -> tuple[float, float]:
    """Linear map of the frame onto [0, 100] x [0, 100].

    Raises OutOfFrame for points beyond the frame bounds.
    """
    q = latlon_to_local(p, f)
    if not (0.0 <= q.x <= f.width_m and 0.0 <= q.y <= f.height_m):
        raise OutOfFrame(f"point {p} lies outside the frame")
    return 100.0 * q.x / f.width_m, 100.0 * q.y / f.height_m


def regression_to_latlon(r: tuple[float, float], f: RegionFrame) -> GeoPoint:
    """Exact inverse of :func:`latlon_to_regression` on [0, 100]^2."""
    rx, ry = r
    if not (0.0 <= rx <= 100.0 and 0.0 <= ry <= 100.0):
        raise OutOfRange(f"regression coordinates {r} outside [0, 100]")
    return local_to_latlon(LocalXY(rx * f.width_m / 100.0, ry * f.height_m / 100.0), f)


def planar_distance_m(a: GeoPoint, b: GeoPoint) -> float:
    """Flat-plane distance in meters, longitude scaled at the mean latitude."""
    dy = (a.lat - b.lat) * METERS_PER_DEG
    dx = (a.lon - b.lon) * METERS_PER_DEG * math.cos(math.radians(0.5 * (a.lat + b.lat)))
    return math.hypot(dx, dy)


def local_distance_m(a: LocalXY, b: LocalXY) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)
