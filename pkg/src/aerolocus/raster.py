"""Road-vector rasterization and raster I/O.

A road network is a set of georeferenced polylines.  Rasterization is
distance-based: a pixel is road iff its center lies within half the road
thickness (Euclidean, in meters) of any polyline segment.  Ground-truth
localization maps are rendered as small dots with a 1-pixel linear edge
ramp so that a probability-weighted centroid recovers the sub-pixel dot
center.

File formats:
- road vectors: JSON ``{"frame": {...}, "roads": [[[lat, lon], ...], ...]}``
- Mask / ProbMap: binary PGM (P5, maxval 255); probabilities quantized
  linearly to 0..255 on write and divided by 255 on read (lossy).
  Georeferencing rides in a PGM comment line and is restored on read.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IoFailure, OutOfFrame
from .geo import (GeoPoint, LocalXY, RegionFrame, in_frame, latlon_to_local,
                  local_to_locmap)

log = logging.getLogger(__name__)

# Two distinct polylines passing within this distance share an intersection.
INTERSECTION_TOL_M = 0.5


@dataclass(frozen=True)
class Polyline:
    """Ordered sequence of at least two distinct geographic vertices."""

    points: tuple[GeoPoint, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("polyline needs at least 2 points")
        for a, b in zip(self.points, self.points[1:]):
            if a == b:
                raise ValueError("consecutive polyline points must be distinct")


@dataclass
class RoadNetwork:
    """Georeferenced road polylines plus derived, cached geometry."""

    roads: tuple[Polyline, ...]
    frame: RegionFrame
    _segments: np.ndarray | None = field(default=None, repr=False)
    _seg_polyline: np.ndarray | None = field(default=None, repr=False)
    _intersections: tuple[GeoPoint, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.roads = tuple(self.roads)
        for pl in self.roads:
            for p in pl.points:
                if not in_frame(p, self.frame):
                    raise ValueError(f"polyline point {p} outside the frame")

    def segments_local(self) -> tuple[np.ndarray, np.ndarray]:
        """All segments as an (n, 4) array (x1, y1, x2, y2) in local meters,
        with an (n,) array of owning polyline indices.  Cached."""
        if self._segments is None:
            segs, owner = [], []
            for pi, pl in enumerate(self.roads):
                loc = [latlon_to_local(p, self.frame) for p in pl.points]
                for a, b in zip(loc, loc[1:]):
                    segs.append((a.x, a.y, b.x, b.y))
                    owner.append(pi)
            self._segments = np.asarray(segs, dtype=np.float64).reshape(-1, 4)
            self._seg_polyline = np.asarray(owner, dtype=np.int64)
        return self._segments, self._seg_polyline

    @property
    def intersections(self) -> tuple[GeoPoint, ...]:
        if self._intersections is None:
            self._intersections = tuple(find_intersections(self))
        return self._intersections

    def to_json(self) -> str:
        doc = {
            "frame": self.frame.to_json_dict(),
            "roads": [[[p.lat, p.lon] for p in pl.points] for pl in self.roads],
        }
        return json.dumps(doc, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RoadNetwork":
        doc = json.loads(text)
        frame = RegionFrame.from_json_dict(doc["frame"])
        roads = tuple(Polyline(tuple(GeoPoint(float(lat), float(lon)) for lat, lon in pl))
                      for pl in doc["roads"])
        return cls(roads=roads, frame=frame)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "RoadNetwork":
        try:
            return cls.from_json(Path(path).read_text())
        except OSError as e:
            raise IoFailure(str(e)) from e


@dataclass
class Mask:
    """Binary raster with window georeferencing.

    ``origin_local`` is the outer corner of the south-west cell, i.e. of
    pixel (height-1, 0); row 0 is the northern edge.
    """

    values: np.ndarray
    meters_per_pixel: float
    origin_local: LocalXY

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.uint8)
        if self.values.ndim != 2:
            raise ValueError("mask values must be a 2-D grid")
        if not np.isin(self.values, (0, 1)).all():
            raise ValueError("mask values must be strictly binary")
        if self.meters_per_pixel <= 0:
            raise ValueError("meters_per_pixel must be positive")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def is_empty(self) -> bool:
        return not bool(self.values.any())

    def pixel_center_local(self, row: float, col: float) -> LocalXY:
        x = self.origin_local.x + (col + 0.5) * self.meters_per_pixel
        y = self.origin_local.y + (self.height - row - 0.5) * self.meters_per_pixel
        return LocalXY(x, y)


@dataclass
class ProbMap:
    """Same geometry as :class:`Mask` with real values in [0, 1]."""

    values: np.ndarray
    meters_per_pixel: float
    origin_local: LocalXY

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("map values must be a 2-D grid")
        if self.values.size and (self.values.min() < 0.0 or self.values.max() > 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.meters_per_pixel <= 0:
            raise ValueError("meters_per_pixel must be positive")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _pixel_centers(size_px: int, meters_per_pixel: float,
                   origin: LocalXY) -> tuple[np.ndarray, np.ndarray]:
    """x centers per column and y centers per row, in local meters."""
    cols = origin.x + (np.arange(size_px) + 0.5) * meters_per_pixel
    rows = origin.y + (size_px - np.arange(size_px) - 0.5) * meters_per_pixel
    return cols, rows


def _window_origin(center: LocalXY, size_px: int, meters_per_pixel: float) -> LocalXY:
    half = 0.5 * size_px * meters_per_pixel
    return LocalXY(center.x - half, center.y - half)


def rasterize_roads(net: RoadNetwork, window_center: LocalXY, size_px: int,
                    meters_per_pixel: float, thickness_m: float) -> Mask:
    """Render roads into a square window centered at ``window_center``.

    A pixel is set iff its center is within thickness_m / 2 of some
    segment.  An all-zero result is returned (with a warning) when no
    road touches the window.
    """
    if size_px < 1:
        raise ValueError("size_px must be at least 1")
    if thickness_m <= 0:
        raise ValueError("thickness_m must be positive")

    origin = _window_origin(window_center, size_px, meters_per_pixel)
    half = 0.5 * thickness_m
    out = np.zeros((size_px, size_px), dtype=np.uint8)

    segs, _ = net.segments_local()
    if segs.size:
        win_m = size_px * meters_per_pixel
        # Cull segments whose inflated bbox misses the window.
        lo_x = np.minimum(segs[:, 0], segs[:, 2]) - half
        hi_x = np.maximum(segs[:, 0], segs[:, 2]) + half
        lo_y = np.minimum(segs[:, 1], segs[:, 3]) - half
        hi_y = np.maximum(segs[:, 1], segs[:, 3]) + half
        keep = ((hi_x >= origin.x) & (lo_x <= origin.x + win_m) &
                (hi_y >= origin.y) & (lo_y <= origin.y + win_m))
        xs, ys = _pixel_centers(size_px, meters_per_pixel, origin)
        for x1, y1, x2, y2 in segs[keep]:
            c0 = max(0, int(np.floor((min(x1, x2) - half - origin.x) / meters_per_pixel)))
            c1 = min(size_px - 1, int(np.ceil((max(x1, x2) + half - origin.x) / meters_per_pixel)))
            y_top = origin.y + size_px * meters_per_pixel
            r0 = max(0, int(np.floor((y_top - (max(y1, y2) + half)) / meters_per_pixel)))
            r1 = min(size_px - 1, int(np.ceil((y_top - (min(y1, y2) - half)) / meters_per_pixel)))
            if c0 > c1 or r0 > r1:
                continue
            px = xs[c0:c1 + 1][None, :] - x1
            py = ys[r0:r1 + 1][:, None] - y1
            dx, dy = x2 - x1, y2 - y1
            t = np.clip((px * dx + py * dy) / (dx * dx + dy * dy), 0.0, 1.0)
            d2 = (px - t * dx) ** 2 + (py - t * dy) ** 2
            out[r0:r1 + 1, c0:c1 + 1] |= (d2 <= half * half).astype(np.uint8)

    mask = Mask(out, meters_per_pixel, origin)
    if mask.is_empty:
        log.warning("empty window at center (%.1f, %.1f)", window_center.x, window_center.y)
    return mask


def render_locmap_dot(p: GeoPoint, f: RegionFrame, radius_px: float = 1.5) -> ProbMap:
    """Ground-truth localization map: a dot of ``radius_px`` at ``p``.

    Pixels within radius_px - 0.5 of the dot center get value 1; the value
    then ramps linearly to 0 over one pixel, so the dot's sub-pixel center
    is recoverable from a weighted centroid.  Raises OutOfFrame when ``p``
    is not inside ``f``.
    """
    if radius_px <= 0:
        raise ValueError("radius_px must be positive")
    if not in_frame(p, f):
        raise OutOfFrame(f"dot location {p} outside the frame")

    c = local_to_locmap(latlon_to_local(p, f), f)
    n = f.locmap_px
    rows = np.arange(n)[:, None] - c.row
    cols = np.arange(n)[None, :] - c.col
    d = np.sqrt(rows * rows + cols * cols)
    values = np.clip(radius_px + 0.5 - d, 0.0, 1.0)
    return ProbMap(values, f.pixel_m, LocalXY(0.0, 0.0))


def _dedup_points(pts: np.ndarray, tol: float) -> np.ndarray:
    """Greedy dedup keeping the first representative of each tol-cluster."""
    kept: list[np.ndarray] = []
    for p in pts:
        if all((p[0] - k[0]) ** 2 + (p[1] - k[1]) ** 2 > tol * tol for k in kept):
            kept.append(p)
    return np.asarray(kept).reshape(-1, 2)


def find_intersections(net: RoadNetwork) -> list[GeoPoint]:
    """Crossing points and shared endpoints between distinct polylines.

    Points closer than INTERSECTION_TOL_M collapse to the first one found;
    results follow segment-pair scan order.
    """
    if not net.roads:
        raise ValueError("road network is empty")
    segs, owner = net.segments_local()
    if not segs.size:
        return []

    found: list[tuple[float, float]] = []
    eps = 1e-9
    n = len(segs)
    a = segs
    for i in range(n):
        x1, y1, x2, y2 = a[i]
        dxi, dyi = x2 - x1, y2 - y1
        js = np.nonzero(owner[i + 1:] != owner[i])[0] + i + 1
        if not js.size:
            continue
        b = a[js]
        dxj = b[:, 2] - b[:, 0]
        dyj = b[:, 3] - b[:, 1]
        denom = dxi * dyj - dyi * dxj
        rx = b[:, 0] - x1
        ry = b[:, 1] - y1
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (rx * dyj - ry * dxj) / denom
            u = (rx * dyi - ry * dxi) / denom
        ok = (np.abs(denom) > eps) & (t >= -eps) & (t <= 1 + eps) & (u >= -eps) & (u <= 1 + eps)
        for t_k in np.nonzero(ok)[0]:
            found.append((x1 + t[t_k] * dxi, y1 + t[t_k] * dyi))
        # Endpoint contacts catch parallel/collinear touches the line
        # crossing above misses.
        for ex, ey in ((x1, y1), (x2, y2)):
            d2a = (b[:, 0] - ex) ** 2 + (b[:, 1] - ey) ** 2
            d2b = (b[:, 2] - ex) ** 2 + (b[:, 3] - ey) ** 2
            near = (~ok) & ((d2a <= INTERSECTION_TOL_M ** 2) | (d2b <= INTERSECTION_TOL_M ** 2))
            if near.any():
                found.append((ex, ey))

    if not found:
        return []
    pts = _dedup_points(np.asarray(found), INTERSECTION_TOL_M)
    from .geo import local_to_latlon
    return [local_to_latlon(LocalXY(x, y), net.frame) for x, y in pts]


# PGM (P5) I/O --------------------------------------------------------------

def _write_pgm(path: str | Path, byte_values: np.ndarray,
               meters_per_pixel: float, origin: LocalXY) -> None:
    h, w = byte_values.shape
    header = (f"P5\n# geo mpp={meters_per_pixel!r} ox={origin.x!r} oy={origin.y!r}\n"
              f"{w} {h}\n255\n")
    try:
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            fh.write(byte_values.astype(np.uint8).tobytes())
    except OSError as e:
        raise IoFailure(str(e)) from e


def _read_pgm(path: str | Path) -> tuple[np.ndarray, float, LocalXY]:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise IoFailure(str(e)) from e
    if not raw.startswith(b"P5"):
        raise IoFailure(f"{path}: not a binary PGM")
    mpp, ox, oy = 1.0, 0.0, 0.0
    pos, fields = 2, []
    while len(fields) < 3:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            end = raw.index(b"\n", pos)
            comment = raw[pos + 1:end].decode("ascii", "replace").split()
            if comment[:1] == ["geo"]:
                kv = dict(item.split("=", 1) for item in comment[1:])
                mpp = float(kv.get("mpp", 1.0))
                ox = float(kv.get("ox", 0.0))
                oy = float(kv.get("oy", 0.0))
            pos = end + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(raw[start:pos]))
    pos += 1  # single whitespace after maxval
    w, h, maxval = fields
    if maxval != 255:
        raise IoFailure(f"{path}: expected maxval 255, got {maxval}")
    data = np.frombuffer(raw[pos:pos + w * h], dtype=np.uint8)
    if data.size != w * h:
        raise IoFailure(f"{path}: truncated pixel data")
    return data.reshape(h, w).copy(), mpp, LocalXY(ox, oy)


def save_mask(mask: Mask, path: str | Path) -> None:
    _write_pgm(path, mask.values * np.uint8(255), mask.meters_per_pixel, mask.origin_local)


def load_mask(path: str | Path) -> Mask:
    data, mpp, origin = _read_pgm(path)
    return Mask((data > 127).astype(np.uint8), mpp, origin)


def save_probmap(pm: ProbMap, path: str | Path) -> None:
    q = np.rint(pm.values * 255.0).astype(np.uint8)
    _write_pgm(path, q, pm.meters_per_pixel, pm.origin_local)


def load_probmap(path: str | Path) -> ProbMap:
    data, mpp, origin = _read_pgm(path)
    return ProbMap(data.astype(np.float64) / 255.0, mpp, origin)
