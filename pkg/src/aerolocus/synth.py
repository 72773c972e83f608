"""Procedural synthetic cities and a noisy localization oracle.

Stands in for the real trained network and its private dataset so the
full pipeline can be exercised end to end.  Every generator is a pure
function of (params, seed) through the counter-based stream in
:mod:`aerolocus.rng`; identical seeds reproduce artifacts byte for byte.

Draw-order contract (per generator, on its own stream):

``generate_city``
  1. vertex jitter, row-major over the (blocks_x+1) x (blocks_y+1) grid,
     x offset then y offset per vertex;
  2. horizontal edge dropout, rows south to north, west to east;
  3. vertical edge dropout, columns west to east, south to north;
  4. per-block diagonals, row-major: one inclusion draw, then one
     direction draw only when included.

``sample_crops``
  per sample: intersection index, x offset, y offset; then one
  Fisher-Yates shuffle (see rng.Stream.shuffle) assigning the first
  round(0.9 n) shuffled slots to the train split.

``noisy_locmap_oracle``
  1. blank decision; 2. dot displacement gauss pair (skipped when
  blank); 3. regression noise gauss pair (always drawn).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateParams, NoIntersections, OutOfFrame
from .geo import (GeoPoint, LocalXY, RegionFrame, in_frame, latlon_to_local,
                  latlon_to_regression, local_to_latlon)
from .raster import Mask, Polyline, ProbMap, RoadNetwork, render_locmap_dot
from .rng import Stream, derive


@dataclass(frozen=True)
class CityParams:
    """Perturbed-grid street layout parameters."""

    seed: int = 0
    blocks_x: int = 60
    blocks_y: int = 60
    block_m: float = 140.0
    jitter_m: float = 18.0
    drop_prob: float = 0.12
    diag_prob: float = 0.08

    def __post_init__(self):
        if self.block_m <= 2 * self.jitter_m:
            raise ValueError("block_m must exceed twice the vertex jitter")
        for p in (self.drop_prob, self.diag_prob):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        if self.blocks_x < 1 or self.blocks_y < 1:
            raise ValueError("need at least one block per axis")


@dataclass(frozen=True)
class OracleParams:
    """Noise model for the stage-2 stand-in.

    ``sigma_m`` displaces the rendered dot isotropically; ``blank_prob``
    leaves the map empty (default 0.073); ``reg_sigma`` perturbs each
    regression coordinate on the 0-100 scale.
    """

    sigma_m: float = 7.3
    blank_prob: float = 0.073
    reg_sigma: float = 0.45
    dot_radius_px: float = 1.5
    seed: int = 0

    def __post_init__(self):
        if self.sigma_m < 0 or self.reg_sigma < 0:
            raise ValueError("noise scales must be nonnegative")
        if not 0.0 <= self.blank_prob <= 1.0:
            raise ValueError("blank_prob must lie in [0, 1]")
        if self.dot_radius_px <= 0:
            raise ValueError("dot_radius_px must be positive")


def generate_city(p: CityParams, f: RegionFrame) -> RoadNetwork:
    """Perturbed street grid centered in the frame, deterministic in p.seed."""
    extent_x = p.blocks_x * p.block_m
    extent_y = p.blocks_y * p.block_m
    margin_x = 0.5 * (f.width_m - extent_x)
    margin_y = 0.5 * (f.height_m - extent_y)
    if margin_x < p.jitter_m or margin_y < p.jitter_m:
        raise DegenerateParams("city grid plus jitter does not fit inside the frame")

    s = Stream(p.seed)
    nx, ny = p.blocks_x + 1, p.blocks_y + 1
    vx = np.empty((ny, nx))
    vy = np.empty((ny, nx))
    for j in range(ny):
        for i in range(nx):
            vx[j, i] = margin_x + i * p.block_m + s.uniform(-p.jitter_m, p.jitter_m)
            vy[j, i] = margin_y + j * p.block_m + s.uniform(-p.jitter_m, p.jitter_m)

    h_keep = np.empty((ny, p.blocks_x), dtype=bool)
    for j in range(ny):
        for i in range(p.blocks_x):
            h_keep[j, i] = s.uniform() >= p.drop_prob
    v_keep = np.empty((nx, p.blocks_y), dtype=bool)
    for i in range(nx):
        for j in range(p.blocks_y):
            v_keep[i, j] = s.uniform() >= p.drop_prob

    def runs(keep_row: np.ndarray) -> list[tuple[int, int]]:
        """Maximal kept-edge runs as (start_vertex, end_vertex) inclusive."""
        out, start = [], None
        for k, kept in enumerate(keep_row):
            if kept and start is None:
                start = k
            elif not kept and start is not None:
                out.append((start, k))
                start = None
        if start is not None:
            out.append((start, len(keep_row)))
        return out

    polylines: list[Polyline] = []

    def add_polyline(pts_local: list[tuple[float, float]]) -> None:
        geo = tuple(local_to_latlon(LocalXY(x, y), f) for x, y in pts_local)
        polylines.append(Polyline(geo))

    for j in range(ny):
        for a, b in runs(h_keep[j]):
            add_polyline([(vx[j, i], vy[j, i]) for i in range(a, b + 1)])
    for i in range(nx):
        for a, b in runs(v_keep[i]):
            add_polyline([(vx[j, i], vy[j, i]) for j in range(a, b + 1)])

    for j in range(p.blocks_y):
        for i in range(p.blocks_x):
            if s.uniform() < p.diag_prob:
                if s.uniform() < 0.5:
                    corners = ((vx[j, i], vy[j, i]), (vx[j + 1, i + 1], vy[j + 1, i + 1]))
                else:
                    corners = ((vx[j + 1, i], vy[j + 1, i]), (vx[j, i + 1], vy[j, i + 1]))
                add_polyline(list(corners))

    if not polylines:
        raise DegenerateParams("dropout removed every street")
    return RoadNetwork(roads=tuple(polylines), frame=f)


@dataclass(frozen=True)
class CropSample:
    """One image crop: its window center and geographic ground truth."""

    window_center: LocalXY
    true_location: GeoPoint
    is_train: bool


def sample_crops(net: RoadNetwork, n: int, crop_px: int, jitter_box_m: float,
                 seed: int) -> list[CropSample]:
    """Crop centers uniform in a jitter box around random intersections.

    The train/test assignment is an exact round(0.9 n) split realized by
    a seeded shuffle, not independent coin flips.
    """
    inter = net.intersections
    if not inter:
        raise NoIntersections("network has no intersections to sample around")
    if n < 1:
        raise ValueError("need at least one sample")

    s = Stream(seed)
    centers: list[tuple[LocalXY, GeoPoint]] = []
    for _ in range(n):
        p = inter[s.randint(len(inter))]
        base = latlon_to_local(p, net.frame)
        cx = base.x + s.uniform(-0.5 * jitter_box_m, 0.5 * jitter_box_m)
        cy = base.y + s.uniform(-0.5 * jitter_box_m, 0.5 * jitter_box_m)
        loc = LocalXY(cx, cy)
        centers.append((loc, local_to_latlon(loc, net.frame)))

    order = list(range(n))
    s.shuffle(order)
    n_train = round(0.9 * n)
    train_ids = set(order[:n_train])
    return [CropSample(c, g, i in train_ids) for i, (c, g) in enumerate(centers)]


def noisy_locmap_oracle(true_loc: GeoPoint, f: RegionFrame,
                        p: OracleParams) -> tuple[ProbMap, tuple[float, float]]:
    """Noisy stage-2 stand-in: a displaced localization dot plus a noisy
    regression pair.

    With probability blank_prob the map is all zero.  The dot center is
    true_loc plus isotropic Gaussian noise of std sigma_m, clamped to stay
    renderable inside the frame.  Regression output is the true 0-100
    coordinates plus per-axis Gaussian noise of std reg_sigma, clamped to
    [0, 100].
    """
    if not in_frame(true_loc, f):
        raise OutOfFrame(f"oracle location {true_loc} outside the frame")
    s = Stream(p.seed)
    blank = s.uniform() < p.blank_prob

    if blank:
        pm = ProbMap(np.zeros((f.locmap_px, f.locmap_px)), f.pixel_m, LocalXY(0.0, 0.0))
    else:
        gx, gy = s.gauss_pair()
        base = latlon_to_local(true_loc, f)
        eps = 1e-6
        x = min(max(base.x + gx * p.sigma_m, eps), f.width_m - eps)
        y = min(max(base.y + gy * p.sigma_m, eps), f.height_m - eps)
        pm = render_locmap_dot(local_to_latlon(LocalXY(x, y), f), f, p.dot_radius_px)

    rx, ry = latlon_to_regression(true_loc, f)
    nx, ny = s.gauss_pair()
    rx = min(max(rx + nx * p.reg_sigma, 0.0), 100.0)
    ry = min(max(ry + ny * p.reg_sigma, 0.0), 100.0)
    return pm, (rx, ry)


def derive_sample_params(p: OracleParams, base_seed: int, sample_id: int) -> OracleParams:
    """Per-sample oracle params with an independent derived stream."""
    return OracleParams(sigma_m=p.sigma_m, blank_prob=p.blank_prob,
                        reg_sigma=p.reg_sigma, dot_radius_px=p.dot_radius_px,
                        seed=derive(base_seed, sample_id))


def _resample(m: Mask, rot_deg: float, scale: float) -> Mask:
    """Nearest-neighbor rotation+scale about the mask center (no bounds on args)."""
    h, w = m.values.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    th = math.radians(rot_deg)
    cos_t, sin_t = math.cos(th), math.sin(th)
    rr, cc = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    # Inverse map of rotate-then-scale in (col, row-down) coordinates.
    dc = (cc - cx) / scale
    dr = (rr - cy) / scale
    src_c = cos_t * dc + sin_t * dr + cx
    src_r = -sin_t * dc + cos_t * dr + cy
    sr = np.rint(src_r).astype(np.int64)
    sc = np.rint(src_c).astype(np.int64)
    ok = (sr >= 0) & (sr < h) & (sc >= 0) & (sc < w)
    out = np.zeros_like(m.values)
    out[ok] = m.values[sr[ok], sc[ok]]
    return Mask(out, m.meters_per_pixel, m.origin_local)


def perturb_mask(m: Mask, rot_deg: float, scale: float, seed: int = 0) -> Mask:
    """Small rotation+scale resampling used to emulate compass/altitude noise.

    The transform is fully determined by its arguments; ``seed`` is part
    of the interface for callers that batch perturbations but draws
    nothing here.
    """
    if abs(rot_deg) > 10.0:
        raise ValueError("rotation limited to +-10 degrees")
    if not 0.9 <= scale <= 1.1:
        raise ValueError("scale limited to [0.9, 1.1]")
    return _resample(m, rot_deg, scale)
