"""Translation-only iterative closest point refinement.

Aligns the road mask predicted for an image against reference roads
rasterized around the estimated location.  Matching is one-directional
(predicted point to nearest reference point); each iteration moves the
predicted centroid onto the matched-reference centroid, which is the
translation minimizing the mean squared distance for fixed matches.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyMask, EmptyPointSet
from .geo import LocalXY, latlon_to_local, local_to_latlon, local_to_locmap
from .locmap import LocationEstimate, Source
from .raster import Mask, RoadNetwork, rasterize_roads

# Below this many reference points a vectorized exhaustive scan is used;
# it doubles as the correctness oracle for the tree-based path.
BRUTE_FORCE_LIMIT = 2000


@dataclass
class AlignmentResult:
    """Outcome of one ICP run, in pixel units of the two point sets."""

    translation: tuple[float, float]
    iterations: int
    final_mean_nn_dist: float
    converged: bool
    mean_dist_history: list[float] = field(default_factory=list)


def sample_points(m: Mask, stride_px: int = 10) -> np.ndarray:
    """Positive pixels on the stride lattice as an (n, 2) array of (x, y).

    The lattice is anchored at pixel (0, 0); points come out in row-major
    order.  Raises EmptyMask when nothing falls on the lattice.
    """
    if stride_px < 1:
        raise ValueError("stride_px must be at least 1")
    sub = m.values[::stride_px, ::stride_px]
    rows, cols = np.nonzero(sub)
    if rows.size == 0:
        raise EmptyMask("no positive pixels on the sampling lattice")
    pts = np.empty((rows.size, 2), dtype=np.float64)
    pts[:, 0] = cols * stride_px
    pts[:, 1] = rows * stride_px
    return pts


def _nearest_brute(query: np.ndarray, ref: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exhaustive nearest neighbors; ties resolve to the lowest ref index."""
    d2 = ((query[:, None, :] - ref[None, :, :]) ** 2).sum(axis=2)
    idx = np.argmin(d2, axis=1)
    return np.sqrt(d2[np.arange(len(query)), idx]), idx


def nearest_neighbors(query: np.ndarray, ref: np.ndarray,
                      tree: cKDTree | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Distances and indices of each query point's nearest reference point."""
    if len(ref) < BRUTE_FORCE_LIMIT and tree is None:
        return _nearest_brute(query, ref)
    if tree is None:
        tree = cKDTree(ref)
    d, idx = tree.query(query)
    return d, idx


def icp_translate(pred: np.ndarray, ref: np.ndarray, max_iter: int = 100,
                  tol_px: float = 0.05) -> AlignmentResult:
    """Cumulative translation taking ``pred`` onto ``ref``.

    Stops when the centroid update drops below ``tol_px`` or after
    ``max_iter`` iterations.  ``mean_dist_history`` records the mean
    nearest-neighbor distance observed at each matching step.
    """
    pred = np.asarray(pred, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if pred.size == 0 or ref.size == 0:
        raise EmptyPointSet("both point sets must be nonempty")

    tree = cKDTree(ref) if len(ref) >= BRUTE_FORCE_LIMIT else None
    t = np.zeros(2)
    pred_centroid = pred.mean(axis=0)
    history: list[float] = []
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        d, idx = nearest_neighbors(pred + t, ref, tree)
        history.append(float(d.mean()))
        update = ref[idx].mean(axis=0) - (pred_centroid + t)
        t = t + update
        if float(np.hypot(update[0], update[1])) < tol_px:
            converged = True
            break

    d, _ = nearest_neighbors(pred + t, ref, tree)
    return AlignmentResult(translation=(float(t[0]), float(t[1])),
                           iterations=iterations,
                           final_mean_nn_dist=float(d.mean()),
                           converged=converged,
                           mean_dist_history=history)


def refine_location(est: LocationEstimate, pred_roads: Mask, net: RoadNetwork,
                    window_px: int, meters_per_pixel: float,
                    thickness_m: float = 5.0, stride_px: int = 10,
                    max_iter: int = 100,
                    tol_px: float = 0.05) -> tuple[LocationEstimate, AlignmentResult | None]:
    """Shift ``est`` by the ICP alignment of predicted roads against the map.

    The reference window is rasterized around ``est`` with ``window_px``
    pixels per side at the same road thickness the prediction used; it
    should exceed the predicted mask by twice the largest expected error.
    Returns the refined estimate, or ``est`` unchanged (unrefined) when
    the window holds no roads, the predicted mask has no sample points,
    or the implied correction exceeds the window margin and is therefore
    untrustworthy.
    """
    if window_px < pred_roads.width:
        raise ValueError("reference window must be at least the predicted mask size")
    center = latlon_to_local(est.position, net.frame)
    ref_mask = rasterize_roads(net, center, window_px, meters_per_pixel, thickness_m)
    if ref_mask.is_empty or pred_roads.is_empty:
        return est, None
    try:
        pred_pts = sample_points(pred_roads, stride_px)
        ref_pts = sample_points(ref_mask, stride_px)
    except EmptyMask:
        return est, None

    result = icp_translate(pred_pts, ref_pts, max_iter=max_iter, tol_px=tol_px)
    offset = 0.5 * (window_px - pred_roads.width)
    dx_px = result.translation[0] - offset
    dy_px = result.translation[1] - offset
    margin_px = offset
    if margin_px > 0 and np.hypot(dx_px, dy_px) > margin_px:
        return est, result

    refined_local = LocalXY(center.x + dx_px * meters_per_pixel,
                            center.y - dy_px * meters_per_pixel)
    refined = LocationEstimate(position=local_to_latlon(refined_local, net.frame),
                               pixel=local_to_locmap(refined_local, net.frame),
                               source=Source.REFINED,
                               component_size=est.component_size)
    return refined, result
