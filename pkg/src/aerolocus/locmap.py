"""Decode predicted localization maps into geographic estimates.

The location is the probability-weighted centroid of the largest
8-connected component of the thresholded map; a blank map yields no
estimate and callers fall back to the regression branch via
:func:`combine`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import ndimage

from .errors import BadShape, OutOfRange
from .geo import (GeoPoint, PixelCoord, RegionFrame, local_to_latlon,
                  latlon_to_local, local_to_locmap, locmap_to_local,
                  regression_to_latlon)
from .raster import Mask, ProbMap

_EIGHT_CONN = np.ones((3, 3), dtype=np.uint8)


class Source(Enum):
    SEGMENTATION = "segmentation"
    REGRESSION = "regression"
    FALLBACK = "fallback"
    REFINED = "refined"


@dataclass(frozen=True)
class LocationEstimate:
    """A geographic position plus how it was obtained."""

    position: GeoPoint
    pixel: PixelCoord
    source: Source
    component_size: int = 0


@dataclass(frozen=True)
class ComponentLabeling:
    """8-connected components, labeled 1..count in row-major first-pixel order."""

    labels: np.ndarray
    count: int
    sizes: np.ndarray  # sizes[k - 1] is the pixel count of label k


def binarize(m: ProbMap, thr: float = 0.5) -> Mask:
    """Threshold at ``thr`` (inclusive above)."""
    if not 0.0 < thr < 1.0:
        raise ValueError("threshold must lie strictly inside (0, 1)")
    return Mask((m.values >= thr).astype(np.uint8), m.meters_per_pixel, m.origin_local)


def connected_components(m: Mask) -> ComponentLabeling:
    """Deterministic 8-connectivity labeling.

    Labels are renumbered so that component k is the k-th to appear in a
    row-major scan, independent of the underlying labeling pass.
    """
    raw, count = ndimage.label(m.values, structure=_EIGHT_CONN)
    if count == 0:
        return ComponentLabeling(raw.astype(np.int64), 0, np.zeros(0, dtype=np.int64))
    flat = raw.ravel()
    nz = np.nonzero(flat)[0]
    first_seen = np.full(count + 1, flat.size, dtype=np.int64)
    # reversed scan keeps the earliest index per label
    first_seen[flat[nz[::-1]]] = nz[::-1]
    order = np.argsort(first_seen[1:], kind="stable")
    remap = np.zeros(count + 1, dtype=np.int64)
    remap[order + 1] = np.arange(1, count + 1)
    labels = remap[raw]
    sizes = np.bincount(labels.ravel(), minlength=count + 1)[1:]
    return ComponentLabeling(labels, count, sizes)


def decode_locmap(m: ProbMap, f: RegionFrame, thr: float = 0.5) -> LocationEstimate | None:
    """Largest-component weighted centroid, or None for a blank map.

    Ties on component size break toward the component whose first pixel
    comes earlier in row-major order, which is the lower label after
    deterministic renumbering.
    """
    if m.values.shape != (f.locmap_px, f.locmap_px):
        raise BadShape(f"expected {f.locmap_px}x{f.locmap_px} map, got {m.values.shape}")
    comp = connected_components(binarize(m, thr))
    if comp.count == 0:
        return None
    best = int(np.argmax(comp.sizes)) + 1  # argmax returns the first (lowest-label) max
    sel = comp.labels == best
    weights = m.values[sel]
    rows, cols = np.nonzero(sel)
    wsum = float(weights.sum())
    pix = PixelCoord(float((rows * weights).sum() / wsum),
                     float((cols * weights).sum() / wsum))
    pos = local_to_latlon(locmap_to_local(pix, f), f)
    return LocationEstimate(pos, pix, Source.SEGMENTATION,
                            component_size=int(comp.sizes[best - 1]))


def combine(seg: LocationEstimate | None, reg: tuple[float, float],
            f: RegionFrame) -> LocationEstimate:
    """Segmentation estimate when present, else the regression fallback."""
    if seg is not None:
        return seg
    rx, ry = reg
    if not (0.0 <= rx <= 100.0 and 0.0 <= ry <= 100.0):
        raise OutOfRange(f"regression coordinates {reg} outside [0, 100]")
    pos = regression_to_latlon((rx, ry), f)
    pix = local_to_locmap(latlon_to_local(pos, f), f)
    return LocationEstimate(pos, pix, Source.FALLBACK, component_size=0)
