"""Exception hierarchy shared by all modules."""


class AerolocusError(Exception):
    """Base class for all errors raised by this package."""


class OutOfFrame(AerolocusError):
    """A geographic point falls outside the region frame."""


class OutOfRange(AerolocusError):
    """A regression coordinate falls outside [0, 100]."""


class ShapeMismatch(AerolocusError):
    """Two grids that must share a shape do not."""


class ChannelMismatch(AerolocusError):
    """Input channel count does not match a layer's expected channels."""


class OddDimension(AerolocusError):
    """2x2 pooling requires even spatial dimensions."""


class BadInputShape(AerolocusError):
    """Network input violates the stage's shape contract."""


class BadShape(AerolocusError):
    """A localization map has the wrong raster shape."""


class BadChannels(AerolocusError):
    """Descriptor extraction requires a 512-channel feature map."""


class EmptyMask(AerolocusError):
    """Point sampling found no positive pixels on the lattice."""


class EmptyPointSet(AerolocusError):
    """ICP requires nonempty point sets on both sides."""


class EmptyWindow(AerolocusError):
    """No road intersects the requested raster window."""


class EmptyIndex(AerolocusError):
    """Nearest-neighbor query against an empty descriptor index."""


class EmptyInput(AerolocusError):
    """Statistics over an empty error list are undefined."""


class NoIntersections(AerolocusError):
    """Crop sampling requires a network with at least one intersection."""


class DegenerateParams(AerolocusError):
    """Generator parameters produce no usable geometry."""


class IoFailure(AerolocusError):
    """A file could not be read or written."""
