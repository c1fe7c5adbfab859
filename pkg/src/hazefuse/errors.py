"""Exception hierarchy shared by all hazefuse modules."""


class HazefuseError(Exception):
    """Base class for every error raised by this package."""


class DecodeError(HazefuseError):
    pass


class UnsupportedFormat(HazefuseError):
    pass


class ImageWriteError(HazefuseError, OSError):
    pass


class DimensionMismatch(HazefuseError, ValueError):
    pass


class EmptyInput(HazefuseError, ValueError):
    pass


class TooManyLevels(HazefuseError, ValueError):
    pass


class CorruptPyramid(HazefuseError, ValueError):
    pass


class PyramidMismatch(HazefuseError, ValueError):
    pass


class DegenerateInput(HazefuseError, ValueError):
    pass


class TooSmall(HazefuseError, ValueError):
    pass


class NoVisibleEdges(HazefuseError, ValueError):
    pass


class ManifestParseError(HazefuseError, ValueError):
    pass
