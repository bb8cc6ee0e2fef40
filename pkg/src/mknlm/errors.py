"""Exception types raised across the package."""


class DenoiseError(Exception):
    """Base class for all errors raised by :mod:`mknlm`."""


class InvalidImage(DenoiseError, ValueError):
    """Array is not a finite, non-empty 2D grayscale image."""


class UnsupportedFormat(DenoiseError, ValueError):
    pass


class CorruptFile(DenoiseError, ValueError):
    pass


class DimensionMismatch(DenoiseError, ValueError):
    pass


class EvenSide(DenoiseError, ValueError):
    pass


class SideMismatch(DenoiseError, ValueError):
    pass


class NonPositiveRho(DenoiseError, ValueError):
    pass


class CenterOutOfBounds(DenoiseError, IndexError):
    pass


class DegenerateDenominator(DenoiseError, ArithmeticError):
    pass


class ImageTooSmall(DenoiseError, ValueError):
    pass


class InvalidParameter(DenoiseError, ValueError):
    pass
