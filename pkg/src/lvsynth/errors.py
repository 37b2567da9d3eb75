"""Exception hierarchy.

Errors fall into three families that the command line maps to exit codes:
configuration/usage (:class:`ConfigError`, plain ``ValueError``), input
format (:class:`FormatError`) and numeric failure (:class:`NumericError`).
"""


class LVSynthError(Exception):
    """Base class for all package errors."""


class ConfigError(LVSynthError, ValueError):
    """Invalid generation config. ``key`` names the offending entry."""

    def __init__(self, key, message=None):
        self.key = key
        super().__init__(f"{key}: {message}" if message else key)


class LatticeMismatch(LVSynthError, ValueError):
    """Two volumes that must share a lattice do not."""


# -- format errors ----------------------------------------------------------

class FormatError(LVSynthError):
    """Problem parsing or serializing a binary volume/flow payload."""


class MalformedHeader(FormatError):
    pass


class UnsupportedFeature(FormatError):
    pass


class TruncatedData(FormatError):
    pass


class NonFiniteData(FormatError):
    pass


class NonBinaryMask(FormatError):
    """A volume requested as a mask holds values other than 0 and 1."""


class ResourceError(FormatError):
    pass


# -- numeric errors ---------------------------------------------------------

class NumericError(LVSynthError):
    """Geometry or solver failure."""


class EmptyMask(NumericError):
    pass


class DegenerateAxis(NumericError):
    pass


class DegenerateFrame(NumericError):
    pass


class DegenerateShape(NumericError):
    pass


class NoBracket(NumericError):
    pass


class NoConvergence(NumericError):
    pass
