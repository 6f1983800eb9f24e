"""Exception hierarchy shared by every module."""


class IfsError(Exception):
    """Base class for all errors raised by affine_ifs."""


class NoUniqueFixedPoint(IfsError):
    """The affine map has eigenvalue 1, so its fixed set is empty or a line."""


class InvalidIndex(IfsError):
    pass


class SizeLimit(IfsError):
    """Enumerating N**k words would exceed the configured cap."""


class MissingProbabilities(IfsError):
    pass


class NonpositiveProbability(IfsError):
    pass


class InvalidProbability(IfsError):
    pass


class NoThreshold(IfsError):
    """Average contractivity holds for every p1 or for none."""


class WrongArity(IfsError):
    pass


class EmptyInput(IfsError):
    pass


class DivergedOrbit(IfsError):
    pass


class GridMismatch(IfsError):
    pass


class DegeneratePolygon(IfsError):
    pass


class NotInvariant(IfsError):
    """Some map sends the candidate polygon outside itself."""


class AddressParseError(IfsError):
    pass


class ParseError(IfsError):
    """Malformed configuration file; the message names the offending field."""
