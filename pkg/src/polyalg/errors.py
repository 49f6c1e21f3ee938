"""Exception hierarchy shared by all polyalg modules."""


class PolyalgError(Exception):
    """Base class for every error raised by polyalg."""


class DimensionMismatchError(PolyalgError, ValueError):
    pass


class InvalidNormError(PolyalgError, ValueError):
    pass


class InvalidAlgebraError(PolyalgError, ValueError):
    """Structure tensor violates commutativity, associativity or the unit law."""


class InvalidDecompositionError(InvalidAlgebraError):
    """The functional/unit pair cannot split the space (psi(e) == 0)."""


class UnsupportedAlgebraError(PolyalgError):
    """Character enumeration could not resolve the algebra reliably."""


class NoPolarizationError(PolyalgError, ValueError):
    pass


class InvalidCharacterError(PolyalgError, ValueError):
    pass


class NotCertifiedError(PolyalgError):
    """A hull point failed the bound check needed to build a character."""


class ConfigError(PolyalgError, ValueError):
    pass
