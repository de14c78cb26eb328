class MinklabError(Exception):
    """Base class for library errors."""


class DegenerateBasis(MinklabError, ValueError):
    pass


class DimensionTooLarge(MinklabError, ValueError):
    pass


class NotUnimodular(MinklabError, ValueError):
    pass


class InvalidRange(MinklabError, ValueError):
    pass


class EnumerationBudgetExceeded(MinklabError, RuntimeError):
    pass


class InsufficientMass(MinklabError, RuntimeError):
    """Too few effective hits at a grid point for a usable estimate."""
