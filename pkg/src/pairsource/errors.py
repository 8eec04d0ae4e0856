"""Exception taxonomy shared across the package.

CLI exit codes: ConfigError -> 1, NumericError -> 2, VerificationError -> 3.
"""


class PairSourceError(Exception):
    """Base class for all package errors."""


class ConfigError(PairSourceError):
    """Invalid configuration file or option combination."""


class NumericError(PairSourceError):
    """A numerical routine failed to produce a trustworthy result."""


class DegenerateSteadyStateError(NumericError):
    """The Liouvillian kernel is not one-dimensional (or the solve diverged)."""


class TruncationError(NumericError):
    """The Fock-space truncation is too small for the requested quantity."""


class GridTooShortError(NumericError):
    """A correlation grid does not reach its asymptotic plateau."""


class RegimeError(PairSourceError):
    """A closed-form expression was requested outside its domain of validity."""


class VerificationError(PairSourceError):
    """A verification suite failed."""
