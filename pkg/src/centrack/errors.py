"""Exceptions raised by centrack.

Everything derives from CentrackError so callers (the CLI in particular) can
map failures to exit codes in one place.
"""


class CentrackError(Exception):
    pass


class NonTreeInput(CentrackError, ValueError):
    """Edge list does not describe a tree grown by successive leaf additions."""


class UnknownVertex(CentrackError, KeyError):
    pass


class Undefined(CentrackError, ValueError):
    """Quantity not defined for this input (e.g. psi on a single vertex)."""


class DegreeOverflow(CentrackError, RuntimeError):
    pass


class DomainError(CentrackError, ValueError):
    pass


class UnsupportedModel(CentrackError, ValueError):
    pass


class SizeOverflow(CentrackError, OverflowError):
    pass


class TooFewSamples(CentrackError, ValueError):
    pass


class ConfigError(CentrackError, ValueError):
    pass


class InvariantViolation(CentrackError, AssertionError):
    pass
