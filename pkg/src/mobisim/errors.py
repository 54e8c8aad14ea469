"""
Exception hierarchy for mobisim.

Every failure raised by the package derives from MobisimError so the CLI can
turn it into a single error message and a nonzero exit status.
"""


class MobisimError(Exception):
    """Base class for all mobisim errors."""


class ConfigError(MobisimError):
    """A configuration file could not be read or parsed."""


class ConfigInvalidError(MobisimError, ValueError):
    """A scenario configuration failed validation."""


class UnknownPresetError(MobisimError, KeyError):
    """A fixture or preset name is not registered."""


# topology

class DisconnectedGraphError(MobisimError, ValueError):
    pass


class SelfLoopEdgeError(MobisimError, ValueError):
    pass


class InvalidAnchorError(MobisimError, ValueError):
    pass


class ConnectivityRetriesExhaustedError(MobisimError):
    pass


# mobility

class IsolatedNodeError(MobisimError, ValueError):
    pass


class NoConvergenceError(MobisimError):
    pass


class NonPositiveInputError(MobisimError, ValueError):
    pass


# messages

class MalformedAddressError(MobisimError, ValueError):
    pass


# protocol state machines

class AlreadyBoundError(MobisimError):
    pass


class InvalidMagError(MobisimError, ValueError):
    pass


class NotBoundError(MobisimError):
    pass


class SameMagError(MobisimError, ValueError):
    pass


class NotAttachedError(MobisimError):
    pass


class SameNapError(MobisimError, ValueError):
    pass


class NoSubscriberError(MobisimError):
    pass


class NoMatchError(MobisimError):
    pass


# analytic / stats

class DimensionMismatchError(MobisimError, ValueError):
    pass


class EmptySampleError(MobisimError, ValueError):
    pass


# outputs

class InconsistentResultError(MobisimError):
    """A computed artifact failed its internal consistency check."""


class ArtifactWriteError(MobisimError):
    """An output file could not be written."""
