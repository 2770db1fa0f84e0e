"""Exception types shared across the package."""


class LineBroadcastError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(LineBroadcastError):
    """Tree parameters outside the supported domain (k < 2 or r < 1)."""


class Overflow(LineBroadcastError):
    """The vertex count does not fit the 64-bit id range."""


class OutOfRange(LineBroadcastError):
    """An index (level, offset, id, round, ...) is outside its valid range."""


class RootHasNoParent(LineBroadcastError):
    pass


class LeafHasNoChildren(LineBroadcastError):
    pass


class SameVertex(LineBroadcastError):
    """A path between a vertex and itself was requested."""


class PreconditionViolated(LineBroadcastError):
    """A procedure was started from a state it does not support."""


class TooLarge(LineBroadcastError):
    """The instance exceeds the exhaustive-search cap."""
