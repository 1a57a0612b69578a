"""Exception types shared across the engine."""


class PosrelError(Exception):
    """Base class for all engine errors."""


class ContractViolationError(PosrelError):
    """An operation was called with inputs outside its contract."""


class EmptyMapError(PosrelError):
    """A zero-weight mass map was used where object evidence is required."""


class DimensionMismatchError(PosrelError):
    """Two grids that must share dimensions do not."""


class MissingDepthError(PosrelError):
    """A depth relation was evaluated without a depth map."""


class MalformedFileError(PosrelError):
    """A mask, depth, or relation file could not be parsed."""


class UnsupportedFormatError(PosrelError):
    """The file is not in one of the supported ingestion formats."""


class UnknownTokenError(PosrelError):
    """A relation references a token that has no attention map."""
