"""Exception hierarchy shared by all modules.

Split along the CLI's exit-code boundary: user/validation problems
(ParameterError and friends, exit 2) versus broken files and I/O
(FormatError / ArchiveIOError, exit 3).
"""


class PlatonicAlignError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(PlatonicAlignError, ValueError):
    """An argument violates an operation's preconditions."""


class DimensionError(ParameterError):
    """Tensor shape disagrees with the declared dimensions."""


class PairingError(ParameterError):
    """Two archives do not share identical item_ids."""


class DataError(PlatonicAlignError, ValueError):
    """Data content is unusable: non-finite values, zero vectors under cosine."""


class FormatError(PlatonicAlignError):
    """On-disk archive violates the format contract."""


class ArchiveIOError(PlatonicAlignError, OSError):
    """Archive files are missing or unreadable/unwritable."""


class LayerIndexError(PlatonicAlignError, IndexError):
    """Requested layer is outside [0, layer_count)."""


class FittingError(PlatonicAlignError):
    """Nonlinear fit could not produce a usable optimum."""
