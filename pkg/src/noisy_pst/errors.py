"""Exception hierarchy shared by every module."""


class PSTError(Exception):
    """Base class for all errors raised by this package."""


class InputError(PSTError, ValueError):
    """An argument is malformed or out of its allowed range."""


class ContractError(PSTError):
    """A numerical contract (unitarity, completeness, Hermiticity) is violated."""


class FitError(PSTError):
    """A fit could not be carried out, usually for lack of usable points."""


class UnmitigatableDepthError(FitError):
    """Rescaling would divide by a vanishing error-free weight."""


class ComparisonError(PSTError):
    """Two runs cannot be compared (different grids or depth ranges)."""


class ConfigError(InputError):
    """An experiment configuration is invalid.

    ``field`` holds the dotted path of the offending entry.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message
