from collections.abc import Sequence


class VerificationError(Exception):
    """Base class for every failure raised by the verification toolkit."""


class InsufficientQuadratureError(VerificationError, RuntimeError):
    def __init__(self, message: str, estimates: Sequence[complex] = ()):
        super().__init__(message)
        self.estimates = tuple(estimates)


class StepTooCoarseError(VerificationError, RuntimeError):
    def __init__(self, message: str, ratio: float):
        super().__init__(message)
        self.ratio = ratio


class GridError(VerificationError, ValueError):
    pass


class GridTooSmallError(GridError):
    pass


class NonConformableGridError(GridError):
    pass


class DecayPreconditionError(GridError):
    pass


class GridFormatError(VerificationError, ValueError):
    pass


class NoRootsFoundError(VerificationError, LookupError):
    pass
