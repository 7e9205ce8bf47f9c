class LangevinTailsError(Exception):
    """Base class for errors raised by this package."""


class InvalidParameterError(LangevinTailsError, ValueError):
    pass


class ShapeError(LangevinTailsError, ValueError):
    pass


class FitFailureError(LangevinTailsError):
    pass


class ConfigError(LangevinTailsError, ValueError):
    """A chain or run configuration violates a precondition."""


class BurnInUnavailableError(ConfigError):
    pass


class DivergenceError(LangevinTailsError):
    def __init__(self, chain, iteration):
        self.chain = chain
        self.iteration = iteration
        super().__init__(f"chain {chain} produced a non-finite state at iteration {iteration}; "
                         "the stepsize is too large or the potential metadata is wrong")


class DomainError(LangevinTailsError, ValueError):
    pass


class EnvelopeUnavailableError(LangevinTailsError):
    pass


class InapplicableError(LangevinTailsError):
    """A verification was requested for a potential it does not apply to."""


class SearchRangeError(LangevinTailsError):
    pass
