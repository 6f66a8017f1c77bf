class DomainError(ValueError):
    """Raised when an input lies outside a function's mathematical domain."""
    pass


class ParameterValidationError(ValueError):
    """Raised when a composite parameter set is inconsistent."""
    pass


class SpectralAlignmentError(ParameterValidationError):
    """Raised when the modulation tone does not fall on a DFT bin."""
    pass


class FitDegenerateError(RuntimeError):
    """Raised when a reflectogram cannot be fitted."""
    pass


class OutcomeMismatchError(ValueError):
    """Raised when a simulation outcome does not belong to the given config."""
    pass


class StatisticalValidationError(RuntimeError):
    """Raised when a Monte Carlo tally disagrees with its closed form."""
    pass
