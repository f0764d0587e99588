"""
Exception types raised across the simulator
"""


class GreenEdgeError(Exception):
    """Base class for all simulator errors"""


class ConfigurationError(GreenEdgeError, ValueError):
    """A config file, trace, scenario or argument failed validation"""


class EnumerationLimitError(GreenEdgeError):
    """A mapping space is larger than the configured enumeration cap"""


class InsufficientDataError(GreenEdgeError):
    """Not enough samples to fit buckets or train an estimator"""


class TraceCoverageError(GreenEdgeError):
    """A CI trace does not cover the requested window"""


class NoFeasibleMappingError(GreenEdgeError):
    """Every evaluated candidate violated the power filter"""

    def __init__(self, message: str, evaluations: int = 0):
        super().__init__(message)
        self.evaluations = evaluations


class RuntimeStateError(GreenEdgeError):
    """An event is inconsistent with the current system state"""


class SplitRefusedError(GreenEdgeError):
    """A search node cannot be bipartitioned"""
