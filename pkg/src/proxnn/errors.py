"""Exception types shared across the package."""


class ProxnnError(Exception):
    """Base class for all package errors."""


class DimensionError(ProxnnError):
    """Shapes or sizes violate an operation's preconditions."""


class InfeasiblePotentialError(ProxnnError):
    """A potential is +inf everywhere on the searched region."""


class UnsupportedDimensionError(ProxnnError):
    """Brute-force oracle called beyond its supported dimension."""


class RetractionError(ProxnnError):
    """A retraction could not produce a point on the manifold."""


class ContractViolationError(ProxnnError):
    """An operation was called on a model violating its structural contract."""


class TrainingDivergedError(ProxnnError):
    """Training loss became non-finite; carries the partial loss history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class AttackDegenerateError(ProxnnError):
    """Adversarial attack gradient is identically zero."""


class IdxFormatError(ProxnnError):
    """IDX file could not be parsed; message names the failing offset."""


class ConfigError(ProxnnError):
    """Run configuration is invalid or contains unknown keys."""
