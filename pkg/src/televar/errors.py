"""Exception types shared across the package."""


class TelevarError(Exception):
    """Base class for package-specific errors."""


class DegenerateCatalogError(TelevarError):
    """The Bell-channel Gram matrix is singular or too ill-conditioned to solve."""


class SignalLossError(TelevarError):
    """The signal-bearing filter gain is too small to normalize the spectrum by."""


class InternalConsistencyError(TelevarError):
    """A computed quantity violates an invariant it is guaranteed to satisfy.

    Raised e.g. when a spectral catalog fails positive semidefiniteness, which
    indicates a sign-convention mismatch upstream rather than bad user input.
    """


class ModelValidityError(TelevarError, ValueError):
    """Inputs are outside the regime where a model approximation is accurate."""


class SearchFailureError(TelevarError):
    """An iterative refinement search failed to converge."""


class ConfigError(TelevarError):
    """A configuration-file problem; carries the offending line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class ComputationError(TelevarError):
    """A scheme evaluation failed; tagged with the scheme name."""

    def __init__(self, scheme, message):
        self.scheme = scheme
        super().__init__(f"[{scheme}] {message}")
