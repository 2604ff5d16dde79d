"""Exception types shared across the solver."""


class MsntError(Exception):
    """Base class for all solver errors."""


class ValidationError(MsntError):
    """A physical parameter or field violates one of the model assumptions.

    ``assumption`` names the violated admissibility condition, e.g. "(A3)".
    """

    def __init__(self, message, assumption=None):
        if assumption:
            message = f"{message} [violates {assumption}]"
        super().__init__(message)
        self.assumption = assumption


class ConfigError(MsntError):
    """Malformed or inconsistent run configuration."""


class StateRecoveryError(MsntError):
    """Entropy-variable inversion failed (numeric overflow or collapsed bracket)."""


class SingularMSMatrixError(MsntError):
    """The constrained friction system is numerically singular.

    Signals a degenerate density vector (some rho_i ~ 0) reaching the
    Bott-Duffin solve.
    """


class StepFailed(MsntError):
    """Implicit step did not converge after exhausting time-step halvings."""

    def __init__(self, message, time=None, residual_norm=None, halvings=None):
        super().__init__(message)
        self.time = time
        self.residual_norm = residual_norm
        self.halvings = halvings
