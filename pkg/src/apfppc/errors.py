"""Exception types raised when a hard constraint or the numerics break down."""


class ConstraintViolation(ValueError):
    """Base class for hard-constraint breaches detected during evaluation."""


class OutsideDomain(ConstraintViolation):
    """Boresight entered a pointing-forbidden cone (gamma >= cos(theta_f))."""


class RateLimitViolated(ConstraintViolation):
    """An angular-rate component reached the rate limit M_omega."""


class EnvelopeViolated(ConstraintViolation):
    """The pointing error left the performance envelope (eps_q >= 1)."""


class NonFiniteState(ArithmeticError):
    """A state component became NaN or Inf."""


class ConfigInvalid(ValueError):
    """Scenario configuration fails an admissibility check."""


class UnknownPreset(KeyError):
    """Requested scenario preset does not exist."""
