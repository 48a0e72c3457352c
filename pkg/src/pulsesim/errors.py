"""Exception hierarchy shared by all pulsesim modules."""


class PulseSimError(Exception):
    """Base class for every error raised by pulsesim."""


class DimensionError(PulseSimError):
    """Operator/state dimensions do not match."""


class KindError(PulseSimError):
    """A state of the wrong kind (ket vs density matrix) was supplied."""


class ParamError(PulseSimError):
    """A pulse parameter is missing, unexpected, or out of its valid domain."""


class TimingError(PulseSimError):
    """A time or duration violates its constraints (e.g. duration <= 0)."""


class WindowError(PulseSimError):
    """A pulse Hamiltonian was evaluated outside the pulse's active window.

    This is a bug trap: the segmented evolver must never trigger it.
    """


class StiffnessError(PulseSimError):
    """Adaptive step size underflowed; the problem is too stiff for the
    explicit integrator."""


class BudgetError(PulseSimError):
    """The integrator exceeded its step budget."""


class NumericsError(PulseSimError):
    """Non-finite values appeared during integration."""


class ParseError(PulseSimError):
    """A sequence file is not well-formed (syntax level)."""


class UnknownNameError(PulseSimError):
    """A sequence file references an operator or recipe name that does not
    resolve."""


class ValidationError(PulseSimError):
    """A sequence file parses but violates an invariant; the message names
    the offending field."""


#: Errors that mean "the input was invalid" (CLI exit code 3).
VALIDATION_ERRORS = (
    DimensionError,
    KindError,
    ParamError,
    TimingError,
    WindowError,
    ParseError,
    UnknownNameError,
    ValidationError,
)

#: Errors that mean "the numerics failed" (CLI exit code 4).
NUMERICAL_ERRORS = (StiffnessError, BudgetError, NumericsError)
