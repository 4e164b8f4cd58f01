"""Exception types shared across the package."""


class VaxgameError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(VaxgameError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateParameterError(VaxgameError, ValueError):
    """A parameter combination makes a formula ill-defined (division by zero)."""


class InvalidParameterError(VaxgameError, ValueError):
    """Model parameters violate their invariants."""


class IntegrationDivergedError(VaxgameError, RuntimeError):
    """The integrator produced a non-finite state.

    Carries the model time at which the divergence was detected.
    """

    def __init__(self, t: float, message: str | None = None):
        self.t = t
        super().__init__(message or f"integration diverged at t={t:g}")


class AmbiguousEndpointError(VaxgameError, RuntimeError):
    """More than one candidate fixed point lies within the match tolerance."""


class BoundaryRegimeError(VaxgameError, ValueError):
    """The basic reproduction ratio sits exactly on a regime boundary.

    The stability taxonomy is undefined there; perturb the parameter.
    """


class NoSaddleError(VaxgameError, ValueError):
    """The interior saddle does not exist for these parameters."""


class DegenerateSaddleError(VaxgameError, RuntimeError):
    """The saddle Jacobian has repeated eigenvalues; no unique eigenbasis."""


class ClosedFormMismatchError(VaxgameError, RuntimeError):
    """Closed-form separatrix coefficients disagree with the eigendecomposition."""


class NotBistableError(VaxgameError, ValueError):
    """The requested analysis needs a bistable regime and the parameters are not in one."""


class ComparisonError(VaxgameError, ValueError):
    """Two trajectories cannot be compared (mismatched grids or initial states)."""


class ConfigError(VaxgameError, ValueError):
    """A scenario configuration file is invalid.

    ``key`` names the offending entry when one can be identified.
    """

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(message if key is None else f"{message} (key: {key})")
