"""Exception types shared across the package."""


class FwIntensityError(Exception):
    """Base class for all package errors."""


class NonMonotoneTimes(FwIntensityError):
    """Event or update times are not strictly increasing."""


class DimensionMismatch(FwIntensityError):
    """Covariate vectors disagree on dimension."""


class EmptyUpdates(FwIntensityError):
    """A timeline needs at least one covariate update (at time 0)."""


class OutOfRange(FwIntensityError):
    """A time lies outside the valid query or horizon range."""


class DegenerateCoordinate(FwIntensityError):
    """A covariate coordinate has zero winsorization quantile."""


class ZeroNormAtom(FwIntensityError):
    """An atom has zero empirical L2 norm on the given timeline."""


class MissingHawkesState(FwIntensityError):
    """A self-exciting feature atom was evaluated without its state."""


class EmptyDictionary(FwIntensityError):
    """No candidate atoms are enabled or all were excluded."""


class NumericOverflow(FwIntensityError):
    """A log-intensity value exceeded the exp overflow guard."""


class NoJumps(FwIntensityError):
    """Fitting requires at least one jump."""


class EmptyValidation(FwIntensityError):
    """Validation-based selection requires a nonempty validation sample."""


class NonFiniteLikelihood(FwIntensityError):
    """A likelihood evaluation returned a non-finite value."""


class InvalidUniform(FwIntensityError):
    """A uniform draw must lie strictly inside (0, 1)."""


class ExplosionGuard(FwIntensityError):
    """The self-excitation state exceeded its stability ceiling."""


class ZeroVariance(FwIntensityError):
    """The two models agree at every jump; the forecast test is undefined."""


class DegenerateDenominator(FwIntensityError):
    """The reference log-intensity is constant on the evaluation jumps."""


class CholeskyFailure(FwIntensityError):
    """The requested covariance matrix is not positive definite."""
