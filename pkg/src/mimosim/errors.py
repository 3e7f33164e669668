"""Exception hierarchy shared by all simulator modules."""


class MimoSimError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(MimoSimError, ValueError):
    """Input rejected before any computation (non-finite entries, bad shapes)."""


class RankDeficiencyError(MimoSimError):
    """A matrix required to have full column rank does not."""


class DecompositionError(MimoSimError):
    """A factorization failed (e.g. Cholesky pivot <= 0 on a non-PD matrix)."""


class IllConditionedError(MimoSimError):
    """Singular-value spread beyond the supported conditioning cutoff."""


class SingularMatrixError(MimoSimError):
    """A matrix that must be inverted is singular or numerically singular."""


class NeedsExternalNoiseError(SingularMatrixError):
    """The noise covariance is singular; a non-zero external noise term is required."""


class InfeasibleZeroForcingError(MimoSimError):
    """The stacked reduced channel is rank deficient; joint nulling is impossible."""


class DimensionMismatchError(MimoSimError, ValueError):
    """Operand shapes are inconsistent with the requested operation."""


class UniquenessError(MimoSimError):
    """Precondition for detector uniqueness (full-rank reducing maps) violated."""


class ChannelGenerationError(MimoSimError):
    """Random channel generation failed to produce a full-rank matrix."""


class ConfigError(MimoSimError, ValueError):
    """Sweep configuration is malformed or requests an infeasible combination."""
