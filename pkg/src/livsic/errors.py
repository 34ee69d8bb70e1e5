"""Exception hierarchy. Every module raises subclasses of LivsicError."""


class LivsicError(Exception):
    """Base class; carries a module-qualified code for CLI reporting."""

    code = "livsic.error"


class InvalidParams(LivsicError):
    code = "map_model.invalid_params"


class NotAHorseshoe(LivsicError):
    code = "map_model.not_a_horseshoe"


class InvalidP(LivsicError):
    code = "observables.invalid_p"


class ResolutionMismatch(LivsicError):
    code = "observables.resolution_mismatch"


class NotMonotone(LivsicError):
    code = "observables.not_monotone"


class DegenerateDensity(LivsicError):
    code = "transfer_operator.degenerate_density"


class NoConvergence(LivsicError):
    code = "transfer_operator.no_convergence"

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NoDecay(LivsicError):
    code = "transfer_operator.no_decay"


class EmptyFamily(LivsicError):
    code = "basis.empty_family"


class NoObstruction(LivsicError):
    code = "basis.no_obstruction"


class MeanNotZero(LivsicError):
    code = "cohomology.mean_not_zero"


class MissingWitness(LivsicError):
    code = "cohomology.missing_witness"


class ConjugacyViolation(LivsicError):
    code = "cohomology.conjugacy_violation"


class ConfigError(LivsicError):
    code = "cli.config_error"
