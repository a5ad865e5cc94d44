"""Shared exception types."""


class PairpopError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(PairpopError):
    pass


class NonInteriorMeasure(PairpopError):
    """A strictly positive measure was required but some mass is <= 0."""


class SimplexEscape(PairpopError):
    """An integrator state left the probability simplex beyond tolerance."""


class StepRejected(PairpopError):
    """Adaptive step controller underflowed the step size."""


class NoConvergence(PairpopError):
    """Iteration hit its budget; carries the best iterate found."""

    def __init__(self, message, best=None, residual=None, iterations=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


class PreconditionViolated(PairpopError):
    """Hypotheses of a checked proposition do not hold; the check is vacuous."""


class BadKernel(PairpopError):
    pass


class DivisionByZeroSupport(PairpopError):
    """Fitness ratio undefined: supported site with zero competition mass."""


class ZeroTotalFitness(PairpopError):
    """Resampling undefined: no viable parent in the population."""


class UnorderedInputs(PairpopError):
    pass


class CloudExplosion(PairpopError):
    """Dual influence cloud exceeded its configured size guard."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats


class TooLarge(PairpopError):
    pass


class KernelTooWide(PairpopError):
    pass


class RegionEscape(PairpopError):
    """PDE state left its invariant phase region beyond tolerance."""


class DegenerateAtC4(PairpopError):
    """Interior fixed points coincide (double point)."""


class NoRealRoots(PairpopError):
    pass


class ConfigError(PairpopError):
    """Base for experiment-configuration errors (CLI exit code 2)."""


class ParseError(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


class RangeError(ConfigError):
    pass
