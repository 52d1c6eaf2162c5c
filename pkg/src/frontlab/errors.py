"""Exception types shared across the lab."""


class FrontlabError(Exception):
    """Base class for all numerical/validation failures raised by frontlab."""


class NegativeSample(FrontlabError):
    """A tabulated kernel contains a negative density sample."""


class AsymmetricTable(FrontlabError):
    """A tabulated kernel violates evenness beyond tolerance."""


class UnderResolved(FrontlabError):
    """Grid spacing too coarse to resolve the kernel support."""


class BadParams(FrontlabError):
    """Parameters outside their admissible range."""


class NoPositiveRoot(FrontlabError):
    """The positive equilibrium does not exist (subcritical regime)."""


class NoMinimum(FrontlabError):
    """The speed functional c(lambda) has no interior minimum."""


class SubcriticalSpeed(FrontlabError):
    """Requested speed is at or below the critical speed."""


class SubcriticalR0(FrontlabError):
    """Operation requires a basic reproduction number above 1."""


class NewtonDiverged(FrontlabError):
    """Complex Newton iteration failed to converge."""


class Instability(FrontlabError):
    """Time stepper produced NaN/Inf or left the admissible range."""


class CollapsedToZero(FrontlabError):
    """Wave iteration found no travelling wave at this speed."""


class NoConvergence(FrontlabError):
    """Iteration exhausted its budget without a verdict."""


class BracketInvalid(FrontlabError):
    """Bisection bracket does not straddle the existence threshold."""


class WindowTooNoisy(FrontlabError):
    """Tail-fit window reaches below the numerical noise floor."""


class TooFewSamples(FrontlabError):
    """Not enough trace samples in the fitting window."""


class DissipativityViolated(FrontlabError):
    """Fourier symbol has a negative real part (quadrature failure)."""


class DecayViolated(FrontlabError):
    """Spectral evolution input does not decay at the domain ends."""
