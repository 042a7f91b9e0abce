"""Exception hierarchy shared by all modules."""


class TauberWeylError(Exception):
    """Base class for every error raised by this package."""


class InvalidLatticeError(TauberWeylError, ValueError):
    """The lattice basis is singular or malformed."""


class IncompleteSpectrumError(TauberWeylError, ValueError):
    """A query reaches beyond the radius up to which a spectrum is complete."""


class DomainError(TauberWeylError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(TauberWeylError, ValueError):
    """Parameters violate a hypothesis that the operation relies on."""


class UndefinedFitError(TauberWeylError, ValueError):
    """A regression has no meaningful answer (e.g. all-zero data)."""


class AccuracyError(TauberWeylError, RuntimeError):
    """An adaptive numerical loop hit its cap before reaching the tolerance.

    Attributes
    ----------
    achieved : float
        The last observed error estimate.
    value : complex or None
        The best value available when the loop stopped.
    """

    def __init__(self, message, achieved=float("nan"), value=None):
        super().__init__(f"{message} (achieved error estimate {achieved:.3g})")
        self.achieved = achieved
        self.value = value
