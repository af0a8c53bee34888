"""Exception and warning types shared across the package."""


class ShadowlabError(Exception):
    """Base class for all package errors."""


class FlatCriticalPoint(ShadowlabError):
    """A zero of f' where every derivative up to the order bound vanishes."""


class RootFindingFailure(ShadowlabError):
    """Bracketing of a critical point was inconsistent."""


class EmptyCriticalSet(UserWarning):
    """The map has no critical points, so epsilon1 falls back to its cap."""


class DomainEscape(ShadowlabError):
    """An orbit point left the domain by more than the clamp tolerance."""

    def __init__(self, message, index=None, value=None):
        super().__init__(message)
        self.index = index
        self.value = value


class InfeasibleParameters(ShadowlabError):
    """Parameters violate a precondition (epsilon too large, L too small, ...)."""


class NoNearbyCritical(ShadowlabError):
    """No critical point within epsilon of an A-visit; delta is not admissible."""


class HorizonExceeded(ShadowlabError):
    """A PSI search ran past the end of the orbit.

    ``partial`` holds the PSI built so far (flagged not right-maximal).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NonExpandingOrbit(ShadowlabError):
    """The weight product never reached 1 within the step budget."""


class CriticalHit(ShadowlabError):
    """An orbit point is exactly critical (f' = 0), so l(a) is infinite."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DisjointSupports(ShadowlabError):
    """psi_union called on PSIs whose supports do not intersect."""


class ResolutionInsufficient(ShadowlabError):
    """Adjacent sample points are farther than epsilon/4 in the Bowen metric."""


class ConfigError(ShadowlabError):
    """Invalid experiment configuration; ``field`` names the offending path."""

    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
