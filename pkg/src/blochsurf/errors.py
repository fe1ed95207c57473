"""Exception and warning types used across the package."""


class BlochsurfError(Exception):
    """Base class for all package errors."""


class DomainError(BlochsurfError, ValueError):
    """Argument outside the mathematical domain of a special function."""


class SingularPoint(BlochsurfError, ValueError):
    """Field evaluation requested at a singular point (e.g. a source location)."""


class DegenerateMap(BlochsurfError):
    """Flattening map is not a diffeomorphism (Jacobian determinant too small)."""


class MeshMismatch(BlochsurfError, ValueError):
    """Cell fields that must share a mesh do not."""


class SingularSystem(BlochsurfError):
    """A quasi-periodic cell system could not be factorized."""

    def __init__(self, alpha, message=""):
        self.alpha = alpha
        super().__init__(message or f"singular cell system at alpha={alpha!r}")


class NonConvergence(BlochsurfError):
    """An iterative linear solve exceeded its iteration cap."""


class Stagnation(BlochsurfError):
    """CGNE search direction collapsed below the stagnation threshold."""


class MaxOuterIterations(BlochsurfError):
    """Newton outer loop made no progress at all."""


class AmbiguousLocation(BlochsurfError):
    """Sampling stage could not single out a perturbed cell."""


class TruncationWarning(UserWarning):
    """Energy in the outermost strip cells is not negligible."""
