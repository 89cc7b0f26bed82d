"""Exception types shared across the package."""


class MovantError(Exception):
    """Base class for movant-specific failures."""


class SingularChannel(MovantError):
    """The stacked channel Gram matrix is numerically singular.

    Raised when the condition number exceeds the guard limit, e.g. two
    antennas coincide or two users are spatially indistinguishable.
    """


class InfeasibleSpacing(MovantError):
    """The requested number of points cannot keep the minimum pairwise
    spacing inside the region."""


class FitDiverged(MovantError):
    """Curve fitting failed to beat a constant model or violated the
    model's structural sign constraints."""
