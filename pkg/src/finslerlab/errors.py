"""Exception taxonomy shared across the package.

Math-level *verdicts* (an inequality failing, a hypothesis not holding on a
sampled field) are reported through result objects, never raised.  Exceptions
are reserved for computations that cannot produce a meaningful answer at all.
"""
from __future__ import annotations


class DomainError(ValueError):
    """Argument outside the domain of a primitive (sqrt/log at <= 0, division
    by a jet with zero value, metric evaluated outside its chart)."""


class OrderError(ValueError):
    """Jet operands live in incompatible jet spaces."""


class ConfigError(ValueError):
    """Run configuration is malformed; message carries the exact config path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class QuadratureError(RuntimeError):
    """A quadrature refinement loop failed to converge."""


class ConvergenceError(RuntimeError):
    """An iterative solver (Newton, fixed point) failed to converge."""


class SingularMatrix(ArithmeticError):
    """Fundamental tensor (or another structural matrix) is numerically
    singular: |det| below 1e-12 relative to its natural scale."""


class DegenerateFlag(ValueError):
    """Flag-plane denominator vanishes (transverse vector parallel to the
    flagpole)."""


class BadN(ValueError):
    """Effective-dimension parameter equals the manifold dimension, where the
    weighted Ricci correction term divides by zero."""


class BadDimension(ValueError):
    """Requested quantity is undefined in this dimension (the quadratic
    Sobolev-type constant needs n > 2)."""


class StepFailure(RuntimeError):
    """ODE integration failed or the integrated speed drifted beyond
    tolerance."""


class ChartExit(RuntimeError):
    """A geodesic left the usable coordinate chart before reaching the
    requested radius."""

    def __init__(self, radius: float, direction_index: int | None = None):
        self.radius = radius
        self.direction_index = direction_index
        where = f" (direction {direction_index})" if direction_index is not None else ""
        super().__init__(f"geodesic left the chart near radius {radius:.6g}{where}")


class DegenerateJacobian(RuntimeError):
    """The polar Jacobian determinant collapsed or changed sign (conjugate
    locus reached) inside the requested radius."""

    def __init__(self, radius: float, direction_index: int):
        self.radius = radius
        self.direction_index = direction_index
        super().__init__(
            f"polar Jacobian degenerates near radius {radius:.6g} "
            f"(direction {direction_index})"
        )


class PoleError(ValueError):
    """Model comparison function evaluated at or beyond its first pole."""


class GridTooCoarse(RuntimeError):
    """Discretization error estimate exceeds the requested tolerance."""
