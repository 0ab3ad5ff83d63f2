"""
Fourth-order finite differences and corrected trapezoid integration
on uniform grids
"""
import numpy as np
from scipy.integrate import cumulative_trapezoid

from utils.errors import ConfigurationError

MIN_POINTS = 5


def fd4_derivative(values: np.ndarray, h: float, axis: int = -1) -> np.ndarray:
    """
    Fourth-order derivative along one axis

    Central stencil in the interior, one-sided fourth-order stencils on the
    two outermost points at each end.

    Args:
        values: Samples on a uniform grid
        h: Grid spacing
        axis: Axis to differentiate along

    Returns:
        Array shaped like values
    """
    f = np.moveaxis(np.asarray(values), axis, -1)
    if f.shape[-1] < MIN_POINTS:
        raise ConfigurationError(
            f"finite differences need at least {MIN_POINTS} points per axis, got {f.shape[-1]}")
    d = np.empty_like(f, dtype=np.result_type(f, float))
    d[..., 2:-2] = (f[..., :-4] - 8.0 * f[..., 1:-3] + 8.0 * f[..., 3:-1] - f[..., 4:])
    d[..., 0] = -25.0 * f[..., 0] + 48.0 * f[..., 1] - 36.0 * f[..., 2] + 16.0 * f[..., 3] - 3.0 * f[..., 4]
    d[..., 1] = -3.0 * f[..., 0] - 10.0 * f[..., 1] + 18.0 * f[..., 2] - 6.0 * f[..., 3] + f[..., 4]
    d[..., -2] = 3.0 * f[..., -1] + 10.0 * f[..., -2] - 18.0 * f[..., -3] + 6.0 * f[..., -4] - f[..., -5]
    d[..., -1] = 25.0 * f[..., -1] - 48.0 * f[..., -2] + 36.0 * f[..., -3] - 16.0 * f[..., -4] + 3.0 * f[..., -5]
    return np.moveaxis(d / (12.0 * h), -1, axis)


def cumulative_integral(values: np.ndarray, h: float, axis: int = -1, origin: int = 0) -> np.ndarray:
    """
    Integral from grid index origin to every grid index along one axis

    Trapezoid rule with the endpoint correction -(h^2/12)(f'(x) - f'(x_origin)),
    which lifts the order to four.
    """
    values = np.asarray(values)
    trapezoid = cumulative_trapezoid(values, dx=h, axis=axis, initial=0)
    corrected = trapezoid - (h * h / 12.0) * fd4_derivative(values, h, axis)
    anchor = np.take(corrected, [origin], axis=axis)
    return corrected - anchor
