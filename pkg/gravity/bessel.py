"""
Bessel functions J0 and J1 of real argument

Power series near the origin, Miller backward recurrence in the middle
range, Hankel asymptotics for large arguments.
"""
import math

import numpy as np

from utils.errors import DomainError

SERIES_LIMIT = 8.0
ASYMPTOTIC_LIMIT = 25.0
_SERIES_TERMS = 40
_MILLER_START = 100
_HANKEL_TERMS = 20


def _series(order: int, x: np.ndarray) -> np.ndarray:
    half = 0.5 * x
    term = half ** order / math.factorial(order)
    total = term.copy()
    factor = -(half * half)
    for m in range(1, _SERIES_TERMS):
        term = term * factor / (m * (m + order))
        total = total + term
    return total


def _miller(order: int, x: np.ndarray) -> np.ndarray:
    upper = np.zeros_like(x)
    current = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    j0 = j1 = None
    for k in range(_MILLER_START, 0, -1):
        lower = (2.0 * k / x) * current - upper
        upper, current = current, lower
        # current now holds the unnormalized J_{k-1}
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm = norm + 2.0 * current
        if k - 1 == 1:
            j1 = current
    j0 = current
    norm = norm + j0
    return (j0 if order == 0 else j1) / norm


def _hankel(order: int, x: np.ndarray) -> np.ndarray:
    mu = 4.0 * order * order
    p = np.ones_like(x)
    q = np.zeros_like(x)
    coefficient = 1.0
    power = np.ones_like(x)
    for k in range(1, 2 * _HANKEL_TERMS):
        coefficient *= (mu - (2 * k - 1) ** 2) / (8.0 * k)
        power = power / x
        term = coefficient * power
        # a_k enters P for even k and Q for odd k, with alternating signs
        if k % 2 == 0:
            p = p + (-1) ** (k // 2) * term
        else:
            q = q + (-1) ** (k // 2) * term
    chi = x - (0.5 * order + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j(order: int, x):
    """
    Bessel function of the first kind J_order(x) for order 0 or 1

    Args:
        order: 0 or 1
        x: Real scalar or array

    Returns:
        J_order(x) with the shape of x
    """
    if order not in (0, 1):
        raise DomainError(f"bessel_j supports orders 0 and 1, got {order}")
    values = np.asarray(x, dtype=float)
    magnitude = np.abs(values)
    result = np.empty_like(magnitude)

    small = magnitude <= SERIES_LIMIT
    large = magnitude >= ASYMPTOTIC_LIMIT
    middle = ~small & ~large
    if np.any(small):
        result[small] = _series(order, magnitude[small])
    if np.any(middle):
        result[middle] = _miller(order, magnitude[middle])
    if np.any(large):
        result[large] = _hankel(order, magnitude[large])

    if order == 1:
        result = np.where(values < 0, -result, result)
    return result if result.ndim else float(result)


def j0(x):
    return bessel_j(0, x)


def j1(x):
    return bessel_j(1, x)
