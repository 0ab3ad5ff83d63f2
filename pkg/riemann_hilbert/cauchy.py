"""
Cauchy projections, winding index and scalar canonical factorization

For f sampled on an admissible contour, the Cauchy integral splits
f = f_plus + f_minus with f_plus holomorphic inside and f_minus holomorphic
outside, vanishing at infinity. The scalar Wiener-Hopf split
f = f_minus * f_plus follows by projecting a continuous log of f.
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from config import Config
from riemann_hilbert.contour import Contour, TWO_PI
from utils.errors import (
    ConfigurationError,
    DomainError,
    NoCanonicalFactorizationError,
    ResolutionError,
    TaylorConditioningError,
    ZeroOnContourError,
)
from utils.logger import setup_logger

logger = setup_logger(__name__)

_CHUNK = 512
_TWO_PI_I = 2j * math.pi


@dataclass(frozen=True, eq=False)
class BoundarySamples:
    """Values of a function on the nodes of a contour"""
    contour: Contour
    values: np.ndarray
    closed_form: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.contour.node_count,):
            raise ConfigurationError(
                f"expected {self.contour.node_count} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("boundary samples are not finite")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_function(cls, contour: Contour, function: Callable[[np.ndarray], np.ndarray]) -> 'BoundarySamples':
        return cls(contour, function(contour.nodes), function)

    def resample(self, node_count: int) -> 'BoundarySamples':
        """Re-evaluate on the same curve with a different node count"""
        if self.closed_form is None:
            raise ResolutionError(
                "samples need refinement but carry no closed form",
                {'node_count': self.contour.node_count})
        return BoundarySamples.from_function(self.contour.with_node_count(node_count), self.closed_form)


def _cauchy_sum(contour: Contour, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """(1/2 pi i) sum f_k w_k / (tau_k - tau) for points off the curve"""
    density = values * contour.weights
    out = np.empty(points.shape, dtype=complex)
    for start in range(0, points.size, _CHUNK):
        block = points[start:start + _CHUNK]
        out[start:start + _CHUNK] = (density[None, :] / (contour.nodes[None, :] - block[:, None])).sum(axis=1)
    return out / _TWO_PI_I


def _as_points(tau) -> Tuple[np.ndarray, bool]:
    array = np.asarray(tau, dtype=complex)
    return np.atleast_1d(array).ravel(), array.ndim == 0


def _restore(values: np.ndarray, tau, scalar: bool):
    if scalar:
        return complex(values[0])
    return values.reshape(np.shape(tau))


def cauchy_plus(samples: BoundarySamples, tau):
    """
    P_plus f(tau) for tau strictly inside the contour

    Args:
        samples: Boundary samples of f
        tau: Complex scalar or array of interior points

    Returns:
        Projection values with the shape of tau
    """
    points, scalar = _as_points(tau)
    _, inside, gap = samples.contour.classify(points)
    if not np.all(inside) or np.any(gap < samples.contour.tolerance):
        raise DomainError("cauchy_plus needs points strictly inside the contour")
    return _restore(_cauchy_sum(samples.contour, samples.values, points), tau, scalar)


def cauchy_minus(samples: BoundarySamples, tau):
    """
    P_minus f(tau) for tau strictly outside the contour

    Args:
        samples: Boundary samples of f
        tau: Complex scalar or array of exterior points

    Returns:
        Projection values with the shape of tau
    """
    points, scalar = _as_points(tau)
    _, inside, gap = samples.contour.classify(points)
    if np.any(inside) or np.any(gap < samples.contour.tolerance):
        raise DomainError("cauchy_minus needs points strictly outside the contour")
    return _restore(-_cauchy_sum(samples.contour, samples.values, points), tau, scalar)


def spectral_t_derivative(values: np.ndarray) -> np.ndarray:
    """d/dt of periodic samples on an equispaced grid (Nyquist mode dropped)"""
    n = values.size
    modes = np.fft.fftfreq(n, d=1.0 / n)
    modes[n // 2] = 0.0
    return np.fft.ifft(1j * modes * np.fft.fft(values))


def plus_boundary_values(samples: BoundarySamples) -> np.ndarray:
    """
    Interior limit of P_plus f at every node, by singularity subtraction

    Returns:
        Array of node values; the exterior limit of P_minus f is values - result
    """
    contour = samples.contour
    f = samples.values
    nodes = contour.nodes
    weights = contour.weights
    derivative = spectral_t_derivative(f) / contour.velocity

    n = contour.node_count
    result = np.empty(n, dtype=complex)
    for start in range(0, n, _CHUNK):
        rows = np.arange(start, min(start + _CHUNK, n))
        delta = nodes[None, :] - nodes[rows, None]
        np.put_along_axis(delta, rows[:, None], 1.0, axis=1)
        quotient = (f[None, :] - f[rows, None]) / delta
        np.put_along_axis(quotient, rows[:, None], derivative[rows, None], axis=1)
        result[rows] = (quotient * weights[None, :]).sum(axis=1)
    return f + result / _TWO_PI_I


def laurent_coefficients(samples: BoundarySamples) -> Tuple[np.ndarray, np.ndarray]:
    """
    Laurent coefficients of samples on the unit circle

    Returns:
        (modes ascending, coefficients) with f = sum c_m tau**m
    """
    if not samples.contour.is_unit_circle:
        raise ConfigurationError("Laurent coefficients need the unit circle")
    n = samples.contour.node_count
    modes = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    coefficients = np.fft.fft(samples.values) / n
    order = np.argsort(modes)
    return modes[order], coefficients[order]


def fft_split(samples: BoundarySamples) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split samples on the unit circle into plus and minus parts via FFT

    Modes m >= 0 go to the plus part; negative modes and the Nyquist mode
    go to the minus part.
    """
    if not samples.contour.is_unit_circle:
        raise ConfigurationError("FFT splitting needs the unit circle")
    n = samples.contour.node_count
    modes = np.fft.fftfreq(n, d=1.0 / n)
    spectrum = np.fft.fft(samples.values)
    plus_mask = modes >= 0
    plus_mask[n // 2] = False
    plus = np.fft.ifft(np.where(plus_mask, spectrum, 0.0))
    minus = np.fft.ifft(np.where(plus_mask, 0.0, spectrum))
    return plus, minus


class WindingIndex(int):
    """Integer winding index with the distance of the raw sum from that integer"""

    rounding_gap: float

    def __new__(cls, value: int, rounding_gap: float = 0.0):
        obj = super().__new__(cls, value)
        obj.rounding_gap = float(rounding_gap)
        return obj


def _check_zero(samples: BoundarySamples) -> None:
    magnitude = np.abs(samples.values)
    scale = magnitude.max()
    if scale == 0 or magnitude.min() < Config.ZERO_TOL * scale:
        node = int(magnitude.argmin())
        raise ZeroOnContourError(
            f"samples vanish at node {node}",
            {'node': node, 'tau': [samples.contour.nodes[node].real, samples.contour.nodes[node].imag]})


def _phase_steps(values: np.ndarray) -> np.ndarray:
    closed = np.append(values, values[0])
    return np.angle(closed[1:] / closed[:-1])


def resolved_samples(samples: BoundarySamples) -> BoundarySamples:
    """
    Refine the node count until adjacent phase steps stay below pi/2

    Raises:
        ResolutionError: when MAX_NODE_COUNT is reached first
    """
    _check_zero(samples)
    while np.max(np.abs(_phase_steps(samples.values))) >= 0.5 * math.pi:
        doubled = 2 * samples.contour.node_count
        if doubled > Config.MAX_NODE_COUNT:
            raise ResolutionError(
                "phase varies too fast between nodes",
                {'node_count': samples.contour.node_count, 'max_node_count': Config.MAX_NODE_COUNT})
        logger.debug(f"Doubling node count to {doubled} for phase unwrapping")
        samples = samples.resample(doubled)
        _check_zero(samples)
    return samples


def winding_index(samples: BoundarySamples) -> WindingIndex:
    """
    Net number of turns of f around 0 along the contour

    Returns:
        WindingIndex (int subclass) carrying the rounding gap
    """
    samples = resolved_samples(samples)
    turns = _phase_steps(samples.values).sum() / TWO_PI
    index = int(round(turns))
    return WindingIndex(index, abs(turns - index))


def continuous_log(samples: BoundarySamples) -> BoundarySamples:
    """
    Continuous branch of log f on the nodes, principal at node 0

    Returns:
        Samples of log f, possibly on a refined copy of the contour

    Raises:
        NoCanonicalFactorizationError: when the winding index is nonzero
    """
    samples = resolved_samples(samples)
    steps = _phase_steps(samples.values)
    index = int(round(steps.sum() / TWO_PI))
    if index != 0:
        raise NoCanonicalFactorizationError(index)
    phase = np.angle(samples.values[0]) + np.concatenate(([0.0], np.cumsum(steps[:-1])))
    return BoundarySamples(samples.contour, np.log(np.abs(samples.values)) + 1j * phase)


class ScalarFactorization:
    """
    f = f_minus * f_plus on the contour with f_plus(0) = 1

    f_plus = exp(P_plus L - c0), f_minus = exp(P_minus L + c0), where L is
    a continuous log of f and c0 = P_plus L(0). The normalization exp(c0)
    equals f_minus(infinity).
    """

    def __init__(self, log_samples: BoundarySamples,
                 closed_form: Optional[Callable[[np.ndarray], np.ndarray]] = None):
        self.log_samples = log_samples
        self.contour = log_samples.contour
        self.closed_form = closed_form
        contour = self.contour
        self.log_at_zero = complex(
            (log_samples.values * contour.weights / contour.nodes).sum() / _TWO_PI_I)
        self.normalization = complex(np.exp(self.log_at_zero))
        self._boundary_plus: Optional[np.ndarray] = None

    @property
    def boundary_plus_log(self) -> np.ndarray:
        """Interior limit of P_plus L at the nodes"""
        if self._boundary_plus is None:
            self._boundary_plus = plus_boundary_values(self.log_samples)
        return self._boundary_plus

    def _split(self, tau):
        points, scalar = _as_points(tau)
        node_index, inside, gap = self.contour.classify(points)
        on_node = node_index >= 0
        collar = (~on_node) & (gap < 2.0 * self.contour.spacing)
        if np.any(collar):
            bad = points[np.flatnonzero(collar)[0]]
            raise DomainError(
                "point too close to the contour for quadrature evaluation",
                {'tau': [bad.real, bad.imag], 'collar': 2.0 * self.contour.spacing})
        return points, scalar, node_index, on_node, inside & ~on_node, ~inside & ~on_node

    def _needs_closed_form(self):
        if self.closed_form is None:
            raise DomainError("evaluation across the contour needs a closed form for f")

    def plus(self, tau):
        """f_plus at nodes, inside points, or outside points via f / f_minus"""
        points, scalar, node_index, on_node, inner, outer = self._split(tau)
        log = np.empty(points.shape, dtype=complex)
        log[on_node] = self.boundary_plus_log[node_index[on_node]]
        log[inner] = _cauchy_sum(self.contour, self.log_samples.values, points[inner])
        out = np.exp(log - self.log_at_zero)
        if np.any(outer):
            self._needs_closed_form()
            minus_log = -_cauchy_sum(self.contour, self.log_samples.values, points[outer])
            out[outer] = self.closed_form(points[outer]) * np.exp(-minus_log - self.log_at_zero)
        return _restore(out, tau, scalar)

    def minus(self, tau):
        """f_minus at nodes, outside points (infinity allowed), or inside points via f / f_plus"""
        array = np.asarray(tau, dtype=complex)
        flat = np.atleast_1d(array).ravel()
        infinite = ~np.isfinite(flat)
        out = np.full(flat.shape, self.normalization, dtype=complex)
        if np.any(~infinite):
            finite = flat[~infinite]
            points, _, node_index, on_node, inner, outer = self._split(finite)
            log = np.empty(points.shape, dtype=complex)
            log[on_node] = (self.log_samples.values - self.boundary_plus_log)[node_index[on_node]]
            log[outer] = -_cauchy_sum(self.contour, self.log_samples.values, points[outer])
            values = np.exp(log + self.log_at_zero)
            if np.any(inner):
                self._needs_closed_form()
                plus_log = _cauchy_sum(self.contour, self.log_samples.values, points[inner])
                values[inner] = self.closed_form(points[inner]) * np.exp(-(plus_log - self.log_at_zero))
            out[~infinite] = values
        return _restore(out, tau, array.ndim == 0)

    def log_derivative(self, tau):
        """d/dtau log f_plus at interior points beyond the collar"""
        points, scalar, _, on_node, inner, _ = self._split(tau)
        if not np.all(inner):
            raise DomainError("log_derivative needs interior points off the contour")
        density = self.log_samples.values * self.contour.weights
        out = np.empty(points.shape, dtype=complex)
        for start in range(0, points.size, _CHUNK):
            block = points[start:start + _CHUNK]
            out[start:start + _CHUNK] = (
                density[None, :] / (self.contour.nodes[None, :] - block[:, None]) ** 2).sum(axis=1)
        return _restore(out / _TWO_PI_I, tau, scalar)

    def log_taylor(self, order: int) -> np.ndarray:
        """
        Taylor coefficients t_0..t_order of log f_plus at 0 (t_0 = 0)
        """
        nodes = self.contour.nodes
        smallest = float(np.min(np.abs(nodes)))
        if smallest ** order < 1e-12:
            raise TaylorConditioningError(
                "contour too close to the origin for Taylor extraction",
                {'min_abs_node': smallest, 'order': order})
        density = self.log_samples.values * self.contour.weights
        coefficients = np.zeros(order + 1, dtype=complex)
        for n in range(1, order + 1):
            coefficients[n] = (density / nodes ** (n + 1)).sum() / _TWO_PI_I
        return coefficients


def scalar_canonical_factorization(samples: BoundarySamples,
                                   log_samples: Optional[BoundarySamples] = None) -> ScalarFactorization:
    """
    Canonical factorization f = f_minus * f_plus with f_plus(0) = 1

    Args:
        samples: Boundary samples of f
        log_samples: Exact log of f on the same nodes, when known

    Returns:
        ScalarFactorization

    Raises:
        NoCanonicalFactorizationError: when the winding index is nonzero
    """
    if log_samples is None:
        log_samples = continuous_log(samples)
    elif log_samples.contour is not samples.contour:
        raise ConfigurationError("log samples live on a different contour")
    return ScalarFactorization(log_samples, samples.closed_form)


def bessel_contour_j0(rho, contour: Contour) -> np.ndarray:
    """
    J0 as a contour integral: (1/2 pi i) sum exp(rho (z - 1/z) / 2) w_k / z_k

    Args:
        rho: Real scalar or array
        contour: Contour encircling the origin

    Returns:
        Real part of the quadrature, shaped like rho
    """
    rho = np.asarray(rho, dtype=float)
    nodes = contour.nodes
    kernel = contour.weights / nodes / _TWO_PI_I
    flat = rho.ravel()
    values = np.exp(0.5 * flat[:, None] * (nodes[None, :] - 1.0 / nodes[None, :]))
    return (values * kernel[None, :]).sum(axis=1).real.reshape(rho.shape)
