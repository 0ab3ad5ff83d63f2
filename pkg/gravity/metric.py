"""
Four-dimensional metric data from 2x2 solutions

    M = [[Delta + B~^2/Delta, B~/Delta], [B~/Delta, 1/Delta]]

The conformal factor psi integrates d_rho psi = (rho/4) Tr(A_rho^2 - lambda A_v^2),
d_v psi = (rho/2) Tr(A_rho A_v).
"""
import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Optional, TextIO, Tuple, Union

import numpy as np

from config import Config
from gravity.bessel import bessel_j
from riemann_hilbert.contour import Lambda
from riemann_hilbert.spectral import WeylPoint
from utils.errors import (
    ConfigurationError,
    DomainError,
    NotCosetRepresentativeError,
    UnreachableExponentsError,
)
from utils.logger import setup_logger
from verification.checks import OneFormA, psi_gradient
from verification.stencils import cumulative_integral

logger = setup_logger(__name__)


def assemble_m(delta, b_tilde) -> np.ndarray:
    """2x2 matrix (batched over leading axes) from Delta and B~"""
    delta = np.asarray(delta, dtype=complex)
    b_tilde = np.asarray(b_tilde, dtype=complex)
    if np.any(delta == 0):
        raise DomainError("Delta must be nonzero")
    m = np.empty(delta.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = delta + b_tilde ** 2 / delta
    m[..., 0, 1] = m[..., 1, 0] = b_tilde / delta
    m[..., 1, 1] = 1.0 / delta
    return m


def extract_delta_b(m, tolerance: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Delta = 1/M22 and B~ = M12/M22 from symmetric unimodular 2x2 matrices

    Raises:
        NotCosetRepresentativeError: M not symmetric, det != 1 or M22 = 0
    """
    tolerance = tolerance if tolerance is not None else Config.SYMMETRY_TOL
    m = np.asarray(m, dtype=complex)
    if m.shape[-2:] != (2, 2):
        raise NotCosetRepresentativeError("metric extraction needs 2x2 matrices")
    scale = np.maximum(1.0, np.abs(m).max(axis=(-2, -1)))
    if np.any(np.abs(m[..., 0, 1] - m[..., 1, 0]) > tolerance * scale):
        raise NotCosetRepresentativeError("M is not symmetric")
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    if np.any(np.abs(det - 1.0) > tolerance * scale ** 2):
        raise NotCosetRepresentativeError("det M differs from 1",
                                          {'max_det_deviation': float(np.max(np.abs(det - 1.0)))})
    if np.any(m[..., 1, 1] == 0):
        raise NotCosetRepresentativeError("M22 vanishes")
    return 1.0 / m[..., 1, 1], m[..., 0, 1] / m[..., 1, 1]


def diagonal_matrices(m_values: np.ndarray) -> np.ndarray:
    """diag(M_1, M_2) for channel-stacked values of shape (2, ...)"""
    m_values = np.asarray(m_values, dtype=complex)
    if m_values.shape[0] != 2:
        raise NotCosetRepresentativeError(f"metric extraction needs two channels, got {m_values.shape[0]}")
    out = np.zeros(m_values.shape[1:] + (2, 2), dtype=complex)
    out[..., 0, 0] = m_values[0]
    out[..., 1, 1] = m_values[1]
    return out


def realness_domain(m_values: np.ndarray, tolerance: Optional[float] = None) -> np.ndarray:
    """Mask of grid points where every channel is real within tolerance"""
    tolerance = tolerance if tolerance is not None else Config.REALNESS_TOL
    m_values = np.asarray(m_values, dtype=complex)
    return np.all(np.abs(m_values.imag) <= tolerance * np.maximum(1.0, np.abs(m_values.real)), axis=0)


@dataclass
class PsiResult:
    psi: np.ndarray
    path_residual: float


def _grid_index(values: np.ndarray, target: float, name: str) -> int:
    index = int(np.argmin(np.abs(values - target)))
    if abs(values[index] - target) > 1e-9 * max(1.0, abs(target)):
        raise ConfigurationError(f"base point {name}={target} is not a grid node")
    return index


def integrate_psi(a: OneFormA, rho: np.ndarray, v: np.ndarray, lam: Union[Lambda, int],
                  base_point: Optional[WeylPoint] = None, constant: complex = 0.0) -> PsiResult:
    """
    Integrate the psi gradient along two axis-aligned paths

    Args:
        a: A on the grid
        rho, v: Uniform grid axes (rho > 0)
        lam: Signature sign
        base_point: Grid node where psi = constant (defaults to the first node)
        constant: Integration constant

    Returns:
        PsiResult with psi from the rho-then-v path and the max difference
        between the two paths
    """
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("psi integration needs rho > 0 on the whole grid")
    i0 = 0 if base_point is None else _grid_index(rho, base_point.rho, 'rho')
    j0 = 0 if base_point is None else _grid_index(v, base_point.v, 'v')
    h_rho = float(rho[1] - rho[0])
    h_v = float(v[1] - v[0])

    psi_rho, psi_v = psi_gradient(a, rho, int(Lambda.parse(lam)))
    along_rho = cumulative_integral(psi_rho, h_rho, axis=0, origin=i0)
    along_v = cumulative_integral(psi_v, h_v, axis=1, origin=j0)

    first = along_rho[:, j0][:, None] + along_v
    second = along_v[i0, :][None, :] + along_rho
    residual = float(np.max(np.abs(first - second)))
    logger.debug(f"psi path residual {residual:.3e}")
    return PsiResult(first + constant, residual)


def line_element_descriptor(sigma: int = 1, epsilon: int = -1) -> Dict[str, Any]:
    """Two- and four-dimensional line elements for signs (sigma, epsilon), lambda = sigma * epsilon"""
    if sigma not in (1, -1) or epsilon not in (1, -1):
        raise ConfigurationError("sigma and epsilon must be +1 or -1")
    lam = sigma * epsilon

    def signed(sign: int, term: str) -> str:
        return term if sign > 0 else f"-{term}"

    return {
        'sigma': sigma,
        'epsilon': epsilon,
        'lambda': lam,
        'ds2_2d': f"{signed(sigma, 'drho^2')} + {signed(epsilon, 'dv^2')}".replace('+ -', '- '),
        'ds2_4d': f"{signed(-lam, 'Delta (dy + B dphi)^2')} + Delta^-1 (e^psi ds2_2d + rho^2 dphi^2)",
    }


@dataclass
class MetricData:
    """Delta, B~, psi and the realness mask on a grid"""
    rho: np.ndarray
    v: np.ndarray
    delta: np.ndarray
    b_tilde: np.ndarray
    psi: np.ndarray
    real_mask: np.ndarray
    path_residual: float
    sigma: int = 1
    epsilon: int = -1

    def to_csv(self, stream: Optional[TextIO] = None) -> str:
        """CSV table rho,v,delta,b,psi,real (17 significant digits, LF)"""
        buffer = stream or io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(['rho', 'v', 'delta', 'b', 'psi', 'real'])
        for i, r in enumerate(self.rho):
            for j, vv in enumerate(self.v):
                writer.writerow([
                    '%.17g' % r, '%.17g' % vv,
                    '%.17g' % self.delta[i, j].real, '%.17g' % self.b_tilde[i, j].real,
                    '%.17g' % self.psi[i, j].real, int(bool(self.real_mask[i, j])),
                ])
        return buffer.getvalue() if stream is None else ''

    def summary(self) -> Dict[str, Any]:
        return {
            'grid': [int(self.rho.size), int(self.v.size)],
            'real_fraction': float(np.mean(self.real_mask)),
            'psi_path_residual': self.path_residual,
            'line_element': line_element_descriptor(self.sigma, self.epsilon),
        }


def metric_data(m_values: np.ndarray, a: OneFormA, rho: np.ndarray, v: np.ndarray,
                lam: Union[Lambda, int], base_point: Optional[WeylPoint] = None,
                constant: complex = 0.0, sigma: int = 1, epsilon: int = -1) -> MetricData:
    """
    Metric functions from a two-channel diagonal solution grid

    Raises:
        NotCosetRepresentativeError: channels are not reciprocal
    """
    if sigma not in (1, -1) or epsilon not in (1, -1):
        raise ConfigurationError("sigma and epsilon must be +1 or -1")
    if sigma * epsilon != int(Lambda.parse(lam)):
        raise ConfigurationError(f"sigma * epsilon must equal lambda = {int(Lambda.parse(lam))}")
    delta, b_tilde = extract_delta_b(diagonal_matrices(m_values))
    psi = integrate_psi(a, rho, v, lam, base_point, constant)
    return MetricData(np.asarray(rho), np.asarray(v), delta, b_tilde, psi.psi,
                      realness_domain(m_values), psi.path_residual, sigma, epsilon)


# ----------------------------------------------------------------------
# closed forms
# ----------------------------------------------------------------------
def einstein_rosen_psi(k: float, a: float, b: float, rho, v):
    """psi of the Einstein-Rosen family for lambda = -1, with psi -> 0 as rho -> 0"""
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    amplitude = (2.0 * b * math.exp(-a * k)) ** 2
    x = k * rho
    j0 = bessel_j(0, x)
    j1 = bessel_j(1, x)
    return amplitude * (x ** 2 * j0 ** 2 + x ** 2 * j1 ** 2 - 2.0 * k * np.cos(k * v) ** 2 * rho * j0 * j1)


def pulse_psi(a: float, b: float, rho, v):
    """psi of the pulse family, vanishing at rho = 0, v = 0"""
    if a == 0:
        raise DomainError("pulse psi needs a != 0")
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    shifted = a ** 2 + rho ** 2 - v ** 2
    q = shifted ** 2 + 4.0 * a ** 2 * v ** 2
    bracket = (1.0
               - 2.0 * a ** 2 * rho ** 2 * (shifted ** 2 - 4.0 * a ** 2 * v ** 2) / q ** 2
               + (rho ** 2 - a ** 2 - v ** 2) / np.sqrt(q))
    return (b / a) ** 2 * bracket


@dataclass(frozen=True)
class KasnerExponents:
    n: int
    p1: Fraction
    p2: Fraction
    p3: Fraction

    def __post_init__(self):
        if self.p1 + self.p2 + self.p3 != 1 or self.p1 ** 2 + self.p2 ** 2 + self.p3 ** 2 != 1:
            raise DomainError("exponents violate the Kasner conditions")

    def as_floats(self) -> Tuple[float, float, float]:
        return float(self.p1), float(self.p2), float(self.p3)

    def to_dict(self) -> Dict[str, Any]:
        return {'n': self.n, 'p1': str(self.p1), 'p2': str(self.p2), 'p3': str(self.p3)}


def kasner_exponents(n: int) -> KasnerExponents:
    """Exact exponents reached by the n-fold deformation"""
    if isinstance(n, bool) or int(n) != n:
        raise ConfigurationError(f"Kasner index must be an integer, got {n!r}")
    n = int(n)
    if n < 1:
        raise DomainError(f"Kasner index must be at least 1, got {n}")
    denominator = n * n - n + 1
    return KasnerExponents(n, Fraction(n * (n - 1), denominator), Fraction(1 - n, denominator),
                           Fraction(n, denominator))


def kasner_index_for(p1, p2, p3) -> int:
    """
    Integer n whose deformation yields the given exponents

    Raises:
        UnreachableExponentsError: no integer n >= 1 reaches them
    """
    p1, p2, p3 = (Fraction(p).limit_denominator(10 ** 6) for p in (p1, p2, p3))
    if p2 + p3 == 0:
        raise UnreachableExponentsError("exponents are outside the deformed family",
                                        {'exponents': [str(p1), str(p2), str(p3)]})
    n = p3 / (p2 + p3)
    if n.denominator != 1 or n < 1 or kasner_exponents(int(n)).as_floats() != (float(p1), float(p2), float(p3)):
        raise UnreachableExponentsError("exponents are outside the deformed family",
                                        {'exponents': [str(p1), str(p2), str(p3)]})
    return int(n)


def kasner_line_element(n: int, constant: Optional[float] = None) -> Dict[str, Any]:
    """
    Kasner descriptor for the n-fold deformation

    Delta = (rho/2)^(2n), e^psi = c rho^(2 n^2); t = rho^(1/(1-p1)) up to scale.
    """
    exponents = kasner_exponents(n)
    default = Fraction(1, 2 ** (2 * n)) / (1 - exponents.p1) ** 2
    c = float(default) if constant is None else float(constant)
    return {
        'exponents': exponents.to_dict(),
        'delta': f"(rho/2)**{2 * n}",
        'exp_psi': f"c * rho**{2 * n * n}",
        'integration_constant': c,
        'integration_constant_exact': str(default) if constant is None else None,
        'coordinates': {'t': f"rho**(1/(1 - {exponents.p1}))", 'x1': f"v / (1 - {exponents.p1})"},
        'line_element': "-dt^2 + t^(2 p1) dx1^2 + t^(2 p2) dx2^2 + t^(2 p3) dx3^2",
    }
