"""
Residual checks for solutions on (rho, v) grids

A_j = d log M_j is the one-form of the reduced field equation
d(rho * star A) = 0, with star drho = -lambda dv and star dv = drho.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from config import Config
from riemann_hilbert.contour import Lambda, involution
from riemann_hilbert.spectral import root_field
from solutions.factorize import CanonicalSolution
from solutions.families import GridSpec, SolutionFamily
from solutions.monodromy import symmetry_residual
from utils.errors import ConfigurationError
from utils.logger import setup_logger
from verification.stencils import fd4_derivative

logger = setup_logger(__name__)

RHO_AXIS = 1
V_AXIS = 2


@dataclass
class SolutionGrid:
    """M values over a uniform grid, channels on the leading axis"""
    rho: np.ndarray
    v: np.ndarray
    m_values: np.ndarray
    family: Optional[SolutionFamily] = None
    spec: Optional[GridSpec] = None

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.m_values = np.asarray(self.m_values, dtype=complex)
        if self.m_values.shape[1:] != (self.rho.size, self.v.size):
            raise ConfigurationError("M values do not match the grid shape")
        for name, axis in (('rho', self.rho), ('v', self.v)):
            steps = np.diff(axis)
            if steps.size == 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
                raise ConfigurationError(f"{name} grid must be uniform")

    @classmethod
    def solve(cls, family: SolutionFamily, spec: GridSpec) -> 'SolutionGrid':
        logger.info(f"Solving {family.n_channels}-channel family on grid {spec}")
        return cls(spec.rho_values, spec.v_values, family.m_grid(spec), family, spec)

    @property
    def h_rho(self) -> float:
        return float(self.rho[1] - self.rho[0])

    @property
    def h_v(self) -> float:
        return float(self.v[1] - self.v[0])

    @property
    def lam(self) -> Lambda:
        if self.family is None:
            raise ConfigurationError("grid without a family needs an explicit lambda")
        return self.family.lam


@dataclass
class OneFormA:
    """Components of A = d log M, shape (channels, n_rho, n_v)"""
    a_rho: np.ndarray
    a_v: np.ndarray


@dataclass
class CheckResult:
    name: str
    max_residual: float
    tolerance: float
    refinement_ratio: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_residual) and self.max_residual <= self.tolerance)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'max_residual': self.max_residual,
            'tolerance': self.tolerance,
            'passed': self.passed,
            'refinement_ratio': self.refinement_ratio,
            'details': self.details,
        }


def _lam(grid: SolutionGrid, lam: Optional[Lambda]) -> int:
    return int(Lambda.parse(lam)) if lam is not None else int(grid.lam)


def compute_a(grid: SolutionGrid, mode: str = 'analytic') -> OneFormA:
    """
    A = M^-1 dM on the grid

    Args:
        grid: Solution grid
        mode: 'analytic' differentiates under the Cauchy integral (needs the
            family); 'finite_difference' differentiates the stored M values

    Returns:
        OneFormA
    """
    if mode == 'analytic':
        if grid.family is None or grid.spec is None:
            raise ConfigurationError("analytic A needs the solution family")
        gradient = grid.family.gradient_grid(grid.spec)
        return OneFormA(gradient[0], gradient[1])
    if mode in ('finite_difference', 'fd'):
        m = grid.m_values
        return OneFormA(fd4_derivative(m, grid.h_rho, RHO_AXIS) / m,
                        fd4_derivative(m, grid.h_v, V_AXIS) / m)
    raise ConfigurationError(f"unknown A mode {mode!r}")


def field_equation_residual(grid: SolutionGrid, a: OneFormA, lam: Optional[Lambda] = None) -> np.ndarray:
    """|d_rho(rho A_rho) + lambda rho d_v A_v|, max over channels"""
    lam_value = _lam(grid, lam)
    rho = grid.rho[None, :, None]
    residual = (fd4_derivative(rho * a.a_rho, grid.h_rho, RHO_AXIS)
                + lam_value * rho * fd4_derivative(a.a_v, grid.h_v, V_AXIS))
    return np.abs(residual).max(axis=0)


def zero_curvature_residual(grid: SolutionGrid, a: OneFormA) -> np.ndarray:
    """|d_v A_rho - d_rho A_v|; A is closed for diagonal solutions"""
    residual = fd4_derivative(a.a_rho, grid.h_v, V_AXIS) - fd4_derivative(a.a_v, grid.h_rho, RHO_AXIS)
    return np.abs(residual).max(axis=0)


def psi_gradient(a: OneFormA, rho: np.ndarray, lam: int):
    """
    Gradient of the conformal factor psi

    d_rho psi = (rho/4) Tr(A_rho^2 - lambda A_v^2), d_v psi = (rho/2) Tr(A_rho A_v)
    """
    rho = np.asarray(rho)[:, None]
    psi_rho = 0.25 * rho * (a.a_rho ** 2 - lam * a.a_v ** 2).sum(axis=0)
    psi_v = 0.5 * rho * (a.a_rho * a.a_v).sum(axis=0)
    return psi_rho, psi_v


def psi_mixed_partials_residual(grid: SolutionGrid, a: OneFormA, lam: Optional[Lambda] = None) -> np.ndarray:
    """|d_v(d_rho psi) - d_rho(d_v psi)|; vanishes when the field equation holds"""
    psi_rho, psi_v = psi_gradient(a, grid.rho, _lam(grid, lam))
    return np.abs(fd4_derivative(psi_rho, grid.h_v, 1) - fd4_derivative(psi_v, grid.h_rho, 0))


def default_lax_omegas(spec: GridSpec) -> List[complex]:
    center = 0.5 * (spec.v_min + spec.v_max)
    return [center + offset for offset in (2j, 3j, -2j, 1 + 2.5j, -1 + 3j)]


def _x_at_roots(family: SolutionFamily, spec: GridSpec, phi: np.ndarray, method: str) -> np.ndarray:
    points = spec.points()
    flat_phi = phi.ravel()

    def evaluate(index: int):
        solution = family.solve(points[index])
        return getattr(solution, method)(flat_phi[index])

    from utils.task_manager import parallel_map
    values = parallel_map(evaluate, range(len(points)))
    return np.stack(values, axis=-1).reshape(family.n_channels, *spec.shape)


def lax_residual(family: SolutionFamily, spec: GridSpec, omega: complex,
                 a: Optional[OneFormA] = None) -> np.ndarray:
    """
    Residual of tau (dX + A X) = star dX at tau = phi_omega(rho, v)

    X~ = X(phi_omega(rho, v); rho, v) with phi the root inside the contour.
    Residuals are relative to |X~|, max over channels and both components.
    """
    lam = int(family.lam)
    phi = root_field(omega, spec.rho_values, spec.v_values, family.lam, inside_of=family.contour)
    x = _x_at_roots(family, spec, phi, 'x_values')
    if a is None:
        gradient = family.gradient_grid(spec)
        a = OneFormA(gradient[0], gradient[1])
    d_rho = fd4_derivative(x, spec.h_rho, RHO_AXIS)
    d_v = fd4_derivative(x, spec.h_v, V_AXIS)
    component_rho = phi * (d_rho + a.a_rho * x) - d_v
    component_v = phi * (d_v + a.a_v * x) + lam * d_rho
    scale = np.abs(x)
    return np.maximum(np.abs(component_rho) / scale, np.abs(component_v) / scale).max(axis=0)


def a_from_x_residual(family: SolutionFamily, spec: GridSpec, a: Optional[OneFormA] = None):
    """
    A recovered from the Taylor coefficients t_n of log X at tau = 0:
    A_rho = d_v t_1, A_v = -2 lambda (d_rho t_1 - d_v t_2 / 2)

    Returns:
        (residual of A_rho, residual of A_v), each max over channels
    """
    lam = int(family.lam)
    taylor = family.sweep(lambda p: family.solve(p).log_x_taylor(2), spec)
    coefficients = np.stack(taylor, axis=-1).reshape(family.n_channels, 3, *spec.shape)
    t1 = coefficients[:, 1]
    t2 = coefficients[:, 2]
    if a is None:
        gradient = family.gradient_grid(spec)
        a = OneFormA(gradient[0], gradient[1])
    a_rho = fd4_derivative(t1, spec.h_v, V_AXIS)
    a_v = -2.0 * lam * (fd4_derivative(t1, spec.h_rho, RHO_AXIS) - 0.5 * fd4_derivative(t2, spec.h_v, V_AXIS))
    return np.abs(a.a_rho - a_rho).max(axis=0), np.abs(a.a_v - a_v).max(axis=0)


@dataclass
class NormalizationReport:
    x0_deviation: float
    whmt_residual: float
    symmetry_residual: float
    det_deviation: float

    def flags(self, tolerance: Optional[float] = None) -> List[str]:
        tolerance = tolerance if tolerance is not None else Config.SYMMETRY_TOL
        return [name for name in ('x0_deviation', 'whmt_residual', 'symmetry_residual', 'det_deviation')
                if not getattr(self, name) <= tolerance]

    def to_dict(self) -> Dict[str, float]:
        return {
            'x0_deviation': self.x0_deviation,
            'whmt_residual': self.whmt_residual,
            'symmetry_residual': self.symmetry_residual,
            'det_deviation': self.det_deviation,
        }


def normalization_and_symmetry_report(solution: CanonicalSolution) -> NormalizationReport:
    """
    X(0) = I, the factorization identity on the nodes, the involution
    symmetry of the monodromy and det deviation
    """
    contour = solution.contour
    nodes = contour.nodes
    x0 = solution.x_values(np.array([0j]))[:, 0]
    monodromy_values = solution.monodromy_values(nodes)
    x_direct = solution.x_values(nodes)
    x_mirror = solution.x_values(np.asarray(involution(nodes, contour.lam)))
    rebuilt = x_mirror * solution.m_matrix[:, None] * x_direct
    scale = np.abs(monodromy_values).max(axis=1, keepdims=True)
    return NormalizationReport(
        x0_deviation=float(np.max(np.abs(x0 - 1.0))),
        whmt_residual=float(np.max(np.abs(monodromy_values - rebuilt) / scale)),
        symmetry_residual=symmetry_residual(solution.monodromy, solution.point, contour),
        det_deviation=float(np.max(np.abs(np.prod(monodromy_values, axis=0) - 1.0))),
    )
