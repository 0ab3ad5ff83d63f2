"""
Conserved currents generated by omega-derivatives of X

Y = X~^-1 d_omega X~ with X~(rho, v) = X(phi_omega(rho, v); rho, v), and
J = star dY, i.e. J_rho = d_v Y and J_v = -lambda d_rho Y.
"""
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from riemann_hilbert.spectral import root_derivatives, root_field
from solutions.families import GridSpec, SolutionFamily
from utils.logger import setup_logger
from verification.checks import _x_at_roots
from verification.stencils import fd4_derivative

logger = setup_logger(__name__)


@dataclass
class CurrentField:
    """Current components, shape (channels, n_rho, n_v)"""
    j_rho: np.ndarray
    j_v: np.ndarray
    rho: np.ndarray
    v: np.ndarray
    lam: int
    omega: complex
    phi: np.ndarray

    @property
    def h_rho(self) -> float:
        return float(self.rho[1] - self.rho[0])

    @property
    def h_v(self) -> float:
        return float(self.v[1] - self.v[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            'omega': [self.omega.real, self.omega.imag],
            'lambda': self.lam,
            'rho': self.rho.tolist(),
            'v': self.v.tolist(),
            'j_rho': [[[z.real, z.imag] for z in row] for row in self.j_rho[0]],
            'j_v': [[[z.real, z.imag] for z in row] for row in self.j_v[0]],
        }


def kac_moody_current(family: SolutionFamily, spec: GridSpec, omega: complex) -> CurrentField:
    """
    Current for the omega-derivative of the family

    Args:
        family: Solution family
        spec: Grid (at least five points per axis)
        omega: Spectral parameter whose inside root stays off the contour

    Returns:
        CurrentField
    """
    omega = complex(omega)
    lam = int(family.lam)
    phi = root_field(omega, spec.rho_values, spec.v_values, family.lam, inside_of=family.contour)
    rho_grid = np.broadcast_to(spec.rho_values[:, None], phi.shape)
    d_omega_phi = root_derivatives(phi, rho_grid, family.lam).d_omega
    logger.debug(f"Computing current for omega={omega} on grid {spec}")
    y = _x_at_roots(family, spec, phi, 'x_log_derivative') * d_omega_phi[None]
    j_rho = fd4_derivative(y, spec.h_v, 2)
    j_v = -lam * fd4_derivative(y, spec.h_rho, 1)
    return CurrentField(j_rho, j_v, spec.rho_values, spec.v_values, lam, omega, phi)


def star_d_current(family: SolutionFamily, spec: GridSpec, omega: complex) -> CurrentField:
    """J = star dX~ at tau = phi_omega, a diagnostic next to the Lax residual"""
    omega = complex(omega)
    lam = int(family.lam)
    phi = root_field(omega, spec.rho_values, spec.v_values, family.lam, inside_of=family.contour)
    x = _x_at_roots(family, spec, phi, 'x_values')
    d_rho = fd4_derivative(x, spec.h_rho, 1)
    d_v = fd4_derivative(x, spec.h_v, 2)
    # star(d_rho X drho + d_v X dv) = d_v X drho - lambda d_rho X dv
    return CurrentField(d_v, -lam * d_rho, spec.rho_values, spec.v_values, lam, omega, phi)


def current_conservation_residual(current: CurrentField) -> np.ndarray:
    """|-lambda d_rho J_rho - d_v J_v|, max over channels"""
    residual = (-current.lam * fd4_derivative(current.j_rho, current.h_rho, 1)
                - fd4_derivative(current.j_v, current.h_v, 2))
    return np.abs(residual).max(axis=0)


def kasner_current_closed_form(n: int, current: CurrentField) -> CurrentField:
    """
    Closed-form current of the deformed Kasner family (lambda = -1)

    J = -4n diag(1, -1) phi^2 / (rho^2 (phi^2 - 1)^3) [(-phi^2 - 1) drho - 2 phi dv]
    """
    phi = current.phi
    rho = current.rho[:, None]
    common = -4.0 * n * phi ** 2 / (rho ** 2 * (phi ** 2 - 1.0) ** 3)
    j_rho = common * (-phi ** 2 - 1.0)
    j_v = common * (-2.0 * phi)
    signs = np.array([1.0, -1.0])[:, None, None]
    return CurrentField(signs * j_rho[None], signs * j_v[None], current.rho, current.v,
                        current.lam, current.omega, phi)
