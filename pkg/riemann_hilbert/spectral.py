"""
Spectral relation between the constant parameter omega and the
position-dependent parameter tau at a Weyl point (rho, v):

    omega = v + (lambda/2) * rho * (lambda - tau**2) / tau
"""
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from config import Config
from riemann_hilbert.contour import Contour, Lambda, PointLocation
from utils.errors import (
    BranchCrossingError,
    BranchPointError,
    DomainError,
    InadmissibleContourError,
    SingularDerivativeError,
)


@dataclass(frozen=True)
class WeylPoint:
    """Point of the reduced two-dimensional space, rho > 0"""
    rho: float
    v: float

    def __post_init__(self):
        rho, v = float(self.rho), float(self.v)
        if not (math.isfinite(rho) and math.isfinite(v)):
            raise DomainError(f"Weyl point must be finite, got ({self.rho}, {self.v})")
        if rho <= 0:
            raise DomainError(f"rho must be positive, got {rho}")
        object.__setattr__(self, 'rho', rho)
        object.__setattr__(self, 'v', v)

    def to_dict(self):
        return {'rho': self.rho, 'v': self.v}


class RootPair(NamedTuple):
    """Roots of the spectral relation; phi * phi_tilde = -lambda"""
    phi: complex
    phi_tilde: complex


class RootDerivatives(NamedTuple):
    d_rho: np.ndarray
    d_v: np.ndarray
    d_omega: np.ndarray


def spectral_map(tau, point: WeylPoint, lam: Lambda):
    """
    omega(tau) at a Weyl point

    Args:
        tau: Nonzero complex scalar or array
        point: Weyl point
        lam: Signature sign

    Returns:
        omega with the shape of tau
    """
    tau = np.asarray(tau, dtype=complex)
    if np.any(tau == 0):
        raise DomainError("spectral map undefined at tau = 0")
    lam = int(lam)
    omega = point.v + 0.5 * lam * point.rho * (lam - tau ** 2) / tau
    return omega if omega.ndim else complex(omega)


def _roots(omega, rho, v, lam: int):
    delta = omega - v
    disc = delta * delta + lam * rho * rho
    near_branch = np.abs(disc) <= Config.BRANCH_TOL * (np.abs(delta) ** 2 + rho * rho)
    phi = (-lam * delta + np.sqrt(disc)) / rho
    return phi, -lam / np.where(phi == 0, 1.0, phi), near_branch


def spectral_roots(omega: complex, point: WeylPoint, lam: Lambda) -> RootPair:
    """
    The two tau with omega(tau) = omega, principal branch first

    Raises:
        BranchPointError: when the discriminant vanishes
    """
    phi, phi_tilde, near_branch = _roots(complex(omega), point.rho, point.v, int(lam))
    if near_branch:
        raise BranchPointError(
            "omega is a branch point of the spectral roots",
            {'omega': [complex(omega).real, complex(omega).imag], **point.to_dict()})
    return RootPair(complex(phi), complex(phi_tilde))


def root_derivatives(phi, rho, lam: Lambda) -> RootDerivatives:
    """
    Partial derivatives of a root phi(omega; rho, v)

    Args:
        phi: Root value(s)
        rho: Matching rho value(s)
        lam: Signature sign

    Returns:
        RootDerivatives(d_rho, d_v, d_omega) shaped like phi
    """
    phi = np.asarray(phi, dtype=complex)
    rho = np.asarray(rho, dtype=float)
    lam = int(lam)
    denominator = lam + phi ** 2
    if np.any(np.abs(denominator) <= Config.BRANCH_TOL * np.maximum(1.0, np.abs(phi) ** 2)):
        raise SingularDerivativeError("root derivative is singular at the fixed points of the involution")
    d_rho = (phi / rho) * (lam - phi ** 2) / denominator
    d_v = 2.0 * lam * phi ** 2 / (rho * denominator)
    return RootDerivatives(d_rho, d_v, -d_v)


def track_roots(omega: complex, points: Sequence[WeylPoint], lam: Lambda,
                start: Optional[complex] = None) -> List[RootPair]:
    """
    Continue one root along a path of Weyl points

    The first pair is principal unless start selects the other root. Each
    later phi is the candidate nearest the previous one.

    Raises:
        BranchCrossingError: when the step is comparable to the root gap
    """
    pairs: List[RootPair] = []
    previous = start
    for point in points:
        phi, phi_tilde = spectral_roots(omega, point, lam)
        if previous is None:
            chosen, other = phi, phi_tilde
        elif abs(phi - previous) <= abs(phi_tilde - previous):
            chosen, other = phi, phi_tilde
        else:
            chosen, other = phi_tilde, phi
        if previous is not None and abs(chosen - previous) > 0.5 * abs(chosen - other):
            raise BranchCrossingError(
                "root continuation crosses the branch locus",
                {'rho': point.rho, 'v': point.v})
        pairs.append(RootPair(chosen, other))
        previous = chosen
    return pairs


def root_field(omega: complex, rho_values: np.ndarray, v_values: np.ndarray, lam: Lambda,
               inside_of: Optional[Contour] = None) -> np.ndarray:
    """
    Continuous root phi_omega on a rectangular (rho, v) grid

    With inside_of, the root inside that contour is chosen at the first
    grid point and every root of the field must stay inside.

    Returns:
        Complex array of shape (len(rho_values), len(v_values))
    """
    rho_values = np.asarray(rho_values, dtype=float)
    v_values = np.asarray(v_values, dtype=float)
    if np.any(rho_values <= 0):
        raise DomainError("rho grid must be positive")
    lam = Lambda.parse(lam)
    rho_grid, v_grid = np.meshgrid(rho_values, v_values, indexing='ij')
    phi, phi_tilde, near_branch = _roots(complex(omega), rho_grid, v_grid, int(lam))
    if np.any(near_branch):
        raise BranchPointError("omega meets a branch point on the grid", {'omega': [omega.real, omega.imag]})

    first = phi[0, 0]
    if inside_of is not None:
        location = inside_of.locate(first)
        if location is PointLocation.ON_CONTOUR:
            raise InadmissibleContourError("spectral root lies on the contour")
        if location is PointLocation.OUTSIDE:
            first = phi_tilde[0, 0]

    field = np.empty(phi.shape, dtype=complex)
    field[0, 0] = first

    def pick(i, j, previous):
        a, b = phi[i, j], phi_tilde[i, j]
        chosen, other = (a, b) if abs(a - previous) <= abs(b - previous) else (b, a)
        if abs(chosen - previous) > 0.5 * abs(chosen - other):
            raise BranchCrossingError(
                "root continuation crosses the branch locus",
                {'rho': float(rho_values[i]), 'v': float(v_values[j])})
        return chosen

    for i in range(1, field.shape[0]):
        field[i, 0] = pick(i, 0, field[i - 1, 0])
    for i in range(field.shape[0]):
        for j in range(1, field.shape[1]):
            field[i, j] = pick(i, j, field[i, j - 1])

    if inside_of is not None:
        _, inside, gap = inside_of.classify(field)
        if not np.all(inside) or np.any(gap < inside_of.tolerance):
            raise InadmissibleContourError("spectral root leaves the interior of the contour on the grid")
    return field
