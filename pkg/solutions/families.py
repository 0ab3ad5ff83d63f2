"""
Solution families: a factorization recipe evaluated over Weyl points
"""
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple, TypeVar, Union

import numpy as np

from riemann_hilbert.contour import Contour, Lambda
from riemann_hilbert.spectral import WeylPoint, root_derivatives, spectral_map, spectral_roots
from solutions.factorize import (
    Backend,
    CanonicalSolution,
    DeformationSpec,
    canonical_solve,
    deform,
    deformation_factor,
    invert_solution,
    multiply_solutions,
)
from solutions.monodromy import DiagonalMonodromy
from utils.errors import BranchPointError, ConfigurationError, ContourMismatchError
from utils.task_manager import parallel_map

R = TypeVar('R')
_TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class GridSpec:
    """Uniform rectangular grid 'rmin:rmax:n,vmin:vmax:n'"""
    rho_min: float
    rho_max: float
    n_rho: int
    v_min: float
    v_max: float
    n_v: int

    def __post_init__(self):
        if self.n_rho < 2 or self.n_v < 2:
            raise ConfigurationError("grid needs at least two points per axis")
        if not self.rho_min > 0:
            raise ConfigurationError(f"grid rho_min must be positive, got {self.rho_min}")
        if not (self.rho_max > self.rho_min and self.v_max > self.v_min):
            raise ConfigurationError("grid bounds must be increasing")

    @classmethod
    def parse(cls, text: str) -> 'GridSpec':
        try:
            rho_part, v_part = text.split(',')
            r0, r1, nr = rho_part.split(':')
            v0, v1, nv = v_part.split(':')
            return cls(float(r0), float(r1), int(nr), float(v0), float(v1), int(nv))
        except ValueError:
            raise ConfigurationError(f"grid must look like 'rmin:rmax:n,vmin:vmax:n', got {text!r}")

    @classmethod
    def from_document(cls, document: Any) -> 'GridSpec':
        if isinstance(document, GridSpec):
            return document
        if isinstance(document, str):
            return cls.parse(document)
        try:
            return cls(float(document['rho_min']), float(document['rho_max']), int(document['n_rho']),
                       float(document['v_min']), float(document['v_max']), int(document['n_v']))
        except (KeyError, TypeError) as e:
            raise ConfigurationError(f"bad grid document: {e}")

    def to_document(self) -> Dict[str, Any]:
        return {'rho_min': self.rho_min, 'rho_max': self.rho_max, 'n_rho': self.n_rho,
                'v_min': self.v_min, 'v_max': self.v_max, 'n_v': self.n_v}

    def __str__(self) -> str:
        return f"{self.rho_min!r}:{self.rho_max!r}:{self.n_rho},{self.v_min!r}:{self.v_max!r}:{self.n_v}"

    @property
    def rho_values(self) -> np.ndarray:
        return np.linspace(self.rho_min, self.rho_max, self.n_rho)

    @property
    def v_values(self) -> np.ndarray:
        return np.linspace(self.v_min, self.v_max, self.n_v)

    @property
    def h_rho(self) -> float:
        return (self.rho_max - self.rho_min) / (self.n_rho - 1)

    @property
    def h_v(self) -> float:
        return (self.v_max - self.v_min) / (self.n_v - 1)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_rho, self.n_v

    def refined(self) -> 'GridSpec':
        """Same bounds, half the spacing"""
        return GridSpec(self.rho_min, self.rho_max, 2 * self.n_rho - 1, self.v_min, self.v_max, 2 * self.n_v - 1)

    def points(self) -> List[WeylPoint]:
        """Row-major list of Weyl points (rho index outer)"""
        return [WeylPoint(r, v) for r in self.rho_values for v in self.v_values]

    @property
    def center(self) -> WeylPoint:
        return WeylPoint(float(self.rho_values[self.n_rho // 2]), float(self.v_values[self.n_v // 2]))


class SolutionFamily(ABC):
    """Recipe producing a CanonicalSolution at every Weyl point"""

    contour: Contour

    @property
    def lam(self) -> Lambda:
        return self.contour.lam

    @property
    @abstractmethod
    def n_channels(self) -> int:
        pass

    @abstractmethod
    def solve(self, point: WeylPoint) -> CanonicalSolution:
        pass

    @abstractmethod
    def log_m_gradient(self, point: WeylPoint) -> np.ndarray:
        """(d_rho log M_j, d_v log M_j), shape (channels, 2)"""

    @abstractmethod
    def to_document(self) -> Dict[str, Any]:
        pass

    def sweep(self, function: Callable[[WeylPoint], R], grid: GridSpec) -> List[R]:
        """Apply function at every grid point in parallel, row-major order"""
        return parallel_map(function, grid.points())

    def m_grid(self, grid: GridSpec) -> np.ndarray:
        """M_j over the grid, shape (channels, n_rho, n_v)"""
        values = self.sweep(lambda p: self.solve(p).m_matrix, grid)
        return np.stack(values, axis=-1).reshape(self.n_channels, *grid.shape)

    def gradient_grid(self, grid: GridSpec) -> np.ndarray:
        """log M gradient over the grid, shape (2, channels, n_rho, n_v)"""
        values = self.sweep(self.log_m_gradient, grid)
        stacked = np.stack(values, axis=-1).reshape(self.n_channels, 2, *grid.shape)
        return np.moveaxis(stacked, 1, 0)

    def inverse(self) -> 'SolutionFamily':
        return InverseFamily(self)

    def __mul__(self, other: 'SolutionFamily') -> 'SolutionFamily':
        if not isinstance(other, SolutionFamily):
            return NotImplemented
        return ProductFamily(self, other)

    def deformed(self, spec: DeformationSpec) -> 'SolutionFamily':
        return DeformedFamily(self, spec)


class FactorizedFamily(SolutionFamily):
    """Canonical factorization of a fixed monodromy"""

    def __init__(self, monodromy: DiagonalMonodromy, contour: Contour,
                 backend: Optional[Union[Backend, str]] = None):
        if monodromy.lam != contour.lam:
            raise ConfigurationError("monodromy and contour use different lambda")
        self.monodromy = monodromy
        self.contour = contour
        self.backend = Backend.parse(backend)

    @property
    def n_channels(self) -> int:
        return self.monodromy.n_channels

    def solve(self, point: WeylPoint) -> CanonicalSolution:
        return canonical_solve(self.monodromy, point, self.contour, self.backend)

    def gradient_contour(self, point: WeylPoint) -> Contour:
        """Contour refined until the tau-images of every singularity sit well off it"""
        roots = []
        for _, singularity in self.monodromy.singularities():
            try:
                roots.extend(spectral_roots(singularity.omega, point, self.lam))
            except BranchPointError:
                continue
        return self.contour.resolved_for(roots)

    def log_m_gradient(self, point: WeylPoint) -> np.ndarray:
        # log M = P_plus L(0); differentiate L = log M(omega(tau)) under the integral
        contour = self.gradient_contour(point)
        nodes = contour.nodes
        kernel = contour.weights / nodes / _TWO_PI_I
        lam = int(self.lam)
        omega = spectral_map(nodes, point, self.lam)
        d_omega_d_rho = 0.5 * lam * (lam - nodes ** 2) / nodes
        gradient = np.empty((self.n_channels, 2), dtype=complex)
        for j, channel in enumerate(self.monodromy.channels):
            derivative = channel.log_derivative(omega)
            gradient[j, 0] = (derivative * d_omega_d_rho * kernel).sum()
            gradient[j, 1] = (derivative * kernel).sum()
        return gradient

    def to_document(self) -> Dict[str, Any]:
        return {
            'kind': 'factorized',
            'monodromy': self.monodromy.to_document(),
            'contour': self.contour.to_document(),
            'backend': self.backend.value if self.backend else None,
        }


class InverseFamily(SolutionFamily):
    def __init__(self, base: SolutionFamily):
        self.base = base
        self.contour = base.contour

    @property
    def n_channels(self) -> int:
        return self.base.n_channels

    def solve(self, point):
        return invert_solution(self.base.solve(point))

    def log_m_gradient(self, point):
        return -self.base.log_m_gradient(point)

    def inverse(self):
        return self.base

    def to_document(self):
        return {'kind': 'inverse', 'base': self.base.to_document()}


class ProductFamily(SolutionFamily):
    def __init__(self, first: SolutionFamily, second: SolutionFamily):
        if first.contour is not second.contour:
            raise ContourMismatchError("families live on different contours",
                                       {'first': first.contour.to_document(),
                                        'second': second.contour.to_document()})
        if first.n_channels != second.n_channels:
            raise ConfigurationError("families have different channel counts")
        self.first = first
        self.second = second
        self.contour = first.contour

    @property
    def n_channels(self) -> int:
        return self.first.n_channels

    def solve(self, point):
        return multiply_solutions(self.first.solve(point), self.second.solve(point))

    def log_m_gradient(self, point):
        return self.first.log_m_gradient(point) + self.second.log_m_gradient(point)

    def to_document(self):
        return {'kind': 'product', 'factors': [self.first.to_document(), self.second.to_document()]}


class DeformedFamily(SolutionFamily):
    def __init__(self, base: SolutionFamily, spec: DeformationSpec):
        if len(spec.channels) != base.n_channels:
            raise ConfigurationError("deformation channel count does not match the family")
        self.base = base
        self.spec = spec
        self.contour = base.contour

    @property
    def n_channels(self) -> int:
        return self.base.n_channels

    def solve(self, point):
        return deform(self.base.solve(point), self.spec)

    def log_m_gradient(self, point):
        # log(tau_in/tau_out) = log(-lambda) - 2 log(tau_out)
        gradient = np.array(self.base.log_m_gradient(point), dtype=complex)
        for j, terms in enumerate(self.spec.channels):
            for term in terms:
                if term.multiplicity == 0:
                    continue
                dressing = deformation_factor(term.omega, term.multiplicity, point, self.contour)
                derivatives = root_derivatives(dressing.tau_out, point.rho, self.lam)
                gradient[j, 0] += -2.0 * term.multiplicity * complex(derivatives.d_rho) / dressing.tau_out
                gradient[j, 1] += -2.0 * term.multiplicity * complex(derivatives.d_v) / dressing.tau_out
        return gradient

    def to_document(self):
        return {'kind': 'deformed', 'base': self.base.to_document(), 'deformation': self.spec.to_document()}


def family_from_document(document: Dict[str, Any], node_count: Optional[int] = None) -> SolutionFamily:
    """Rebuild a family from its provenance document"""
    from riemann_hilbert.contour import contour_from_document
    from solutions.monodromy import parse_monodromy

    kind = document.get('kind')
    if kind == 'factorized':
        monodromy = parse_monodromy(document['monodromy'])
        contour = contour_from_document(document['contour'], monodromy.lam, node_count)
        return FactorizedFamily(monodromy, contour, document.get('backend'))
    if kind == 'inverse':
        return InverseFamily(family_from_document(document['base'], node_count))
    if kind == 'product':
        first, second = (family_from_document(d, node_count) for d in document['factors'])
        return ProductFamily(first, second)
    if kind == 'deformed':
        return DeformedFamily(family_from_document(document['base'], node_count),
                              DeformationSpec.from_document(document['deformation']))
    raise ConfigurationError(f"unknown family kind {kind!r}")
