"""
Canonical Wiener-Hopf factorization of diagonal monodromy

On the contour, M(omega(tau)) = X(i_lambda tau) M X(tau) with X holomorphic
inside, X(0) = I and M constant. Three backends produce the split:

    QuadratureCauchy   Cauchy projection of a continuous log (any channel)
    PartialFraction    exact projection of rational exponents
    RationalZeroPole   exact split of monomials (omega - a)**N
"""
import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from config import Config
from riemann_hilbert.cauchy import (
    BoundarySamples,
    ScalarFactorization,
    scalar_canonical_factorization,
)
from riemann_hilbert.contour import Contour, Lambda, PointLocation
from riemann_hilbert.spectral import WeylPoint, spectral_map, spectral_roots
from solutions.monodromy import (
    ChannelExpr,
    DiagonalMonodromy,
    ExpSum,
    InvQuadTerm,
    MonomialPower,
    PoleTerm,
    PowerTerm,
    Product,
    compose_on_contour,
)
from utils.errors import (
    BranchPointError,
    ConfigurationError,
    ContourMismatchError,
    DomainError,
    InadmissibleContourError,
    NoCanonicalFactorizationError,
    TaylorConditioningError,
)
from utils.logger import setup_logger

logger = setup_logger(__name__)


class Backend(str, Enum):
    QUADRATURE = 'QuadratureCauchy'
    PARTIAL_FRACTION = 'PartialFraction'
    RATIONAL_ZERO_POLE = 'RationalZeroPole'

    @classmethod
    def parse(cls, value: Any) -> Optional['Backend']:
        if value is None or isinstance(value, Backend):
            return value
        aliases = {
            'quadrature': cls.QUADRATURE,
            'partial_fraction': cls.PARTIAL_FRACTION,
            'partial-fraction': cls.PARTIAL_FRACTION,
            'rational': cls.RATIONAL_ZERO_POLE,
            'rational_zero_pole': cls.RATIONAL_ZERO_POLE,
        }
        for backend in cls:
            aliases[backend.value.lower()] = backend
        key = str(value).lower()
        if key not in aliases:
            raise ConfigurationError(f"unknown backend {value!r}", {'known': [b.value for b in cls]})
        return aliases[key]


# ----------------------------------------------------------------------
# plus factors
# ----------------------------------------------------------------------
class PlusFactor(ABC):
    """Scalar function holomorphic inside the contour"""

    @abstractmethod
    def __call__(self, tau):
        pass

    @abstractmethod
    def log_derivative(self, tau):
        pass

    def log_taylor(self, order: int, radius: Optional[float] = None) -> np.ndarray:
        """
        Taylor coefficients of log X at 0 by Cauchy differentiation on a small circle
        """
        radius = radius or 0.25
        count = Config.TAYLOR_POINTS
        samples = radius * np.exp(2j * math.pi * np.arange(count) / count)
        values = np.asarray(self(samples), dtype=complex)
        magnitude = np.abs(values)
        if magnitude.min() <= 1e-8 * magnitude.max():
            raise TaylorConditioningError("plus factor nearly vanishes near the origin", {'radius': radius})
        log = np.log(magnitude) + 1j * np.unwrap(np.angle(values))
        coefficients = np.fft.fft(log) / count
        return coefficients[:order + 1] / radius ** np.arange(order + 1)

    def inverse(self) -> 'PlusFactor':
        return ProductFactor((self,), (-1,))

    def describe(self) -> Dict[str, Any]:
        return {'type': type(self).__name__}


class ConstantFactor(PlusFactor):
    """X = c everywhere; c = 1 is the identity"""

    def __init__(self, value: complex = 1.0):
        self.value = complex(value)

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=complex)
        out = np.full(tau.shape, self.value, dtype=complex)
        return out if out.ndim else complex(out)

    def log_derivative(self, tau):
        tau = np.asarray(tau, dtype=complex)
        out = np.zeros(tau.shape, dtype=complex)
        return out if out.ndim else complex(out)

    def log_taylor(self, order, radius=None):
        coefficients = np.zeros(order + 1, dtype=complex)
        coefficients[0] = np.log(self.value)
        return coefficients

    def describe(self):
        return {'type': 'ConstantFactor', 'value': [self.value.real, self.value.imag]}


class QuadratureFactor(PlusFactor):
    """f_plus from a scalar quadrature factorization"""

    def __init__(self, factorization: ScalarFactorization):
        self.factorization = factorization

    def __call__(self, tau):
        return self.factorization.plus(tau)

    def log_derivative(self, tau):
        return self.factorization.log_derivative(tau)

    def log_taylor(self, order, radius=None):
        return self.factorization.log_taylor(order)

    def describe(self):
        return {'type': 'QuadratureFactor', 'nodes': self.factorization.contour.node_count}


class RationalFactor(PlusFactor):
    """X = prod (1 - tau / r)**m over roots r outside the contour"""

    def __init__(self, roots: Sequence[Tuple[complex, int]]):
        self.roots = tuple((complex(r), int(m)) for r, m in roots if m != 0)

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=complex)
        out = np.ones(tau.shape, dtype=complex)
        for root, multiplicity in self.roots:
            out = out * (1.0 - tau / root) ** multiplicity
        return out if out.ndim else complex(out)

    def log_derivative(self, tau):
        tau = np.asarray(tau, dtype=complex)
        out = np.zeros(tau.shape, dtype=complex)
        for root, multiplicity in self.roots:
            out = out + multiplicity / (tau - root)
        return out if out.ndim else complex(out)

    def log_taylor(self, order, radius=None):
        coefficients = np.zeros(order + 1, dtype=complex)
        for n in range(1, order + 1):
            coefficients[n] = -sum(m / (n * r ** n) for r, m in self.roots)
        return coefficients

    def describe(self):
        return {'type': 'RationalFactor',
                'roots': [{'root': [r.real, r.imag], 'multiplicity': m} for r, m in self.roots]}


class PartialFractionFactor(PlusFactor):
    """X = exp(sum A/(tau - p) + sum A/p) over exterior poles p"""

    def __init__(self, poles: Sequence[complex], residues: Sequence[complex]):
        self.poles = np.asarray(poles, dtype=complex)
        self.residues = np.asarray(residues, dtype=complex)
        self.offset = complex((self.residues / self.poles).sum()) if self.poles.size else 0j

    def exponent(self, tau):
        tau = np.asarray(tau, dtype=complex)
        out = np.full(tau.shape, self.offset, dtype=complex)
        for pole, residue in zip(self.poles, self.residues):
            out = out + residue / (tau - pole)
        return out

    def __call__(self, tau):
        out = np.exp(self.exponent(tau))
        return out if out.ndim else complex(out)

    def log_derivative(self, tau):
        tau = np.asarray(tau, dtype=complex)
        out = np.zeros(tau.shape, dtype=complex)
        for pole, residue in zip(self.poles, self.residues):
            out = out - residue / (tau - pole) ** 2
        return out if out.ndim else complex(out)

    def log_taylor(self, order, radius=None):
        coefficients = np.zeros(order + 1, dtype=complex)
        for n in range(1, order + 1):
            coefficients[n] = -(self.residues / self.poles ** (n + 1)).sum()
        return coefficients

    def describe(self):
        return {'type': 'PartialFractionFactor',
                'poles': [[p.real, p.imag] for p in self.poles],
                'residues': [[r.real, r.imag] for r in self.residues]}


class DeformationFactor(PlusFactor):
    """
    R(tau)**m with R = (1 - tau/tau_in) / (1 - tau/tau_out)

    tau_out is the root of omega(tau) = omega_i outside the contour and
    tau_in = i_lambda(tau_out) the one inside. R(0) = 1 exactly.
    """

    def __init__(self, omega: complex, tau_out: complex, tau_in: complex, multiplicity: int, lam: Lambda):
        self.omega = complex(omega)
        self.tau_out = complex(tau_out)
        self.tau_in = complex(tau_in)
        self.multiplicity = int(multiplicity)
        self.lam = lam

    @property
    def normalization(self) -> complex:
        """Factor (tau_in / tau_out)**m multiplying M"""
        return (self.tau_in / self.tau_out) ** self.multiplicity

    def ratio(self, tau):
        tau = np.asarray(tau, dtype=complex)
        return (1.0 - tau / self.tau_in) / (1.0 - tau / self.tau_out)

    def __call__(self, tau):
        out = self.ratio(tau) ** self.multiplicity
        return out if np.ndim(out) else complex(out)

    def log_derivative(self, tau):
        tau = np.asarray(tau, dtype=complex)
        out = self.multiplicity * (1.0 / (tau - self.tau_in) - 1.0 / (tau - self.tau_out))
        return out if out.ndim else complex(out)

    def log_taylor(self, order, radius=None):
        coefficients = np.zeros(order + 1, dtype=complex)
        for n in range(1, order + 1):
            coefficients[n] = -self.multiplicity * (self.tau_in ** -n - self.tau_out ** -n) / n
        return coefficients

    def describe(self):
        return {'type': 'DeformationFactor', 'omega': [self.omega.real, self.omega.imag],
                'tau_out': [self.tau_out.real, self.tau_out.imag],
                'tau_in': [self.tau_in.real, self.tau_in.imag], 'multiplicity': self.multiplicity}


class ProductFactor(PlusFactor):
    """prod f_i**e_i with integer exponents"""

    def __init__(self, factors: Sequence[PlusFactor], exponents: Sequence[int]):
        flat_factors: List[PlusFactor] = []
        flat_exponents: List[int] = []
        for factor, exponent in zip(factors, exponents):
            if isinstance(factor, ProductFactor):
                flat_factors.extend(factor.factors)
                flat_exponents.extend(exponent * e for e in factor.exponents)
            else:
                flat_factors.append(factor)
                flat_exponents.append(int(exponent))
        self.factors = tuple(flat_factors)
        self.exponents = tuple(flat_exponents)

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=complex)
        out = np.ones(tau.shape, dtype=complex)
        for factor, exponent in zip(self.factors, self.exponents):
            value = np.asarray(factor(tau), dtype=complex)
            if exponent == 1:
                out = out * value
            elif exponent == -1:
                out = out / value
            else:
                out = out * value ** exponent
        return out if out.ndim else complex(out)

    def log_derivative(self, tau):
        tau = np.asarray(tau, dtype=complex)
        out = np.zeros(tau.shape, dtype=complex)
        for factor, exponent in zip(self.factors, self.exponents):
            out = out + exponent * np.asarray(factor.log_derivative(tau), dtype=complex)
        return out if out.ndim else complex(out)

    def log_taylor(self, order, radius=None):
        return sum((e * f.log_taylor(order, radius) for f, e in zip(self.factors, self.exponents)),
                   np.zeros(order + 1, dtype=complex))

    def inverse(self):
        return ProductFactor(self.factors, tuple(-e for e in self.exponents))

    def describe(self):
        return {'type': 'ProductFactor',
                'factors': [{'factor': f.describe(), 'exponent': e}
                            for f, e in zip(self.factors, self.exponents)]}


# ----------------------------------------------------------------------
# channel splits
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class ChannelSplit:
    """Canonical split f = f_minus * f_plus of one channel, f_plus(0) = 1"""
    normalization: complex
    plus: PlusFactor
    backend: Backend
    minus: Callable[[Any], Any]


def quadrature_factorize(channel: ChannelExpr, samples: BoundarySamples,
                         point: WeylPoint) -> ChannelSplit:
    """
    Split one channel by Cauchy quadrature of its log

    The exact exponent of exponential channels replaces phase unwrapping.
    """
    contour = samples.contour
    exact = channel.log_values(spectral_map(contour.nodes, point, contour.lam))
    log_samples = BoundarySamples(contour, exact) if exact is not None else None
    factorization = scalar_canonical_factorization(samples, log_samples)
    return ChannelSplit(factorization.normalization, QuadratureFactor(factorization),
                        Backend.QUADRATURE, factorization.minus)


def _monomials(channel: ChannelExpr) -> List[MonomialPower]:
    if isinstance(channel, MonomialPower):
        return [channel]
    if isinstance(channel, Product) and channel.is_monomial:
        return list(channel.factors)
    raise ConfigurationError("RationalZeroPole backend needs monomial channels")


def _split_pair(pair, contour: Contour, details: Dict[str, Any]) -> Tuple[complex, complex]:
    """(outside root, inside root) of a spectral root pair"""
    locations = [contour.locate(root) for root in pair]
    if PointLocation.ON_CONTOUR in locations:
        raise InadmissibleContourError("spectral root lies on the contour", details)
    if locations[0] == locations[1]:
        raise InadmissibleContourError("both spectral roots lie on the same side of the contour", details)
    if locations[0] is PointLocation.OUTSIDE:
        return pair[0], pair[1]
    return pair[1], pair[0]


def rational_zero_pole_factorize(channel: ChannelExpr, point: WeylPoint,
                                 contour: Contour) -> ChannelSplit:
    """
    Exact split of prod (omega - a)**N

    (omega - a) = [(tau - r_in)/tau] * (lambda rho r_out / 2) * (1 - tau/r_out)
    """
    lam = int(contour.lam)
    normalization = 1.0 + 0j
    roots: List[Tuple[complex, int]] = []
    inner: List[Tuple[complex, int]] = []
    for monomial in _monomials(channel):
        if monomial.n == 0:
            continue
        try:
            pair = spectral_roots(monomial.a, point, contour.lam)
        except BranchPointError:
            raise InadmissibleContourError(
                "monomial root sits at a fixed point of the contour", {'a': str(monomial.a), **point.to_dict()})
        r_out, r_in = _split_pair(pair, contour, {'a': str(monomial.a), **point.to_dict()})
        normalization *= (0.5 * lam * point.rho * r_out) ** monomial.n
        roots.append((r_out, monomial.n))
        inner.append((r_in, monomial.n))

    def minus(tau):
        tau = np.asarray(tau, dtype=complex)
        out = np.full(tau.shape, normalization, dtype=complex)
        finite = np.isfinite(tau)
        for root, n in inner:
            out[finite] = out[finite] * ((tau[finite] - root) / tau[finite]) ** n
        return out if out.ndim else complex(out)

    return ChannelSplit(complex(normalization), RationalFactor(roots), Backend.RATIONAL_ZERO_POLE, minus)


class PolePair(NamedTuple):
    """tau-images of one omega-pole with their partial-fraction residues"""
    omega: complex
    roots: Tuple[complex, complex]
    residues: Tuple[complex, complex]


def _pole_pairs(channel: ChannelExpr, point: WeylPoint, lam: Lambda) -> Tuple[List[PolePair], complex]:
    if not (isinstance(channel, ExpSum) and channel.is_rational):
        raise ConfigurationError("PartialFraction backend needs a rational exponent")
    constant = 0j
    omega_poles: List[Tuple[complex, complex]] = []
    for term in channel.terms:
        if isinstance(term, PowerTerm):
            constant += complex(term.c)
        elif isinstance(term, PoleTerm):
            omega_poles.append((complex(term.a), complex(term.c)))
        elif isinstance(term, InvQuadTerm):
            # c/(w^2 + a^2) = (c / 2ia) [1/(w - ia) - 1/(w + ia)]
            weight = complex(term.c) / (2j * term.a)
            omega_poles.append((1j * term.a, weight))
            omega_poles.append((-1j * term.a, -weight))

    pairs = []
    lam_value = int(lam)
    for alpha, gamma in omega_poles:
        try:
            r1, r2 = spectral_roots(alpha, point, lam)
        except BranchPointError:
            raise InadmissibleContourError(
                "exponent pole sits at a fixed point of the contour", {'omega': [alpha.real, alpha.imag]})
        a1 = -2.0 * lam_value * gamma * r1 / (point.rho * (r1 - r2))
        a2 = -2.0 * lam_value * gamma * r2 / (point.rho * (r2 - r1))
        pairs.append(PolePair(alpha, (r1, r2), (a1, a2)))
    return pairs, constant


@dataclass(frozen=True, eq=False)
class PartialFractionSplit:
    """Exact plus/minus projection of a rational exponent"""
    poles: np.ndarray
    residues: np.ndarray
    outside: np.ndarray
    constant: complex

    def plus_exponent(self, tau):
        tau = np.asarray(tau, dtype=complex)
        out = np.full(tau.shape, self.constant, dtype=complex)
        for p, a in zip(self.poles[self.outside], self.residues[self.outside]):
            out = out + a / (tau - p)
        return out

    def minus_exponent(self, tau):
        tau = np.asarray(tau, dtype=complex)
        out = np.zeros(tau.shape, dtype=complex)
        for p, a in zip(self.poles[~self.outside], self.residues[~self.outside]):
            out = out + a / (tau - p)
        return out

    @property
    def plus_at_zero(self) -> complex:
        return complex(self.constant - (self.residues[self.outside] / self.poles[self.outside]).sum())

    @property
    def normalization(self) -> complex:
        return complex(np.exp(self.plus_at_zero))

    def factor(self) -> PartialFractionFactor:
        return PartialFractionFactor(self.poles[self.outside], self.residues[self.outside])


def partial_fraction_projection(channel: ChannelExpr, point: WeylPoint, contour: Optional[Contour] = None,
                                outside: Optional[Sequence[bool]] = None,
                                lam: Optional[Union[Lambda, int]] = None) -> PartialFractionSplit:
    """
    Exact projection of a rational exponent

    Args:
        channel: ExpSum with pole, inv_quad and constant terms
        point: Weyl point
        contour: Classifies the tau-poles; may be omitted when outside is given
        outside: Per tau-pole flag (two per omega-pole, principal root first)
            overriding the contour classification

    Returns:
        PartialFractionSplit
    """
    if contour is None and outside is None:
        raise ConfigurationError("partial_fraction_projection needs a contour or an explicit classification")
    if contour is not None:
        lam = contour.lam
    lam = Lambda.parse(lam if lam is not None else Lambda.MINUS)
    pairs, constant = _pole_pairs(channel, point, lam)
    poles = np.array([r for pair in pairs for r in pair.roots], dtype=complex)
    residues = np.array([a for pair in pairs for a in pair.residues], dtype=complex)

    if outside is not None:
        mask = np.asarray(outside, dtype=bool)
        if mask.shape != poles.shape:
            raise ConfigurationError(f"expected {poles.size} classification flags, got {mask.size}")
    else:
        mask = np.zeros(poles.shape, dtype=bool)
        for index, pole in enumerate(poles):
            location = contour.locate(pole)
            if location is PointLocation.ON_CONTOUR:
                raise InadmissibleContourError(
                    "exponent pole lies on the contour", {'tau': [pole.real, pole.imag], **point.to_dict()})
            mask[index] = location is PointLocation.OUTSIDE

    # merge coincident poles
    merged_poles: List[complex] = []
    merged_residues: List[complex] = []
    merged_outside: List[bool] = []
    for pole, residue, flag in zip(poles, residues, mask):
        for k, existing in enumerate(merged_poles):
            if abs(existing - pole) <= 1e-12 * max(1.0, abs(pole)) and merged_outside[k] == flag:
                merged_residues[k] += residue
                break
        else:
            merged_poles.append(pole)
            merged_residues.append(residue)
            merged_outside.append(bool(flag))
    return PartialFractionSplit(np.array(merged_poles, dtype=complex), np.array(merged_residues, dtype=complex),
                                np.array(merged_outside, dtype=bool), constant)


class ContourClass(NamedTuple):
    """Choice of exterior root per omega-pole and the resulting log M"""
    outside_roots: Tuple[complex, ...]
    log_m: complex


def contour_class_projections(channel: ChannelExpr, point: WeylPoint,
                              lam: Union[Lambda, int] = Lambda.MINUS) -> List[ContourClass]:
    """
    log M for every homotopy class of contour separating the tau-poles

    Each omega-pole contributes one root pair of which exactly one root
    lies outside; 2**pairs classes in total.
    """
    lam = Lambda.parse(lam)
    pairs, _ = _pole_pairs(channel, point, lam)
    classes = []
    for choice in itertools.product((0, 1), repeat=len(pairs)):
        flags = []
        for pick in choice:
            flags.extend([pick == 0, pick == 1])
        split = partial_fraction_projection(channel, point, outside=flags, lam=lam) if pairs else None
        roots = tuple(pair.roots[pick] for pair, pick in zip(pairs, choice))
        log_m = split.plus_at_zero if split is not None else 0j
        classes.append(ContourClass(roots, log_m))
    return classes


def _partial_fraction_split(channel: ChannelExpr, point: WeylPoint, contour: Contour) -> ChannelSplit:
    projection = partial_fraction_projection(channel, point, contour)
    normalization = projection.normalization

    def minus(tau):
        tau = np.asarray(tau, dtype=complex)
        out = np.full(tau.shape, normalization, dtype=complex)
        finite = np.isfinite(tau)
        out[finite] = np.exp(projection.minus_exponent(tau[finite]) + projection.plus_at_zero)
        return out if out.ndim else complex(out)

    return ChannelSplit(normalization, projection.factor(), Backend.PARTIAL_FRACTION, minus)


def select_backend(channel: ChannelExpr) -> Backend:
    """Cheapest exact backend for a channel, quadrature otherwise"""
    if isinstance(channel, MonomialPower) or (isinstance(channel, Product) and channel.is_monomial):
        return Backend.RATIONAL_ZERO_POLE
    if isinstance(channel, ExpSum) and channel.is_rational:
        return Backend.PARTIAL_FRACTION
    return Backend.QUADRATURE


# ----------------------------------------------------------------------
# solutions
# ----------------------------------------------------------------------
class DeformationTerm(NamedTuple):
    omega: complex
    multiplicity: int


@dataclass(frozen=True)
class DeformationSpec:
    """Per-channel list of (omega_i, m_i) for the meromorphic dressing"""
    channels: Tuple[Tuple[DeformationTerm, ...], ...]

    @classmethod
    def single(cls, channel_count: int, channel: int, omega: complex, multiplicity: int,
               mirror: bool = True) -> 'DeformationSpec':
        """Deform one channel; with mirror the next channel gets -m (unimodular pairs)"""
        channels: List[Tuple[DeformationTerm, ...]] = [() for _ in range(channel_count)]
        channels[channel] = (DeformationTerm(complex(omega), int(multiplicity)),)
        if mirror and channel_count == 2:
            channels[1 - channel] = (DeformationTerm(complex(omega), -int(multiplicity)),)
        return cls(tuple(channels))

    @classmethod
    def from_document(cls, document: Any) -> 'DeformationSpec':
        channels = []
        for entry in document:
            channels.append(tuple(
                DeformationTerm(complex(t['omega'][0], t['omega'][1]) if isinstance(t['omega'], list)
                                else complex(t['omega']), int(t['m'])) for t in entry))
        return cls(tuple(channels))

    @property
    def is_empty(self) -> bool:
        return all(not terms for terms in self.channels)

    def negated(self) -> 'DeformationSpec':
        return DeformationSpec(tuple(tuple(DeformationTerm(t.omega, -t.multiplicity) for t in terms)
                                     for terms in self.channels))

    def combined(self, other: Optional['DeformationSpec']) -> 'DeformationSpec':
        if other is None:
            return self
        return DeformationSpec(tuple(a + b for a, b in zip(self.channels, other.channels)))

    def to_document(self) -> List[List[Dict[str, Any]]]:
        return [[{'omega': [t.omega.real, t.omega.imag], 'm': t.multiplicity} for t in terms]
                for terms in self.channels]


@dataclass(frozen=True, eq=False)
class CanonicalSolution:
    """
    Canonical (or meromorphically dressed) factorization at one Weyl point

    M holds the diagonal of the constant matrix; factors[j] is X_j.
    """
    point: WeylPoint
    contour: Contour
    monodromy: DiagonalMonodromy
    m_matrix: np.ndarray
    factors: Tuple[PlusFactor, ...]
    backends: Tuple[Backend, ...]
    deformation: Optional[DeformationSpec] = None
    provenance: Tuple[str, ...] = ()

    @property
    def n_channels(self) -> int:
        return len(self.factors)

    @property
    def is_meromorphic(self) -> bool:
        return self.deformation is not None and not self.deformation.is_empty

    def m_diag(self) -> np.ndarray:
        return np.diag(self.m_matrix)

    def x_values(self, tau) -> np.ndarray:
        """X_j(tau) stacked on a leading channel axis"""
        return np.stack([np.asarray(f(tau), dtype=complex) for f in self.factors])

    def x_log_derivative(self, tau) -> np.ndarray:
        return np.stack([np.asarray(f.log_derivative(tau), dtype=complex) for f in self.factors])

    def log_x_taylor(self, order: int) -> np.ndarray:
        """Taylor coefficients of log X_j at 0, shape (channels, order + 1)"""
        return np.stack([f.log_taylor(order) for f in self.factors])

    def monodromy_values(self, tau) -> np.ndarray:
        return self.monodromy.evaluate(spectral_map(tau, self.point, self.contour.lam))


def canonical_solve(monodromy: DiagonalMonodromy, point: WeylPoint, contour: Contour,
                    backend: Optional[Union[Backend, str]] = None) -> CanonicalSolution:
    """
    Canonical factorization of M(omega(tau)) at a Weyl point

    Args:
        monodromy: Diagonal monodromy
        point: Weyl point
        contour: Admissible contour
        backend: Force one backend for every channel

    Returns:
        CanonicalSolution

    Raises:
        NoCanonicalFactorizationError: a channel has nonzero winding index
        InadmissibleContourError: a singularity lies on the contour
    """
    forced = Backend.parse(backend)
    samples = compose_on_contour(monodromy, point, contour)
    splits: List[ChannelSplit] = []
    for j, (channel, channel_samples) in enumerate(zip(monodromy.channels, samples)):
        chosen = forced or select_backend(channel)
        try:
            if chosen is Backend.RATIONAL_ZERO_POLE:
                split = rational_zero_pole_factorize(channel, point, contour)
            elif chosen is Backend.PARTIAL_FRACTION:
                split = _partial_fraction_split(channel, point, contour)
            else:
                split = quadrature_factorize(channel, channel_samples, point)
        except NoCanonicalFactorizationError as e:
            raise NoCanonicalFactorizationError(e.index, channel=j)
        splits.append(split)

    return CanonicalSolution(
        point=point,
        contour=contour,
        monodromy=monodromy,
        m_matrix=np.array([s.normalization for s in splits], dtype=complex),
        factors=tuple(s.plus for s in splits),
        backends=tuple(s.backend for s in splits),
        provenance=('canonical_solve',),
    )


def channel_split(solution: CanonicalSolution, channel: int) -> ChannelSplit:
    """Recompute the split of one channel (exposes f_minus for checks)"""
    samples = compose_on_contour(solution.monodromy, solution.point, solution.contour)[channel]
    expr = solution.monodromy.channels[channel]
    backend = solution.backends[channel]
    if backend is Backend.RATIONAL_ZERO_POLE:
        return rational_zero_pole_factorize(expr, solution.point, solution.contour)
    if backend is Backend.PARTIAL_FRACTION:
        return _partial_fraction_split(expr, solution.point, solution.contour)
    return quadrature_factorize(expr, samples, solution.point)


# ----------------------------------------------------------------------
# group structure and deformation
# ----------------------------------------------------------------------
def invert_solution(solution: CanonicalSolution) -> CanonicalSolution:
    """Solution for the inverse monodromy: M -> M^-1, X -> X^-1"""
    return CanonicalSolution(
        point=solution.point,
        contour=solution.contour,
        monodromy=solution.monodromy.inverse(),
        m_matrix=1.0 / solution.m_matrix,
        factors=tuple(f.inverse() for f in solution.factors),
        backends=solution.backends,
        deformation=solution.deformation.negated() if solution.deformation is not None else None,
        provenance=solution.provenance + ('invert',),
    )


def multiply_solutions(first: CanonicalSolution, second: CanonicalSolution) -> CanonicalSolution:
    """
    Channelwise product of two solutions on the same contour and point

    Raises:
        ContourMismatchError: different contour objects
    """
    if first.contour is not second.contour:
        raise ContourMismatchError("solutions live on different contours",
                                   {'first': first.contour.to_document(), 'second': second.contour.to_document()})
    if first.point != second.point:
        raise DomainError("solutions belong to different Weyl points",
                          {'first': first.point.to_dict(), 'second': second.point.to_dict()})
    if first.n_channels != second.n_channels:
        raise ConfigurationError("solutions have different channel counts")

    deformation = None
    if first.deformation is not None or second.deformation is not None:
        empty = DeformationSpec(tuple(() for _ in range(first.n_channels)))
        deformation = (first.deformation or empty).combined(second.deformation or empty)

    return CanonicalSolution(
        point=first.point,
        contour=first.contour,
        monodromy=first.monodromy * second.monodromy,
        m_matrix=first.m_matrix * second.m_matrix,
        factors=tuple(ProductFactor((a, b), (1, 1)) for a, b in zip(first.factors, second.factors)),
        backends=tuple(a if a == b else Backend.QUADRATURE for a, b in zip(first.backends, second.backends)),
        deformation=deformation,
        provenance=first.provenance + ('multiply',),
    )


def deformation_factor(omega: complex, multiplicity: int, point: WeylPoint, contour: Contour) -> DeformationFactor:
    """
    Dressing factor R**m for the spectral root pair of omega

    Raises:
        InadmissibleContourError: a root of the pair lies on the contour
    """
    details = {'omega': [complex(omega).real, complex(omega).imag], **point.to_dict()}
    try:
        pair = spectral_roots(omega, point, contour.lam)
    except BranchPointError:
        raise InadmissibleContourError("deformation parameter maps onto a fixed point", details)
    tau_out, tau_in = _split_pair(pair, contour, details)
    return DeformationFactor(omega, tau_out, tau_in, multiplicity, contour.lam)


def deform(solution: CanonicalSolution, spec: DeformationSpec) -> CanonicalSolution:
    """
    Meromorphic dressing: X_j -> X_j R_j, M_j -> M_j prod (tau_in/tau_out)**m

    Returns:
        The input unchanged for an empty spec
    """
    if len(spec.channels) != solution.n_channels:
        raise ConfigurationError(
            f"deformation lists {len(spec.channels)} channels, solution has {solution.n_channels}")
    if spec.is_empty:
        return solution

    m_values = solution.m_matrix.copy()
    factors = list(solution.factors)
    for j, terms in enumerate(spec.channels):
        for term in terms:
            if term.multiplicity == 0:
                continue
            dressing = deformation_factor(term.omega, term.multiplicity, solution.point, solution.contour)
            m_values[j] *= dressing.normalization
            factors[j] = ProductFactor((factors[j], dressing), (1, 1))

    return replace(
        solution,
        m_matrix=m_values,
        factors=tuple(factors),
        deformation=spec.combined(solution.deformation) if solution.deformation is not None else spec,
        provenance=solution.provenance + ('deform',),
    )
