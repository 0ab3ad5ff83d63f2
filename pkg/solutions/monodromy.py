"""
Diagonal monodromy data and its composition with the spectral map

Channel grammar:
    exp_sum   exp(sum of terms) with terms
                cos       c * exp(-damping_a * k) * cos(k omega)
                sin       c * exp(-damping_a * k) * sin(k omega)
                pole      c / (omega - a)
                inv_quad  c / (omega**2 + a**2)
                power     c * omega**p
    monomial  (omega - a)**N
    product   product of channels
"""
import json
import math
import os
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import yaml

from config import Config
from riemann_hilbert.cauchy import BoundarySamples
from riemann_hilbert.contour import Contour, Lambda, PointLocation, involution
from riemann_hilbert.spectral import WeylPoint, spectral_map, spectral_roots
from utils.errors import (
    BranchPointError,
    ConfigurationError,
    EvaluationError,
    InadmissibleContourError,
    MonodromyParseError,
)

MAX_POWER = 8


class Singularity(NamedTuple):
    omega: complex
    kind: str
    order: int = 1


def _complex_document(value: complex):
    value = complex(value)
    return value.real if value.imag == 0 else [value.real, value.imag]


def _parse_complex(value: Any, path: str) -> complex:
    try:
        if isinstance(value, bool):
            raise TypeError
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, dict):
            return complex(float(value.get('re', 0.0)), float(value.get('im', 0.0)))
        if isinstance(value, str):
            return complex(value.replace(' ', '').replace('i', 'j'))
        return complex(value)
    except (TypeError, ValueError):
        raise MonodromyParseError(f"expected a complex number, got {value!r}", path)


def _parse_real(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MonodromyParseError(f"expected a real number, got {value!r}", path)
    if not math.isfinite(value):
        raise MonodromyParseError("expected a finite number", path)
    return float(value)


def _parse_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise MonodromyParseError(f"expected an integer, got {value!r}", path)
    return int(value)


def _require(document: Dict[str, Any], key: str, path: str) -> Any:
    if key not in document:
        raise MonodromyParseError(f"missing field '{key}'", path)
    return document[key]


def _check_poles(omega: np.ndarray, poles: Sequence[complex]) -> None:
    for pole in poles:
        if np.any(np.abs(omega - pole) <= 1e-14 * max(1.0, abs(pole))):
            raise EvaluationError(f"channel evaluated at its pole {pole}", complex(pole))


# ----------------------------------------------------------------------
# exponent terms
# ----------------------------------------------------------------------
class Term(ABC):
    """Additive term of an exponent"""

    type_name: str = ''

    @abstractmethod
    def value(self, omega: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def derivative(self, omega: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def negated(self) -> 'Term':
        pass

    @abstractmethod
    def to_document(self) -> Dict[str, Any]:
        pass

    @property
    def poles(self) -> Tuple[complex, ...]:
        return ()

    @property
    def is_rational(self) -> bool:
        return False


@dataclass(frozen=True)
class CosTerm(Term):
    c: complex
    k: float
    damping_a: float = 0.0
    type_name = 'cos'

    @property
    def weight(self) -> complex:
        return self.c * math.exp(-self.damping_a * self.k)

    def value(self, omega):
        return self.weight * np.cos(self.k * omega)

    def derivative(self, omega):
        return -self.weight * self.k * np.sin(self.k * omega)

    def negated(self):
        return CosTerm(-self.c, self.k, self.damping_a)

    def to_document(self):
        return {'type': 'cos', 'c': _complex_document(self.c), 'k': self.k, 'damping_a': self.damping_a}


@dataclass(frozen=True)
class SinTerm(Term):
    c: complex
    k: float
    damping_a: float = 0.0
    type_name = 'sin'

    @property
    def weight(self) -> complex:
        return self.c * math.exp(-self.damping_a * self.k)

    def value(self, omega):
        return self.weight * np.sin(self.k * omega)

    def derivative(self, omega):
        return self.weight * self.k * np.cos(self.k * omega)

    def negated(self):
        return SinTerm(-self.c, self.k, self.damping_a)

    def to_document(self):
        return {'type': 'sin', 'c': _complex_document(self.c), 'k': self.k, 'damping_a': self.damping_a}


@dataclass(frozen=True)
class PoleTerm(Term):
    c: complex
    a: complex
    type_name = 'pole'

    def value(self, omega):
        _check_poles(omega, self.poles)
        return self.c / (omega - self.a)

    def derivative(self, omega):
        _check_poles(omega, self.poles)
        return -self.c / (omega - self.a) ** 2

    def negated(self):
        return PoleTerm(-self.c, self.a)

    @property
    def poles(self):
        return (complex(self.a),)

    @property
    def is_rational(self):
        return True

    def to_document(self):
        return {'type': 'pole', 'c': _complex_document(self.c), 'a': _complex_document(self.a)}


@dataclass(frozen=True)
class InvQuadTerm(Term):
    c: complex
    a: float
    type_name = 'inv_quad'

    def value(self, omega):
        _check_poles(omega, self.poles)
        return self.c / (omega ** 2 + self.a ** 2)

    def derivative(self, omega):
        _check_poles(omega, self.poles)
        return -2.0 * self.c * omega / (omega ** 2 + self.a ** 2) ** 2

    def negated(self):
        return InvQuadTerm(-self.c, self.a)

    @property
    def poles(self):
        return (1j * self.a, -1j * self.a)

    @property
    def is_rational(self):
        return True

    def to_document(self):
        return {'type': 'inv_quad', 'c': _complex_document(self.c), 'a': self.a}


@dataclass(frozen=True)
class PowerTerm(Term):
    c: complex
    p: int
    type_name = 'power'

    def value(self, omega):
        return self.c * np.asarray(omega, dtype=complex) ** self.p

    def derivative(self, omega):
        if self.p == 0:
            return np.zeros_like(np.asarray(omega, dtype=complex))
        return self.c * self.p * np.asarray(omega, dtype=complex) ** (self.p - 1)

    def negated(self):
        return PowerTerm(-self.c, self.p)

    @property
    def is_rational(self):
        # constants only; higher powers give poles at 0 and infinity in tau
        return self.p == 0

    def to_document(self):
        return {'type': 'power', 'c': _complex_document(self.c), 'p': self.p}


def _parse_term(document: Any, path: str) -> Term:
    if not isinstance(document, dict):
        raise MonodromyParseError("term must be an object", path)
    kind = _require(document, 'type', path)
    c = _parse_complex(_require(document, 'c', path), f"{path}.c")
    if kind in ('cos', 'sin'):
        k = _parse_real(_require(document, 'k', path), f"{path}.k")
        if k < 0:
            raise MonodromyParseError("frequency k must be nonnegative", f"{path}.k")
        damping = _parse_real(document.get('damping_a', 0.0), f"{path}.damping_a")
        return (CosTerm if kind == 'cos' else SinTerm)(c, k, damping)
    if kind == 'pole':
        return PoleTerm(c, _parse_complex(_require(document, 'a', path), f"{path}.a"))
    if kind == 'inv_quad':
        a = _parse_real(_require(document, 'a', path), f"{path}.a")
        if a == 0:
            raise MonodromyParseError("inv_quad needs a != 0", f"{path}.a")
        return InvQuadTerm(c, a)
    if kind == 'power':
        p = _parse_int(_require(document, 'p', path), f"{path}.p")
        if not 0 <= p <= MAX_POWER:
            raise MonodromyParseError(f"power must lie in [0, {MAX_POWER}]", f"{path}.p")
        return PowerTerm(c, p)
    raise MonodromyParseError(f"unknown term type {kind!r}", f"{path}.type")


# ----------------------------------------------------------------------
# channels
# ----------------------------------------------------------------------
class ChannelExpr(ABC):
    """Scalar function of omega on one diagonal channel"""

    kind: str = ''

    @abstractmethod
    def evaluate(self, omega) -> np.ndarray:
        pass

    def log_values(self, omega) -> Optional[np.ndarray]:
        """Exact log when the channel is an exponential, else None"""
        return None

    @abstractmethod
    def log_derivative(self, omega) -> np.ndarray:
        pass

    @abstractmethod
    def inverse(self) -> 'ChannelExpr':
        pass

    @abstractmethod
    def singularities(self) -> List[Singularity]:
        pass

    @abstractmethod
    def to_document(self) -> Dict[str, Any]:
        pass

    @property
    def strip(self) -> Optional[float]:
        return None


@dataclass(frozen=True)
class ExpSum(ChannelExpr):
    terms: Tuple[Term, ...]
    strip_width: Optional[float] = None
    kind = 'exp_sum'

    def exponent(self, omega):
        omega = np.asarray(omega, dtype=complex)
        return sum((term.value(omega) for term in self.terms), np.zeros_like(omega))

    def evaluate(self, omega):
        return np.exp(self.exponent(omega))

    def log_values(self, omega):
        return self.exponent(omega)

    def log_derivative(self, omega):
        omega = np.asarray(omega, dtype=complex)
        return sum((term.derivative(omega) for term in self.terms), np.zeros_like(omega))

    def inverse(self):
        return ExpSum(tuple(term.negated() for term in self.terms), self.strip_width)

    def singularities(self):
        return [Singularity(pole, 'essential') for term in self.terms for pole in term.poles]

    @property
    def strip(self):
        return self.strip_width

    @property
    def is_rational(self) -> bool:
        return all(term.is_rational for term in self.terms)

    def to_document(self):
        document = {'kind': 'exp_sum', 'terms': [term.to_document() for term in self.terms]}
        if self.strip_width is not None:
            document['strip'] = self.strip_width
        return document


@dataclass(frozen=True)
class MonomialPower(ChannelExpr):
    a: complex
    n: int
    kind = 'monomial'

    def evaluate(self, omega):
        omega = np.asarray(omega, dtype=complex)
        if self.n < 0:
            _check_poles(omega, (complex(self.a),))
        return (omega - self.a) ** self.n

    def log_derivative(self, omega):
        omega = np.asarray(omega, dtype=complex)
        _check_poles(omega, (complex(self.a),))
        return self.n / (omega - self.a)

    def inverse(self):
        return MonomialPower(self.a, -self.n)

    def singularities(self):
        if self.n == 0:
            return []
        return [Singularity(complex(self.a), 'zero' if self.n > 0 else 'pole', abs(self.n))]

    def to_document(self):
        return {'kind': 'monomial', 'a': _complex_document(self.a), 'N': self.n}


@dataclass(frozen=True)
class Product(ChannelExpr):
    factors: Tuple[ChannelExpr, ...]
    kind = 'product'

    def evaluate(self, omega):
        omega = np.asarray(omega, dtype=complex)
        result = np.ones_like(omega)
        for factor in self.factors:
            result = result * factor.evaluate(omega)
        return result

    def log_values(self, omega):
        logs = [factor.log_values(omega) for factor in self.factors]
        if any(log is None for log in logs):
            return None
        return sum(logs, np.zeros_like(np.asarray(omega, dtype=complex)))

    def log_derivative(self, omega):
        omega = np.asarray(omega, dtype=complex)
        return sum((factor.log_derivative(omega) for factor in self.factors), np.zeros_like(omega))

    def inverse(self):
        return Product(tuple(factor.inverse() for factor in self.factors))

    def singularities(self):
        return [s for factor in self.factors for s in factor.singularities()]

    @property
    def strip(self):
        strips = [factor.strip for factor in self.factors if factor.strip is not None]
        return min(strips) if strips else None

    @property
    def is_monomial(self) -> bool:
        return all(isinstance(f, MonomialPower) for f in self.factors)

    def to_document(self):
        return {'kind': 'product', 'factors': [factor.to_document() for factor in self.factors]}


def _parse_channel(document: Any, path: str) -> ChannelExpr:
    if not isinstance(document, dict):
        raise MonodromyParseError("channel must be an object", path)
    kind = document.get('kind', 'exp_sum')
    if kind == 'exp_sum':
        terms = _require(document, 'terms', path)
        if not isinstance(terms, list):
            raise MonodromyParseError("terms must be a list", f"{path}.terms")
        parsed = tuple(_parse_term(t, f"{path}.terms[{i}]") for i, t in enumerate(terms))
        strip = document.get('strip')
        if strip is not None:
            strip = _parse_real(strip, f"{path}.strip")
            if strip <= 0:
                raise MonodromyParseError("strip must be positive", f"{path}.strip")
            for i, term in enumerate(parsed):
                if isinstance(term, InvQuadTerm) and strip > abs(term.a):
                    raise MonodromyParseError(
                        "strip exceeds the convergence region of the integral form",
                        f"{path}.terms[{i}]")
        return ExpSum(parsed, strip)
    if kind == 'monomial':
        a = _parse_complex(_require(document, 'a', path), f"{path}.a")
        n = _parse_int(_require(document, 'N', path), f"{path}.N")
        return MonomialPower(a, n)
    if kind == 'product':
        factors = _require(document, 'factors', path)
        if not isinstance(factors, list) or not factors:
            raise MonodromyParseError("factors must be a nonempty list", f"{path}.factors")
        return Product(tuple(_parse_channel(f, f"{path}.factors[{i}]") for i, f in enumerate(factors)))
    raise MonodromyParseError(f"unknown channel kind {kind!r}", f"{path}.kind")


# ----------------------------------------------------------------------
# monodromy
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class DiagonalMonodromy:
    """diag(channel_1, ..., channel_n) as a function of omega"""
    channels: Tuple[ChannelExpr, ...]
    lam: Lambda = Lambda.MINUS
    name: Optional[str] = field(default=None, compare=False)

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    def evaluate(self, omega) -> np.ndarray:
        """Channel values stacked on a leading axis"""
        return np.stack([channel.evaluate(omega) for channel in self.channels])

    def inverse(self) -> 'DiagonalMonodromy':
        name = f"inverse({self.name})" if self.name else None
        return DiagonalMonodromy(tuple(c.inverse() for c in self.channels), self.lam, name)

    def __mul__(self, other: 'DiagonalMonodromy') -> 'DiagonalMonodromy':
        if not isinstance(other, DiagonalMonodromy):
            return NotImplemented
        if other.lam != self.lam:
            raise ConfigurationError("cannot multiply monodromies with different lambda")
        if other.n_channels != self.n_channels:
            raise ConfigurationError("cannot multiply monodromies with different channel counts")
        name = f"{self.name}*{other.name}" if self.name and other.name else None
        return DiagonalMonodromy(
            tuple(Product((a, b)) for a, b in zip(self.channels, other.channels)), self.lam, name)

    def singularities(self) -> List[Tuple[int, Singularity]]:
        return [(j, s) for j, channel in enumerate(self.channels) for s in channel.singularities()]

    def is_unimodular_pair(self, omega=None, tolerance: float = 1e-12) -> bool:
        """Two channels whose product is 1 at the sample omegas"""
        if self.n_channels != 2:
            return False
        if omega is None:
            omega = np.linspace(-2.0, 2.0, 9) + 0.1j
        values = self.evaluate(np.asarray(omega, dtype=complex))
        return bool(np.all(np.abs(values[0] * values[1] - 1.0) <= tolerance * np.maximum(1.0, np.abs(values[0]))))

    def to_document(self) -> Dict[str, Any]:
        document = {
            'lambda': int(self.lam),
            'channels': [channel.to_document() for channel in self.channels],
        }
        if self.name:
            document['name'] = self.name
        return document


def _load_text(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise MonodromyParseError(f"document is neither JSON nor YAML: {e}")


def parse_monodromy(document: Any) -> DiagonalMonodromy:
    """
    Parse a monodromy document

    Args:
        document: DiagonalMonodromy, dict, JSON/YAML text or a path to such a file.
            A dict with a 'preset' key is expanded through the preset registry.

    Returns:
        DiagonalMonodromy
    """
    if isinstance(document, DiagonalMonodromy):
        return document
    if isinstance(document, str):
        if os.path.isfile(document):
            with open(document, 'r', encoding='utf-8') as f:
                document = _load_text(f.read())
        else:
            document = _load_text(document)
    if not isinstance(document, dict):
        raise MonodromyParseError("monodromy document must be an object")

    if 'preset' in document:
        from solutions.presets import preset_document
        params = {k: v for k, v in document.items() if k != 'preset'}
        document = preset_document(document['preset'], **params)

    try:
        lam = Lambda.parse(document.get('lambda', -1))
    except ConfigurationError as e:
        raise MonodromyParseError(e.message, '$.lambda')
    channels = _require(document, 'channels', '$')
    if not isinstance(channels, list) or not channels:
        raise MonodromyParseError("channels must be a nonempty list", '$.channels')
    parsed = tuple(_parse_channel(c, f"$.channels[{i}]") for i, c in enumerate(channels))
    return DiagonalMonodromy(parsed, lam, document.get('name'))


def evaluate_channel(channel: ChannelExpr, omega):
    """Evaluate one channel; raises EvaluationError at a pole"""
    return channel.evaluate(omega)


def _composed(channel: ChannelExpr, point: WeylPoint, lam: Lambda, tau):
    return channel.evaluate(spectral_map(tau, point, lam))


def singularity_roots(monodromy: DiagonalMonodromy, point: WeylPoint, contour: Contour) -> List[Dict[str, Any]]:
    """
    Locate the tau-images of every channel singularity

    Raises:
        InadmissibleContourError: when an image lies on the contour
    """
    located = []
    for j, singularity in monodromy.singularities():
        try:
            pair = spectral_roots(singularity.omega, point, monodromy.lam)
        except BranchPointError:
            raise InadmissibleContourError(
                "singularity maps onto a fixed point of the contour",
                {'channel': j, 'omega': [singularity.omega.real, singularity.omega.imag]})
        for root in pair:
            location = contour.locate(root)
            if location is PointLocation.ON_CONTOUR:
                raise InadmissibleContourError(
                    "monodromy singularity lies on the contour",
                    {'channel': j, 'omega': [singularity.omega.real, singularity.omega.imag],
                     'tau': [root.real, root.imag], **point.to_dict()})
            located.append({'channel': j, 'singularity': singularity, 'tau': root, 'location': location})
    return located


def compose_on_contour(monodromy: DiagonalMonodromy, point: WeylPoint,
                       contour: Contour) -> List[BoundarySamples]:
    """
    Sample every channel of M(omega(tau)) on the contour nodes

    Returns:
        One BoundarySamples per channel, carrying the closed form for refinement

    Raises:
        InadmissibleContourError: singularity on the contour, strip violated,
            or samples vanishing/non-finite
    """
    if monodromy.lam != contour.lam:
        raise ConfigurationError("monodromy and contour use different lambda")
    singularity_roots(monodromy, point, contour)
    omega = spectral_map(contour.nodes, point, monodromy.lam)

    samples = []
    for j, channel in enumerate(monodromy.channels):
        strip = channel.strip
        if strip is not None and np.max(np.abs(omega.imag)) >= strip:
            raise InadmissibleContourError(
                "contour leaves the convergence strip of the monodromy",
                {'channel': j, 'strip': strip, 'max_imag_omega': float(np.max(np.abs(omega.imag)))})
        values = channel.evaluate(omega)
        magnitude = np.abs(values)
        if not np.all(np.isfinite(values)) or magnitude.min() <= Config.ZERO_TOL * magnitude.max():
            raise InadmissibleContourError(
                "monodromy vanishes or blows up on the contour", {'channel': j, **point.to_dict()})
        samples.append(BoundarySamples(contour, values, partial(_composed, channel, point, monodromy.lam)))
    return samples


def symmetry_residual(monodromy: DiagonalMonodromy, point: WeylPoint, contour: Contour) -> float:
    """max over nodes and channels of |M(omega(i_lambda tau)) - M(omega(tau))|"""
    images = involution(contour.nodes, contour.lam)
    direct = monodromy.evaluate(spectral_map(contour.nodes, point, monodromy.lam))
    mirrored = monodromy.evaluate(spectral_map(images, point, monodromy.lam))
    return float(np.max(np.abs(mirrored - direct)))
