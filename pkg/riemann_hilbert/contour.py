"""
Admissible contours in the spectral plane

A contour is a closed curve tau(t), t in [0, 2pi), sampled at equispaced
parameter values. Quadrature weights are tau'(t_k) * 2pi/N, so that
sum(f(tau_k) * w_k) approximates the contour integral of f.
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from config import Config
from utils.errors import ConfigurationError, DomainError, GeometryError
from utils.logger import setup_logger

logger = setup_logger(__name__)

TWO_PI = 2.0 * math.pi
_CHUNK = 512


class Lambda(IntEnum):
    """Sign selecting the signature of the reduced two-dimensional metric"""
    PLUS = 1
    MINUS = -1

    @property
    def fixed_point(self) -> complex:
        """p_F = sqrt(-lambda); the fixed points of the involution are +-p_F"""
        return 1.0 + 0.0j if self is Lambda.MINUS else 1.0j

    @classmethod
    def parse(cls, value: Any) -> 'Lambda':
        """Accept Lambda, +-1 as int/float, or '+1'/'-1' strings"""
        if isinstance(value, Lambda):
            return value
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"lambda must be +1 or -1, got {value!r}")
        if number == 1.0:
            return cls.PLUS
        if number == -1.0:
            return cls.MINUS
        raise ConfigurationError(f"lambda must be +1 or -1, got {value!r}")


class PointLocation(Enum):
    """Position of a point relative to a contour"""
    INSIDE = "inside"
    OUTSIDE = "outside"
    ON_CONTOUR = "on_contour"


def involution(tau, lam: Lambda):
    """
    The involution i_lambda(tau) = -lambda / tau

    Args:
        tau: Complex scalar or array, nonzero
        lam: Signature sign

    Returns:
        -lambda / tau with the same shape as the input
    """
    values = np.asarray(tau, dtype=complex)
    if np.any(values == 0):
        raise DomainError("involution undefined at tau = 0")
    result = -int(lam) / values
    return result if result.ndim else complex(result)


@dataclass(frozen=True)
class Bump:
    """
    Smooth periodic displacement of log(tau):
    amplitude * exp((cos(t - center) - 1) / width**2).
    Real amplitude moves the curve radially, imaginary amplitude shifts its angle.
    """
    center: float
    width: float
    amplitude: complex

    def __post_init__(self):
        if not (self.width > 0 and math.isfinite(self.width)):
            raise ConfigurationError(f"bump width must be positive, got {self.width}")
        object.__setattr__(self, 'center', float(self.center))
        object.__setattr__(self, 'amplitude', complex(self.amplitude))

    def profile(self, t: np.ndarray) -> np.ndarray:
        return self.amplitude * np.exp((np.cos(t - self.center) - 1.0) / self.width ** 2)

    def profile_prime(self, t: np.ndarray) -> np.ndarray:
        return self.profile(t) * (-np.sin(t - self.center) / self.width ** 2)

    def to_document(self) -> Dict[str, Any]:
        return {
            'center': self.center,
            'width': self.width,
            'amplitude': [self.amplitude.real, self.amplitude.imag],
        }

    @classmethod
    def from_document(cls, document: Any) -> 'Bump':
        if isinstance(document, Bump):
            return document
        if isinstance(document, (list, tuple)) and len(document) == 3:
            center, width, amplitude = document
        elif isinstance(document, dict):
            try:
                center = document['center']
                width = document['width']
                amplitude = document['amplitude']
            except KeyError as e:
                raise ConfigurationError(f"bump is missing field {e}")
        else:
            raise ConfigurationError(f"cannot read bump from {document!r}")
        return cls(float(center), float(width), _read_complex(amplitude))


def _read_complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, dict):
        return complex(float(value.get('re', 0.0)), float(value.get('im', 0.0)))
    if isinstance(value, str):
        return complex(value.replace(' ', '').replace('i', 'j'))
    return complex(value)


@dataclass(frozen=True)
class ContourSpec:
    """Hashable description of a contour; equal specs build the identical Contour"""
    kind: str = 'circle'
    lam: Lambda = Lambda.MINUS
    node_count: int = 256
    center: complex = 0j
    radius: float = 1.0
    bumps: Tuple[Bump, ...] = ()
    symmetrize: bool = True

    def to_document(self) -> Dict[str, Any]:
        document: Dict[str, Any] = {
            'kind': self.kind,
            'lambda': int(self.lam),
            'nodes': self.node_count,
        }
        if self.kind == 'circle':
            if self.center != 0 or self.radius != 1.0:
                document['center'] = [self.center.real, self.center.imag]
                document['radius'] = self.radius
        else:
            document['bumps'] = [bump.to_document() for bump in self.bumps]
            if not self.symmetrize:
                document['symmetrize'] = False
        return document

    @classmethod
    def from_document(cls, document: Dict[str, Any],
                      default_lambda: Optional[Lambda] = None,
                      default_nodes: Optional[int] = None) -> 'ContourSpec':
        if not isinstance(document, dict):
            raise ConfigurationError("contour document must be a JSON object")
        kind = document.get('kind', 'circle')
        if kind not in ('circle', 'deformed'):
            raise ConfigurationError(f"unknown contour kind {kind!r}")
        lam_value = document.get('lambda', default_lambda if default_lambda is not None else -1)
        node_count = document.get('nodes', default_nodes or Config.NODE_COUNT)
        bumps = tuple(Bump.from_document(b) for b in document.get('bumps', []))
        if kind == 'deformed' and not bumps:
            kind = 'circle'
        return cls(
            kind=kind,
            lam=Lambda.parse(lam_value),
            node_count=int(node_count),
            center=_read_complex(document.get('center', 0.0)),
            radius=float(document.get('radius', 1.0)),
            bumps=bumps,
            symmetrize=bool(document.get('symmetrize', True)),
        )


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of the admissibility checks"""
    admissible: bool
    failures: Tuple[str, ...]
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.admissible

    def to_dict(self) -> Dict[str, Any]:
        return {
            'admissible': self.admissible,
            'failures': list(self.failures),
            'diagnostics': self.diagnostics,
        }


class Contour:
    """
    Closed curve with trapezoid quadrature and point classification.
    Instances are immutable; build them through build_contour so equal
    specs share one object.
    """

    def __init__(self, spec: ContourSpec,
                 curve: Callable[[np.ndarray], np.ndarray],
                 curve_prime: Callable[[np.ndarray], np.ndarray]):
        self.spec = spec
        self.lam = spec.lam
        self.node_count = spec.node_count
        self._curve = curve
        self._curve_prime = curve_prime

        n = self.node_count
        self.theta = TWO_PI * np.arange(n) / n
        self.nodes = np.asarray(curve(self.theta), dtype=complex)
        self.velocity = np.asarray(curve_prime(self.theta), dtype=complex)
        self.weights = self.velocity * (TWO_PI / n)
        for array in (self.theta, self.nodes, self.velocity, self.weights):
            array.setflags(write=False)

        self.scale = float(np.max(np.abs(self.nodes)))
        self.tolerance = Config.GEOMETRY_TOL * self.scale
        self.spacing = float(np.max(np.abs(np.roll(self.nodes, -1) - self.nodes)))

    def __repr__(self) -> str:
        return f"Contour(kind={self.spec.kind!r}, lambda={int(self.lam)}, nodes={self.node_count})"

    @property
    def is_circle(self) -> bool:
        return self.spec.kind == 'circle'

    @property
    def is_unit_circle(self) -> bool:
        return self.is_circle and self.spec.center == 0 and self.spec.radius == 1.0

    def curve(self, t):
        return self._curve(np.asarray(t, dtype=float))

    def curve_prime(self, t):
        return self._curve_prime(np.asarray(t, dtype=float))

    def with_node_count(self, node_count: int) -> 'Contour':
        return build_contour(replace(self.spec, node_count=node_count))

    def resolved_for(self, points, clearance: Optional[float] = None) -> 'Contour':
        """
        Same curve with the node count doubled until every point lies at
        least `clearance` node spacings away from it

        Trapezoid sums of integrands singular at `points` converge
        geometrically only at that clearance. Capped at MAX_NODE_COUNT.
        """
        clearance = Config.SINGULARITY_CLEARANCE if clearance is None else clearance
        pts = np.atleast_1d(np.asarray(points, dtype=complex)).ravel()
        if pts.size == 0:
            return self
        nearest = float(np.min(self.distance(pts)))
        contour = self
        while contour.spacing * clearance > nearest:
            doubled = 2 * contour.node_count
            if doubled > Config.MAX_NODE_COUNT:
                logger.warning(f"Singularity {nearest:.3e} from {self!r}; "
                               f"clearance capped at {contour.node_count} nodes")
                break
            contour = contour.with_node_count(doubled)
        if contour is not self:
            logger.debug(f"Resolved {self!r} to {contour.node_count} nodes (nearest singularity {nearest:.3e})")
        return contour

    def to_document(self) -> Dict[str, Any]:
        return self.spec.to_document()

    # ------------------------------------------------------------------
    # distances
    # ------------------------------------------------------------------
    def _nearest_nodes(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        index = np.empty(points.shape, dtype=int)
        distance = np.empty(points.shape, dtype=float)
        for start in range(0, points.size, _CHUNK):
            block = np.abs(points[start:start + _CHUNK, None] - self.nodes[None, :])
            index[start:start + _CHUNK] = block.argmin(axis=1)
            distance[start:start + _CHUNK] = block.min(axis=1)
        return index, distance

    def _refine_distance(self, point: complex, node: int, coarse: float) -> float:
        step = TWO_PI / self.node_count
        t0 = self.theta[node]
        result = minimize_scalar(
            lambda t: abs(complex(self._curve(np.asarray(t))) - point),
            bounds=(t0 - step, t0 + step),
            method='bounded',
            options={'xatol': 1e-15},
        )
        return min(float(result.fun), coarse)

    def distance(self, points) -> np.ndarray:
        """True distance from each point to the curve"""
        pts = np.atleast_1d(np.asarray(points, dtype=complex)).ravel()
        if self.is_circle:
            return np.abs(np.abs(pts - self.spec.center) - self.spec.radius)
        index, coarse = self._nearest_nodes(pts)
        result = coarse.copy()
        for k in np.flatnonzero(coarse < 2.0 * self.spacing):
            result[k] = self._refine_distance(pts[k], int(index[k]), float(coarse[k]))
        return result

    # ------------------------------------------------------------------
    # winding and location
    # ------------------------------------------------------------------
    def _polyline_winding(self, points: np.ndarray, samples: np.ndarray) -> np.ndarray:
        winding = np.empty(points.shape, dtype=int)
        closed = np.append(samples, samples[0])
        for start in range(0, points.size, _CHUNK):
            angles = np.angle(closed[None, :] - points[start:start + _CHUNK, None])
            steps = np.angle(np.exp(1j * np.diff(angles, axis=1)))
            winding[start:start + _CHUNK] = np.rint(steps.sum(axis=1) / TWO_PI).astype(int)
        return winding

    def winding_number(self, point: complex, distance: Optional[float] = None) -> int:
        """Winding number of the curve about a point off the curve"""
        point = complex(point)
        if self.is_circle:
            return int(abs(point - self.spec.center) < self.spec.radius)
        if distance is None:
            distance = float(self.distance(point)[0])
        density = 1
        if distance < 2.0 * self.spacing:
            density = min(int(math.ceil(4.0 * self.spacing / max(distance, 1e-300))), 1024)
        if density == 1:
            samples = self.nodes
        else:
            count = self.node_count * density
            samples = self._curve(TWO_PI * np.arange(count) / count)
        return int(self._polyline_winding(np.array([point]), samples)[0])

    def locate(self, point: complex) -> PointLocation:
        """
        Classify a point as Inside, Outside or OnContour

        Args:
            point: Complex point

        Returns:
            PointLocation tag
        """
        point = complex(point)
        distance = float(self.distance(point)[0])
        if distance < self.tolerance:
            return PointLocation.ON_CONTOUR
        if self.winding_number(point, distance) != 0:
            return PointLocation.INSIDE
        return PointLocation.OUTSIDE

    def classify(self, points) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Vectorized classification used by factor evaluation

        Returns:
            (node index or -1, inside mask, distance to the nearest node)
        """
        pts = np.atleast_1d(np.asarray(points, dtype=complex)).ravel()
        index, coarse = self._nearest_nodes(pts)
        node_index = np.where(coarse <= 1e-12 * self.scale, index, -1)
        if self.is_circle:
            inside = np.abs(pts - self.spec.center) < self.spec.radius
            gap = np.minimum(coarse, self.distance(pts))
        else:
            inside = self._polyline_winding(pts, self.nodes) != 0
            gap = coarse
        return node_index, inside, gap


def _validate_node_count(node_count: Any) -> int:
    if isinstance(node_count, bool) or int(node_count) != node_count:
        raise ConfigurationError(f"node_count must be an integer, got {node_count!r}")
    node_count = int(node_count)
    if node_count < Config.MIN_NODE_COUNT or node_count % 2:
        raise ConfigurationError(
            f"node_count must be even and at least {Config.MIN_NODE_COUNT}, got {node_count}")
    if node_count > Config.MAX_NODE_COUNT:
        raise ConfigurationError(
            f"node_count {node_count} exceeds the cap {Config.MAX_NODE_COUNT}")
    return node_count


def _reflected(t: np.ndarray, lam: Lambda) -> np.ndarray:
    """Parameter action of the involution on log-polar curves"""
    return -t if lam is Lambda.MINUS else math.pi - t


def _deformed_curves(spec: ContourSpec):
    bumps = spec.bumps
    lam = spec.lam

    def displacement(t):
        return sum((b.profile(t) for b in bumps), np.zeros_like(t, dtype=complex))

    def displacement_prime(t):
        return sum((b.profile_prime(t) for b in bumps), np.zeros_like(t, dtype=complex))

    if spec.symmetrize:
        def shift(t):
            return 0.5 * (displacement(t) - displacement(_reflected(t, lam)))

        def shift_prime(t):
            return 0.5 * (displacement_prime(t) + displacement_prime(_reflected(t, lam)))
    else:
        shift, shift_prime = displacement, displacement_prime

    def curve(t):
        t = np.asarray(t, dtype=float)
        return np.exp(1j * t + shift(t))

    def curve_prime(t):
        t = np.asarray(t, dtype=float)
        return curve(t) * (1j + shift_prime(t))

    return curve, curve_prime


def _circle_curves(spec: ContourSpec):
    center, radius = spec.center, spec.radius

    def curve(t):
        return center + radius * np.exp(1j * np.asarray(t, dtype=float))

    def curve_prime(t):
        return 1j * radius * np.exp(1j * np.asarray(t, dtype=float))

    return curve, curve_prime


def _self_intersects(nodes: np.ndarray) -> bool:
    """Proper crossings between non-adjacent polyline segments"""
    a = nodes
    b = np.roll(nodes, -1)
    n = nodes.size
    j = np.arange(n)[None, :]

    def cross(u, v):
        return (np.conj(u) * v).imag

    for start in range(0, n, _CHUNK // 2):
        i = np.arange(start, min(start + _CHUNK // 2, n))[:, None]
        ai, bi, aj, bj = a[i], b[i], a[j], b[j]
        d1 = cross(bi - ai, aj - ai)
        d2 = cross(bi - ai, bj - ai)
        d3 = cross(bj - aj, ai - aj)
        d4 = cross(bj - aj, bi - aj)
        gap = np.abs(i - j)
        adjacent = (gap <= 1) | (gap == n - 1)
        if np.any((d1 * d2 < 0) & (d3 * d4 < 0) & ~adjacent):
            return True
    return False


@lru_cache(maxsize=64)
def build_contour(spec: ContourSpec) -> Contour:
    """
    Build (or fetch) the contour described by a spec

    Args:
        spec: Contour description

    Returns:
        Contour shared by every caller passing an equal spec
    """
    node_count = _validate_node_count(spec.node_count)
    if node_count != spec.node_count:
        spec = replace(spec, node_count=node_count)
    if spec.kind == 'circle':
        if not spec.radius > 0:
            raise ConfigurationError(f"circle radius must be positive, got {spec.radius}")
        contour = Contour(spec, *_circle_curves(spec))
    elif spec.kind == 'deformed':
        contour = Contour(spec, *_deformed_curves(spec))
        if spec.symmetrize:
            if contour._polyline_winding(np.array([0j]), contour.nodes)[0] != 1:
                raise GeometryError("symmetrized contour does not encircle the origin once")
            if _self_intersects(contour.nodes):
                raise GeometryError("symmetrized contour is not simple")
    else:
        raise ConfigurationError(f"unknown contour kind {spec.kind!r}")
    logger.debug(f"Built {contour!r} (spacing {contour.spacing:.3e})")
    return contour


def unit_circle(lam: Union[Lambda, int] = Lambda.MINUS, node_count: Optional[int] = None) -> Contour:
    """Unit circle with equispaced nodes and weights i*tau_k*2pi/N"""
    return build_contour(ContourSpec('circle', Lambda.parse(lam), node_count or Config.NODE_COUNT))


def circle_contour(center: complex, radius: float, lam: Union[Lambda, int] = Lambda.MINUS,
                   node_count: Optional[int] = None) -> Contour:
    """Circle with arbitrary center and radius (not admissible in general)"""
    return build_contour(ContourSpec('circle', Lambda.parse(lam), node_count or Config.NODE_COUNT,
                                     center=complex(center), radius=float(radius)))


def deformed_contour(bumps: Sequence[Any], lam: Union[Lambda, int] = Lambda.MINUS,
                     node_count: Optional[int] = None, symmetrize: bool = True) -> Contour:
    """
    Unit circle displaced by smooth bumps in log(tau)

    Args:
        bumps: Bump objects, (center, width, amplitude) triples or dicts
        lam: Signature sign
        node_count: Quadrature nodes
        symmetrize: Replace the displacement by its i_lambda-odd part

    Returns:
        Contour (the unit circle itself when no bumps are given)
    """
    lam = Lambda.parse(lam)
    bump_tuple = tuple(Bump.from_document(b) for b in bumps)
    if not bump_tuple:
        return unit_circle(lam, node_count)
    return build_contour(ContourSpec('deformed', lam, node_count or Config.NODE_COUNT,
                                     bumps=bump_tuple, symmetrize=symmetrize))


NAMED_CONTOURS = {
    # tau_a = 1.6 inside, tau_a~ = 0.625 outside
    'tau-a-inside': (Bump(0.5 * math.pi, 1.0, 2.0 - 4.0j),),
    # mirror: tau_a~ = 0.625 inside, tau_a = 1.6 outside
    'tau-a-tilde-inside': (Bump(0.5 * math.pi, 0.8, 0.4),),
}


def named_contour(name: str, lam: Union[Lambda, int] = Lambda.MINUS,
                  node_count: Optional[int] = None) -> Contour:
    """Resolve 'circle' or one of NAMED_CONTOURS"""
    lam = Lambda.parse(lam)
    if name in ('circle', 'unit', 'unit-circle'):
        return unit_circle(lam, node_count)
    if name not in NAMED_CONTOURS:
        raise ConfigurationError(f"unknown contour name {name!r}",
                                 {'known': ['circle'] + sorted(NAMED_CONTOURS)})
    if lam is not Lambda.MINUS:
        raise ConfigurationError(f"named contour {name!r} is defined for lambda = -1")
    return deformed_contour(NAMED_CONTOURS[name], lam, node_count)


def contour_from_document(document: Any, lam: Optional[Union[Lambda, int]] = None,
                          node_count: Optional[int] = None) -> Contour:
    """Build a contour from a name, a ContourSpec, a dict or an existing Contour"""
    if isinstance(document, Contour):
        return document
    if isinstance(document, ContourSpec):
        return build_contour(document)
    if isinstance(document, str):
        return named_contour(document, lam if lam is not None else Lambda.MINUS, node_count)
    spec = ContourSpec.from_document(
        document,
        default_lambda=Lambda.parse(lam) if lam is not None else None,
        default_nodes=node_count,
    )
    return build_contour(spec)


def is_admissible(contour: Contour) -> AdmissibilityReport:
    """
    Check simplicity, encirclement of 0, i_lambda-invariance and the fixed points

    Args:
        contour: Contour to check

    Returns:
        AdmissibilityReport listing each failed check
    """
    failures: List[str] = []
    diagnostics: Dict[str, Any] = {'node_count': contour.node_count, 'lambda': int(contour.lam)}

    origin_distance = float(contour.distance(0j)[0])
    winding = 0 if origin_distance < contour.tolerance else contour.winding_number(0j, origin_distance)
    diagnostics['winding_about_origin'] = winding
    if winding != 1:
        failures.append('does not encircle origin')

    if _self_intersects(contour.nodes):
        failures.append('not simple')

    images = np.asarray(involution(contour.nodes, contour.lam))
    _, coarse = contour._nearest_nodes(images)
    invariance = coarse.copy()
    off = np.flatnonzero(coarse >= contour.tolerance)
    if off.size:
        invariance[off] = contour.distance(images[off])
    diagnostics['invariance_distance'] = float(invariance.max())
    if invariance.max() >= contour.tolerance:
        failures.append('not i_lambda-invariant')

    p_f = contour.lam.fixed_point
    fixed = contour.distance(np.array([p_f, -p_f]))
    diagnostics['fixed_point_distance'] = float(fixed.max())
    if fixed.max() >= contour.tolerance:
        failures.append('fixed points not on curve')

    return AdmissibilityReport(not failures, tuple(failures), diagnostics)
