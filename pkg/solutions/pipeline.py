"""
Run configuration and the command pipelines behind the CLI and the HTTP API
"""
import json
import os
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import yaml
from jinja2 import Template

from config import Config
from gravity.metric import (
    MetricData,
    einstein_rosen_psi,
    kasner_exponents,
    kasner_line_element,
    metric_data,
    pulse_psi,
)
from riemann_hilbert.contour import (
    Contour,
    Lambda,
    PointLocation,
    contour_from_document,
    is_admissible,
    named_contour,
    unit_circle,
)
from riemann_hilbert.spectral import WeylPoint, spectral_roots
from solutions.factorize import Backend, DeformationSpec, canonical_solve, deform
from solutions.families import (
    FactorizedFamily,
    GridSpec,
    SolutionFamily,
    family_from_document,
)
from solutions.monodromy import DiagonalMonodromy, parse_monodromy
from solutions.presets import PRESETS, kasner_deformed_m, kasner_document, kasner_m, preset_document
from utils.errors import ConfigurationError
from utils.logger import setup_logger
from verification.checks import SolutionGrid, compute_a
from verification.currents import current_conservation_residual, kac_moody_current, kasner_current_closed_form
from verification.report import VerificationReport, run_verification_suite, verify_m_values

logger = setup_logger(__name__)

SOLUTION_FORMAT = 'whgrav.solution/1'
DEFAULT_GRID = '0.5:1.5:11,-0.5:0.5:11'
PRESET_PARAMETERS = ('k', 'a', 'b', 'N', 'c', 'lambda')
COMMANDS = ('factorize', 'verify', 'deform', 'compose', 'invert', 'metric', 'current', 'example')

# Kasner walk-through point; omega = a has the roots 1.6 and 0.625 there
EXAMPLE_POINT = WeylPoint(1.0, 0.0)
EXAMPLE_A = 3.56 / 3.2


def parse_complex(value: Any, name: str = 'value') -> complex:
    """Accept numbers, [re, im] pairs and strings such as '1+2i' or '3j'"""
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(' ', '').replace('i', 'j'))
        except ValueError:
            raise ConfigurationError(f"{name} is not a complex number: {value!r}")
    try:
        return complex(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} is not a complex number: {value!r}")


def load_document(source: Any) -> Any:
    """JSON or YAML from a dict, a path or inline text"""
    if not isinstance(source, str):
        return source
    text = source
    if os.path.isfile(source):
        with open(source, 'r', encoding='utf-8') as f:
            text = f.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"document is neither JSON nor YAML: {e}")


@dataclass
class RunConfig:
    """Per-invocation settings shared by the CLI, config files and HTTP bodies"""
    command: str = 'factorize'
    preset: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)
    monodromy: Any = None
    contour: Any = None
    grid: GridSpec = field(default_factory=lambda: GridSpec.parse(DEFAULT_GRID))
    nodes: Optional[int] = None
    backend: Optional[str] = None
    tolerance: Optional[float] = None
    tolerances: Dict[str, float] = field(default_factory=dict)
    omega: Any = None
    mult: Optional[int] = None
    current_omega: Any = None
    channel: int = 0
    omegas: Optional[List[complex]] = None
    refine: bool = False
    out: Optional[str] = None
    inputs: List[str] = field(default_factory=list)
    solution: Optional[str] = None
    line_element: bool = False
    sigma: int = 1
    epsilon: int = -1

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> 'RunConfig':
        """
        Build from a config document or an HTTP request body

        Preset parameters may sit at the top level or under 'params'.
        """
        if not isinstance(document, dict):
            raise ConfigurationError("run configuration must be an object")
        known = {f.name for f in fields(cls)}
        values: Dict[str, Any] = {}
        params = dict(document.get('params') or {})
        for key, value in document.items():
            if key in PRESET_PARAMETERS:
                params[key] = value
            elif key == 'tol':
                values['tolerance'] = value
            elif key in known and key != 'params':
                values[key] = value
            elif key not in ('params', 'config'):
                raise ConfigurationError(f"unknown configuration key {key!r}")
        config = cls(**{k: v for k, v in values.items() if k != 'grid'}, params=params)
        if values.get('grid') is not None:
            config.grid = GridSpec.from_document(values['grid'])
        return config._normalized()

    @classmethod
    def from_args(cls, args) -> 'RunConfig':
        """argparse namespace on top of an optional --config document"""
        base = cls.from_dict(load_document(args.config)) if getattr(args, 'config', None) else cls()
        overrides: Dict[str, Any] = {'command': args.command}
        for name in ('preset', 'monodromy', 'contour', 'nodes', 'backend', 'omega', 'mult', 'channel',
                     'omegas', 'out', 'solution', 'sigma', 'epsilon', 'current_omega'):
            value = getattr(args, name, None)
            if value is not None:
                overrides[name] = value
        if getattr(args, 'tol', None) is not None:
            overrides['tolerance'] = args.tol
        if getattr(args, 'grid', None):
            overrides['grid'] = GridSpec.parse(args.grid)
        if getattr(args, 'inputs', None):
            overrides['inputs'] = list(args.inputs)
        for flag in ('refine', 'line_element'):
            if getattr(args, flag, False):
                overrides[flag] = True
        params = dict(base.params)
        for name in PRESET_PARAMETERS:
            value = getattr(args, 'lam' if name == 'lambda' else name, None)
            if value is not None:
                params[name] = value
        overrides['params'] = params
        return replace(base, **overrides)._normalized()

    def _normalized(self) -> 'RunConfig':
        if self.omegas is not None:
            self.omegas = [parse_complex(w, 'omegas') for w in self.omegas]
        if self.mult is not None:
            self.mult = int(self.mult)
        return self

    def validate(self) -> 'RunConfig':
        if self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command {self.command!r}", {'known': list(COMMANDS)})
        if not self.grid.rho_min > 0:
            raise ConfigurationError("grid rho_min must be positive")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ConfigurationError(f"tolerance must be positive, got {self.tolerance}")
        for name, value in self.tolerances.items():
            if not float(value) > 0:
                raise ConfigurationError(f"tolerance {name!r} must be positive, got {value}")
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {self.preset!r}", {'known': sorted(PRESETS)})
        if self.backend is not None:
            Backend.parse(self.backend)

        needs_monodromy = self.command in ('factorize', 'deform', 'metric', 'current') or (
            self.command == 'verify' and not self.solution)
        if needs_monodromy and self.preset is None and self.monodromy is None:
            raise ConfigurationError(f"{self.command} needs --preset or --monodromy")
        if self.command == 'deform' and (self.omega is None or self.mult is None):
            raise ConfigurationError("deform needs --omega and --mult")
        if self.command == 'current' and self.current_omega is None and (self.omega is None or self.mult is not None):
            raise ConfigurationError("current needs --current-omega (or --omega without a deformation)")
        if self.command == 'compose' and len(self.inputs) != 2:
            raise ConfigurationError("compose needs exactly two solution files")
        if self.command == 'invert' and len(self.inputs) != 1:
            raise ConfigurationError("invert needs exactly one solution file")
        if self.mult is not None and self.omega is None:
            raise ConfigurationError("--mult needs --omega")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            'command': self.command,
            'preset': self.preset,
            'params': self.params,
            'monodromy': self.monodromy,
            'contour': self.contour,
            'grid': self.grid.to_document(),
            'nodes': self.nodes,
            'backend': self.backend,
            'tolerance': self.tolerance,
            'omega': None if self.omega is None else str(self.omega),
            'mult': self.mult,
            'channel': self.channel,
            'refine': self.refine,
        }


# ----------------------------------------------------------------------
# building blocks
# ----------------------------------------------------------------------
def build_monodromy(config: RunConfig) -> DiagonalMonodromy:
    if config.preset is not None:
        return parse_monodromy(preset_document(config.preset, **config.params))
    return parse_monodromy(config.monodromy)


def build_contour_from(config: RunConfig, lam: Lambda) -> Contour:
    """--contour as a name, inline JSON, a file path or a document"""
    nodes = config.nodes or Config.NODE_COUNT
    source = config.contour
    if source is None:
        return unit_circle(lam, nodes)
    if isinstance(source, str) and not os.path.isfile(source) and not source.lstrip().startswith('{'):
        return named_contour(source, lam, nodes)
    return contour_from_document(load_document(source), lam, nodes)


def resolve_omega(config: RunConfig) -> complex:
    """'a' refers to the preset's a parameter"""
    if isinstance(config.omega, str) and config.omega.strip() in ('a', '-a'):
        if 'a' not in config.params:
            raise ConfigurationError("--omega a needs the preset parameter a")
        sign = -1.0 if config.omega.strip().startswith('-') else 1.0
        return complex(sign * float(config.params['a']))
    return parse_complex(config.omega, 'omega')


def deformation_of(config: RunConfig, channel_count: int) -> Optional[DeformationSpec]:
    if config.omega is None or config.mult is None:
        return None
    if not 0 <= config.channel < channel_count:
        raise ConfigurationError(f"channel {config.channel} out of range for {channel_count} channels")
    return DeformationSpec.single(channel_count, config.channel, resolve_omega(config), config.mult)


def build_family(config: RunConfig) -> SolutionFamily:
    monodromy = build_monodromy(config)
    contour = build_contour_from(config, monodromy.lam)
    family: SolutionFamily = FactorizedFamily(monodromy, contour, config.backend)
    spec = deformation_of(config, family.n_channels)
    if spec is not None:
        family = family.deformed(spec)
    logger.info(f"Built {family.to_document()['kind']} family on {contour!r}")
    return family


def _complex_grid(values: np.ndarray) -> List[Any]:
    array = np.asarray(values, dtype=complex)
    if array.ndim == 0:
        return [float(array.real), float(array.imag)]
    return [_complex_grid(item) for item in array]


def _read_complex_grid(values: Any) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    return array[..., 0] + 1j * array[..., 1]


def solution_to_document(family: SolutionFamily, grid: GridSpec, m_values: np.ndarray,
                         provenance: List[str]) -> Dict[str, Any]:
    """Solution file: family recipe, grid and channel-stacked M values"""
    return {
        'format': SOLUTION_FORMAT,
        'lambda': int(family.lam),
        'channels': int(family.n_channels),
        'family': family.to_document(),
        'grid': grid.to_document(),
        'rho': grid.rho_values.tolist(),
        'v': grid.v_values.tolist(),
        'm': _complex_grid(m_values),
        'provenance': list(provenance),
    }


@dataclass
class LoadedSolution:
    family: Optional[SolutionFamily]
    grid: GridSpec
    m_values: np.ndarray
    lam: Lambda
    provenance: List[str]


def load_solution(source: Any, node_count: Optional[int] = None) -> LoadedSolution:
    """Read a solution file; the family is absent for externally produced grids"""
    document = load_document(source)
    if not isinstance(document, dict) or 'm' not in document or 'grid' not in document:
        raise ConfigurationError("solution document needs 'grid' and 'm'")
    if document.get('format', SOLUTION_FORMAT) != SOLUTION_FORMAT:
        raise ConfigurationError(f"unsupported solution format {document.get('format')!r}")
    family = family_from_document(document['family'], node_count) if document.get('family') else None
    grid = GridSpec.from_document(document['grid'])
    m_values = _read_complex_grid(document['m'])
    if m_values.shape[1:] != grid.shape:
        raise ConfigurationError("solution M values do not match the grid")
    lam = family.lam if family is not None else Lambda.parse(document.get('lambda', -1))
    return LoadedSolution(family, grid, m_values, lam, list(document.get('provenance', [])))


def write_output(text: str, path: Optional[str]) -> None:
    directory = os.path.dirname(path) if path else ''
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)


def dumps(document: Any) -> str:
    """JSON with shortest round-trip float repr"""
    return json.dumps(document, indent=2, allow_nan=True)


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------
SUMMARY_TEMPLATE = Template("""{{ command }}: {{ kind }} family, {{ channels }} channel(s), lambda = {{ lam }}
contour: {{ contour }}
grid: {{ grid }}
{% for row in channel_rows %}
channel {{ row.index }}: |M| in [{{ '%.6g'|format(row.min) }}, {{ '%.6g'|format(row.max) }}]{% if row.backend %}, backend {{ row.backend }}{% endif %}

{% endfor %}
{% if out %}
written to {{ out }}
{% endif %}
""", trim_blocks=True)


def render_summary(command: str, document: Dict[str, Any], out: Optional[str] = None,
                   backends: Optional[Tuple[Backend, ...]] = None) -> str:
    m_values = _read_complex_grid(document['m'])
    rows = []
    for index, channel in enumerate(m_values):
        magnitude = np.abs(channel)
        rows.append({'index': index, 'min': float(magnitude.min()), 'max': float(magnitude.max()),
                     'backend': backends[index].value if backends else None})
    return SUMMARY_TEMPLATE.render(
        command=command, kind=document['family']['kind'], channels=document['channels'],
        lam=document['lambda'], contour=json.dumps(_family_contour(document['family'])),
        grid=str(GridSpec.from_document(document['grid'])), channel_rows=rows, out=out)


def _family_contour(family_document: Dict[str, Any]) -> Any:
    while 'contour' not in family_document:
        family_document = family_document.get('base') or family_document['factors'][0]
    return family_document['contour']


def run_factorize(config: RunConfig) -> Dict[str, Any]:
    """Solve the configured (optionally deformed) family on the grid"""
    family = build_family(config)
    m_values = family.m_grid(config.grid)
    provenance = ['factorize']
    if config.omega is not None and config.mult is not None:
        provenance.append('deform')
    return solution_to_document(family, config.grid, m_values, provenance)


def run_deform(config: RunConfig) -> Dict[str, Any]:
    return run_factorize(config)


def run_invert(config: RunConfig) -> Dict[str, Any]:
    loaded = load_solution(config.inputs[0], config.nodes)
    if loaded.family is None:
        raise ConfigurationError("invert needs a solution produced with its family recipe")
    inverse = loaded.family.inverse()
    return solution_to_document(inverse, loaded.grid, 1.0 / loaded.m_values, loaded.provenance + ['invert'])


def run_compose(config: RunConfig) -> Dict[str, Any]:
    """
    Channelwise product of two solution files

    Raises:
        ContourMismatchError: the files were produced on different contours
    """
    first, second = (load_solution(path, config.nodes) for path in config.inputs)
    if first.family is None or second.family is None:
        raise ConfigurationError("compose needs solutions produced with their family recipes")
    product = first.family * second.family
    if first.grid != second.grid:
        raise ConfigurationError("solution files use different grids",
                                 {'first': first.grid.to_document(), 'second': second.grid.to_document()})
    provenance = first.provenance + ['compose'] + second.provenance
    return solution_to_document(product, first.grid, first.m_values * second.m_values, provenance)


def run_verify(config: RunConfig) -> VerificationReport:
    if config.solution:
        loaded = load_solution(config.solution, config.nodes)
        grid = SolutionGrid(loaded.grid.rho_values, loaded.grid.v_values, loaded.m_values)
        return verify_m_values(grid, loaded.lam, config.tolerance)
    family = build_family(config)
    tolerances = dict(config.tolerances)
    if config.tolerance is not None:
        for name in ('field_equation', 'zero_curvature', 'psi_mixed_partials', 'lax', 'a_from_x'):
            tolerances.setdefault(name, config.tolerance)
    return run_verification_suite(family, config.grid, config.omegas, tolerances, config.refine)


def reference_psi(config: RunConfig, rho, v) -> Optional[np.ndarray]:
    """Closed-form psi for undeformed built-in families with lambda = -1"""
    if config.preset is None or config.mult is not None:
        return None
    params = config.params
    if int(params.get('lambda', -1)) != -1:
        return None
    if config.preset == 'pulse':
        return pulse_psi(float(params.get('a', 1.0)), float(params.get('b', 1.0)), rho, v)
    if config.preset == 'einstein_rosen':
        return einstein_rosen_psi(float(params.get('k', 1.0)), float(params.get('a', 1.0)),
                                  float(params.get('b', 1.0)), rho, v)
    return None


def run_metric(config: RunConfig) -> Tuple[MetricData, Dict[str, Any]]:
    """
    Delta, B~, psi on the grid

    psi is anchored at the first grid node, to the closed form when the
    preset has one and to zero otherwise.
    """
    family = build_family(config)
    grid = SolutionGrid.solve(family, config.grid)
    a = compute_a(grid, 'analytic')
    base = WeylPoint(float(grid.rho[0]), float(grid.v[0]))
    reference = reference_psi(config, grid.rho[:, None], grid.v[None, :])
    constant = float(reference[0, 0]) if reference is not None else 0.0
    data = metric_data(grid.m_values, a, grid.rho, grid.v, family.lam, base, constant,
                       config.sigma, config.epsilon)

    summary = data.summary()
    summary['psi_anchor'] = {'rho': base.rho, 'v': base.v, 'value': constant}
    if reference is not None:
        mask = data.real_mask
        deviation = np.abs(data.psi.real - reference)[mask]
        summary['psi_reference_deviation'] = float(deviation.max()) if deviation.size else None
    if config.line_element:
        if config.preset != 'kasner':
            raise ConfigurationError("--line-element is available for the kasner preset")
        summary['kasner'] = kasner_line_element(abs(config.mult) if config.mult else 1)
    return data, summary


def run_current(config: RunConfig) -> Dict[str, Any]:
    family = build_family(config)
    if config.current_omega is not None:
        omega = parse_complex(config.current_omega, 'current_omega')
    else:
        omega = resolve_omega(config)
    current = kac_moody_current(family, config.grid, omega)
    conservation = current_conservation_residual(current)
    document = current.to_dict()
    # nested one-sided stencils at the edges; report the interior
    interior = conservation[2:-2, 2:-2] if min(conservation.shape) > 4 else conservation
    document['max_conservation_residual'] = float(np.max(interior))
    if config.preset == 'kasner' and config.mult and int(config.params.get('N', 2)) == 2 * config.mult:
        closed = kasner_current_closed_form(config.mult, current)
        document['closed_form_deviation'] = float(max(np.max(np.abs(current.j_rho - closed.j_rho)),
                                                      np.max(np.abs(current.j_v - closed.j_v))))
    return document


EXAMPLE_TEMPLATE = Template("""Kasner walk-through at rho = {{ rho }}, v = {{ v }}, a = {{ a }}
roots of omega = a: tau_a = {{ '%.12g'|format(tau_a) }}, tau_a~ = {{ '%.12g'|format(tau_a_tilde) }}
{% for row in contours %}

contour {{ row.name }} ({{ 'admissible' if row.admissible else 'NOT admissible' }})
  outside root {{ '%.12g'|format(row.outside_root) }}
  M_a rational   {{ '%.15g'|format(row.rational) }}
  M_a quadrature {{ '%.15g'|format(row.quadrature) }}
  M_a closed     {{ '%.15g'|format(row.closed_form) }}
  deformed (n = {{ n }}) {{ '%.15g'|format(row.deformed) }} vs (rho/2)^{{ 2 * n }} = {{ '%.15g'|format(row.deformed_closed) }}
{% endfor %}

Kasner exponents for n = {{ n }}: p1 = {{ exponents.p1 }}, p2 = {{ exponents.p2 }}, p3 = {{ exponents.p3 }}
""", trim_blocks=True)


def example(n_power: int = 4, n: int = 2, node_count: Optional[int] = None) -> Dict[str, Any]:
    """
    Kasner data on both deformed contours: roots, canonical M_a from the
    rational and quadrature backends against the closed form, and the
    n-fold deformation
    """
    point = EXAMPLE_POINT
    pair = spectral_roots(EXAMPLE_A, point, Lambda.MINUS)
    monodromy = parse_monodromy(kasner_document(EXAMPLE_A, n_power))
    rows = []
    for name in ('tau-a-inside', 'tau-a-tilde-inside'):
        contour = named_contour(name, Lambda.MINUS, node_count)
        outside = pair.phi if contour.locate(pair.phi) is PointLocation.OUTSIDE else pair.phi_tilde
        rational = canonical_solve(monodromy, point, contour, Backend.RATIONAL_ZERO_POLE)
        quadrature = canonical_solve(monodromy, point, contour, Backend.QUADRATURE)
        deformed = deform(rational, DeformationSpec.single(2, 0, EXAMPLE_A, n))
        rows.append({
            'name': name,
            'admissible': bool(is_admissible(contour)),
            'outside_root': outside.real,
            'rational': rational.m_matrix[0].real,
            'quadrature': quadrature.m_matrix[0].real,
            'closed_form': kasner_m(EXAMPLE_A, n_power, point, outside).real,
            'deformed': deformed.m_matrix[0].real,
            'deformed_closed': kasner_deformed_m(n, point),
        })
    exponents = kasner_exponents(n)
    return {
        'rho': point.rho,
        'v': point.v,
        'a': EXAMPLE_A,
        'N': n_power,
        'n': n,
        'tau_a': pair.phi.real,
        'tau_a_tilde': pair.phi_tilde.real,
        'contours': rows,
        'exponents': exponents.to_dict(),
    }


def render_example(document: Dict[str, Any]) -> str:
    return EXAMPLE_TEMPLATE.render(**document)

