"""
Verification suite and its pass/fail report
"""
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from jinja2 import Environment

from config import Config
from riemann_hilbert.contour import Lambda
from solutions.families import GridSpec, SolutionFamily
from utils.logger import setup_logger
from verification.checks import (
    CheckResult,
    SolutionGrid,
    a_from_x_residual,
    compute_a,
    default_lax_omegas,
    field_equation_residual,
    lax_residual,
    normalization_and_symmetry_report,
    psi_mixed_partials_residual,
    zero_curvature_residual,
)

logger = setup_logger(__name__)

DEFAULT_TOLERANCES = {
    'field_equation': Config.CHECK_TOL,
    'zero_curvature': Config.CHECK_TOL,
    'psi_mixed_partials': Config.CHECK_TOL,
    'lax': 10.0 * Config.CHECK_TOL,
    'a_from_x': Config.CHECK_TOL,
    'normalization': Config.SYMMETRY_TOL,
}

# residuals below this are treated as rounding noise in refinement ratios
_ROUNDING_FLOOR = 1e-12

_TABLE = Environment(trim_blocks=True, lstrip_blocks=True).from_string(
    """{{ title }}
{{ '=' * title|length }}
{% for check in checks %}
{{ '%-28s'|format(check.name) }} {{ '%-5s'|format('PASS' if check.passed else 'FAIL') }} \
{{ '%.3e'|format(check.max_residual) }} (tol {{ '%.1e'|format(check.tolerance) }})\
{% if check.refinement_ratio is not none %} ratio {{ '%.1f'|format(check.refinement_ratio) }}{% endif %}

{% endfor %}
{{ passed_count }}/{{ checks|length }} checks passed
""")


@dataclass
class VerificationReport:
    """Outcome of a verification run"""
    checks: List[CheckResult]
    grid: Optional[GridSpec] = None
    family: Optional[Dict[str, Any]] = None
    created_at: str = field(default_factory=lambda: datetime.now().isoformat())

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def max_residual(self) -> float:
        return max((check.max_residual for check in self.checks), default=0.0)

    def failed_checks(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def to_dict(self) -> Dict[str, Any]:
        passed_count = sum(check.passed for check in self.checks)
        return {
            'passed': self.passed,
            'summary': {
                'total': len(self.checks),
                'passed': passed_count,
                'failed': len(self.checks) - passed_count,
                'max_residual': self.max_residual,
            },
            'checks': [check.to_dict() for check in self.checks],
            'grid': self.grid.to_document() if self.grid else None,
            'family': self.family,
            'created_at': self.created_at,
        }

    def render(self, title: str = 'Verification report') -> str:
        return _TABLE.render(title=title, checks=self.checks,
                             passed_count=sum(check.passed for check in self.checks))


def _worst(values) -> float:
    array = np.asarray(values)
    return float(np.max(array)) if array.size else 0.0


def _ratio(coarse: float, fine: float) -> Optional[float]:
    if coarse <= _ROUNDING_FLOOR or fine <= _ROUNDING_FLOOR:
        return None
    return coarse / fine


def _grid_residuals(family: SolutionFamily, spec: GridSpec, omegas: Sequence[complex]) -> Dict[str, float]:
    grid = SolutionGrid.solve(family, spec)
    a = compute_a(grid, 'analytic')
    residuals = {
        'field_equation': _worst(field_equation_residual(grid, a)),
        'zero_curvature': _worst(zero_curvature_residual(grid, a)),
        'psi_mixed_partials': _worst(psi_mixed_partials_residual(grid, a)),
    }
    a_rho_residual, a_v_residual = a_from_x_residual(family, spec, a)
    residuals['a_from_x'] = max(_worst(a_rho_residual), _worst(a_v_residual))
    for index, omega in enumerate(omegas):
        residuals[f'lax[{index}]'] = _worst(lax_residual(family, spec, omega, a))
    return residuals


def run_verification_suite(family: SolutionFamily, spec: GridSpec,
                           omegas: Optional[Sequence[complex]] = None,
                           tolerances: Optional[Dict[str, float]] = None,
                           refine: bool = False) -> VerificationReport:
    """
    Run every check on a grid

    Args:
        family: Solution family
        spec: Grid (at least five points per axis)
        omegas: Spectral parameters for the Lax check
        tolerances: Per-check overrides of DEFAULT_TOLERANCES
        refine: Repeat the grid checks at half the spacing and record ratios

    Returns:
        VerificationReport
    """
    limits = dict(DEFAULT_TOLERANCES)
    limits.update(tolerances or {})
    omegas = list(omegas) if omegas is not None else default_lax_omegas(spec)
    logger.info(f"Verification suite on grid {spec} with {len(omegas)} Lax parameters")

    coarse = _grid_residuals(family, spec, omegas)
    fine = _grid_residuals(family, spec.refined(), omegas) if refine else {}

    checks = []
    for name, value in coarse.items():
        kind, details = name, {}
        if name.startswith('lax['):
            omega = complex(omegas[int(name[4:-1])])
            kind, details = 'lax', {'omega': [omega.real, omega.imag]}
        ratio = _ratio(value, fine[name]) if name in fine else None
        checks.append(CheckResult(name, value, limits[kind], ratio, details))

    normalization = normalization_and_symmetry_report(family.solve(spec.center))
    worst = max(normalization.x0_deviation, normalization.whmt_residual, normalization.symmetry_residual,
                normalization.det_deviation)
    checks.append(CheckResult('normalization', worst, limits['normalization'],
                              details=normalization.to_dict()))

    report = VerificationReport(checks, spec, family.to_document())
    logger.info(f"Verification finished: {len(checks) - len(report.failed_checks())}/{len(checks)} passed")
    return report


def verify_m_values(grid: SolutionGrid, lam: int, tolerance: Optional[float] = None) -> VerificationReport:
    """Checks computable from exported M values alone"""
    limit = tolerance if tolerance is not None else Config.CHECK_TOL
    a = compute_a(grid, 'finite_difference')
    lam = Lambda.parse(lam)
    checks = [
        CheckResult('field_equation', _worst(field_equation_residual(grid, a, lam)), limit),
        CheckResult('zero_curvature', _worst(zero_curvature_residual(grid, a)), limit),
        CheckResult('psi_mixed_partials', _worst(psi_mixed_partials_residual(grid, a, lam)), limit),
    ]
    return VerificationReport(checks)
