"""
Grid families, finite differences and the verification suite
"""
import numpy as np
import pytest

from riemann_hilbert.spectral import WeylPoint
from solutions.families import FactorizedFamily, GridSpec, ProductFamily
from solutions.monodromy import parse_monodromy
from solutions.presets import einstein_rosen_log_delta
from utils.errors import ConfigurationError, ContourMismatchError
from verification.checks import (
    NormalizationReport,
    SolutionGrid,
    compute_a,
    default_lax_omegas,
    field_equation_residual,
    lax_residual,
    normalization_and_symmetry_report,
    psi_mixed_partials_residual,
    zero_curvature_residual,
)
from verification.report import DEFAULT_TOLERANCES, run_verification_suite, verify_m_values
from verification.stencils import cumulative_integral, fd4_derivative


def test_grid_spec_parse_and_refine():
    grid = GridSpec.parse('0.5:1.5:11,-1:1:21')
    assert grid.shape == (11, 21)
    assert grid.h_rho == pytest.approx(0.1)
    assert grid.h_v == pytest.approx(0.1)
    assert grid.refined().shape == (21, 41)
    assert grid.center.rho == pytest.approx(1.0)
    assert grid.center.v == pytest.approx(0.0, abs=1e-12)
    assert GridSpec.from_document(grid.to_document()) == grid
    assert str(grid) == '0.5:1.5:11,-1.0:1.0:21'


@pytest.mark.parametrize('text', ['0:1:5,0:1:5', '1:2:1,0:1:5', '1:2:5', 'a:b:c,d:e:f', '2:1:5,0:1:5'])
def test_bad_grids_are_configuration_errors(text):
    with pytest.raises(ConfigurationError):
        GridSpec.parse(text)


def test_fd4_is_exact_on_quartics():
    x = np.linspace(0.0, 1.0, 11)
    f = x ** 4 - 2.0 * x ** 3 + x
    assert np.allclose(fd4_derivative(f, 0.1), 4.0 * x ** 3 - 6.0 * x ** 2 + 1.0, atol=1e-11)
    with pytest.raises(ConfigurationError):
        fd4_derivative(np.ones(4), 0.1)


def test_cumulative_integral_from_an_interior_origin():
    x = np.linspace(0.0, np.pi, 41)
    integral = cumulative_integral(np.cos(x), x[1] - x[0], origin=20)
    assert np.max(np.abs(integral - (np.sin(x) - np.sin(x[20])))) < 1e-6


def test_m_grid_layout_and_gradient(einstein_rosen_family, small_grid):
    m = einstein_rosen_family.m_grid(small_grid)
    assert m.shape == (2, 9, 9)
    expected = einstein_rosen_log_delta(1.0, 1.0, 1.0, small_grid.rho_values[:, None], small_grid.v_values[None, :])
    assert np.max(np.abs(np.log(m[0]).real - expected)) < 1e-10

    point = WeylPoint(0.9, 0.2)
    gradient = einstein_rosen_family.log_m_gradient(point)
    h = 1e-5

    def log_m(p):
        return np.log(einstein_rosen_family.solve(p).m_matrix[0])

    d_rho = (log_m(WeylPoint(0.9 + h, 0.2)) - log_m(WeylPoint(0.9 - h, 0.2))) / (2 * h)
    d_v = (log_m(WeylPoint(0.9, 0.2 + h)) - log_m(WeylPoint(0.9, 0.2 - h))) / (2 * h)
    assert abs(gradient[0, 0] - d_rho) < 1e-8
    assert abs(gradient[0, 1] - d_v) < 1e-8
    assert np.allclose(gradient[1], -gradient[0])


def test_field_equation_holds_for_einstein_rosen(einstein_rosen_family, small_grid):
    grid = SolutionGrid.solve(einstein_rosen_family, small_grid)
    analytic = compute_a(grid, 'analytic')
    finite = compute_a(grid, 'finite_difference')
    assert np.max(np.abs(analytic.a_rho - finite.a_rho)) < 1e-5
    assert np.max(np.abs(analytic.a_v - finite.a_v)) < 1e-5
    assert np.max(field_equation_residual(grid, analytic)) < 1e-6
    assert np.max(zero_curvature_residual(grid, analytic)) < 1e-6
    assert np.max(psi_mixed_partials_residual(grid, analytic)) < 1e-6


def test_broken_solution_fails_the_field_equation(small_grid):
    rho, v = np.meshgrid(small_grid.rho_values, small_grid.v_values, indexing='ij')
    # log M = rho^2 is not harmonic in the reduced sense
    m = np.stack([np.exp(rho ** 2), np.exp(-rho ** 2)])
    grid = SolutionGrid(small_grid.rho_values, small_grid.v_values, m)
    report = verify_m_values(grid, -1)
    assert not report.passed
    assert 'field_equation' in report.failed_checks()


def test_verify_exported_values():
    spec = GridSpec.parse('0.8:1.0:21,0.1:0.3:21')
    log_delta = einstein_rosen_log_delta(1.0, 1.0, 1.0, spec.rho_values[:, None], spec.v_values[None, :])
    m = np.stack([np.exp(log_delta), np.exp(-log_delta)])
    # A is differentiated twice here, so the stencil error is larger than on the analytic path
    report = verify_m_values(SolutionGrid(spec.rho_values, spec.v_values, m), -1, tolerance=1e-4)
    assert report.passed, report.render()
    assert [check.name for check in report.checks] == ['field_equation', 'zero_curvature', 'psi_mixed_partials']


def test_analytic_a_needs_the_family(small_grid):
    grid = SolutionGrid(small_grid.rho_values, small_grid.v_values, np.ones((2, 9, 9)))
    with pytest.raises(ConfigurationError):
        compute_a(grid, 'analytic')
    with pytest.raises(ConfigurationError):
        SolutionGrid(small_grid.rho_values, small_grid.v_values, np.ones((2, 8, 9)))


def test_lax_pair_holds_along_the_root(pulse_family, small_grid):
    residual = lax_residual(pulse_family, small_grid, 0.2 + 2.0j)
    assert residual.shape == (9, 9)
    assert np.max(residual) < 1e-5


def test_lax_pair_holds_for_einstein_rosen(einstein_rosen_family):
    grid = GridSpec.parse('0.8:0.9:9,0.1:0.2:9')
    omegas = default_lax_omegas(grid)
    assert len(omegas) == 5
    for omega in omegas:
        assert np.max(lax_residual(einstein_rosen_family, grid, omega)) < 1e-5


def test_kasner_gradient_near_the_contour(kasner_monodromy, tau_a_inside):
    family = FactorizedFamily(kasner_monodromy, tau_a_inside)
    point = WeylPoint(0.9, -0.1)
    # a root of omega = a sits within a few node spacings of the 256-node curve here
    assert family.gradient_contour(point).node_count > tau_a_inside.node_count
    gradient = family.log_m_gradient(point)
    h = 1e-5

    def log_m(p):
        return np.log(family.solve(p).m_matrix[0])

    d_rho = (log_m(WeylPoint(0.9 + h, -0.1)) - log_m(WeylPoint(0.9 - h, -0.1))) / (2 * h)
    d_v = (log_m(WeylPoint(0.9, -0.1 + h)) - log_m(WeylPoint(0.9, -0.1 - h))) / (2 * h)
    assert abs(gradient[0, 0] - d_rho) < 1e-7
    assert abs(gradient[0, 1] - d_v) < 1e-7


def test_full_suite_passes_for_kasner_near_the_contour(kasner_monodromy, tau_a_inside):
    family = FactorizedFamily(kasner_monodromy, tau_a_inside)
    report = run_verification_suite(family, GridSpec.parse('0.9:1.0:9,-0.1:0.0:9'))
    assert report.passed, report.render()
    lax = [check for check in report.checks if check.name.startswith('lax[')]
    assert len(lax) == 5
    assert max(check.max_residual for check in lax) < 1e-6


def test_determinant_deviation_is_flagged(circle, example_point):
    monodromy = parse_monodromy({
        'lambda': -1,
        'channels': [{'kind': 'exp_sum', 'terms': [{'type': 'power', 'c': 1.0, 'p': 0}]},
                     {'kind': 'exp_sum', 'terms': [{'type': 'power', 'c': 0.5, 'p': 0}]}],
    })
    report = normalization_and_symmetry_report(FactorizedFamily(monodromy, circle).solve(example_point))
    assert report.det_deviation > 1.0
    assert report.flags() == ['det_deviation']
    assert NormalizationReport(0.0, 0.0, 0.0, 1e-3).flags() == ['det_deviation']


def test_normalization_report(pulse_family):
    report = normalization_and_symmetry_report(pulse_family.solve(WeylPoint(0.9, 0.2)))
    assert report.x0_deviation < 1e-12
    assert report.whmt_residual < 1e-8
    assert report.symmetry_residual < 1e-12
    assert report.det_deviation < 1e-12
    assert report.flags() == []


def test_full_suite_passes_for_the_pulse(pulse_family, small_grid):
    report = run_verification_suite(pulse_family, small_grid)
    assert report.passed, report.render()
    names = [check.name for check in report.checks]
    assert names[:4] == ['field_equation', 'zero_curvature', 'psi_mixed_partials', 'a_from_x']
    assert names[-1] == 'normalization'
    assert sum(name.startswith('lax[') for name in names) == 5
    document = report.to_dict()
    assert document['summary']['failed'] == 0
    assert document['family']['kind'] == 'factorized'
    assert 'PASS' in report.render()


def test_impossible_tolerance_fails(einstein_rosen_family, small_grid):
    report = run_verification_suite(einstein_rosen_family, small_grid, omegas=[0.2 + 2.0j],
                                    tolerances={'field_equation': 1e-30})
    assert not report.passed
    assert report.failed_checks() == ['field_equation']
    assert report.to_dict()['summary']['failed'] == 1


def test_refinement_reports_ratios(einstein_rosen_family):
    grid = GridSpec.parse('0.8:0.9:6,0.1:0.2:6')
    report = run_verification_suite(einstein_rosen_family, grid, omegas=[], refine=True)
    assert report.passed, report.render()
    for name in ('field_equation', 'a_from_x'):
        check = next(check for check in report.checks if check.name == name)
        # fourth-order stencils: residuals drop about 16x per halving of h
        assert check.refinement_ratio is not None
        assert 12.0 <= check.refinement_ratio <= 20.0


def test_default_tolerances_cover_every_check():
    assert set(DEFAULT_TOLERANCES) == {'field_equation', 'zero_curvature', 'psi_mixed_partials',
                                       'lax', 'a_from_x', 'normalization'}


def test_families_on_different_contours_do_not_compose(einstein_rosen_family, tau_a_inside):
    other = FactorizedFamily(einstein_rosen_family.monodromy, tau_a_inside)
    with pytest.raises(ContourMismatchError):
        ProductFamily(einstein_rosen_family, other)


def test_product_family_adds_gradients(einstein_rosen_family, pulse_family):
    product = einstein_rosen_family * pulse_family
    point = WeylPoint(0.9, 0.2)
    assert np.allclose(product.log_m_gradient(point),
                       einstein_rosen_family.log_m_gradient(point) + pulse_family.log_m_gradient(point))
    assert np.allclose(product.solve(point).m_matrix,
                       einstein_rosen_family.solve(point).m_matrix * pulse_family.solve(point).m_matrix)
    assert np.allclose(einstein_rosen_family.inverse().log_m_gradient(point),
                       -einstein_rosen_family.log_m_gradient(point))
