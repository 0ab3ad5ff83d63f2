"""
Canonical factorization backends, group operations and deformations
"""
import math

import numpy as np
import pytest

from riemann_hilbert.contour import Lambda, PointLocation, circle_contour, unit_circle
from riemann_hilbert.spectral import WeylPoint
from solutions.factorize import (
    Backend,
    DeformationSpec,
    canonical_solve,
    channel_split,
    contour_class_projections,
    deform,
    deformation_factor,
    invert_solution,
    multiply_solutions,
    partial_fraction_projection,
    select_backend,
)
from solutions.families import FactorizedFamily, GridSpec
from solutions.monodromy import parse_monodromy
from solutions.presets import (
    constant_document,
    einstein_rosen_document,
    einstein_rosen_log_delta,
    kasner_deformed_m,
    kasner_m,
    pulse_document,
    pulse_log_delta,
    pulse_log_delta_integral,
)
from utils.errors import ConfigurationError, ContourMismatchError, NoCanonicalFactorizationError
from verification.checks import normalization_and_symmetry_report

KASNER_A = 3.56 / 3.2


@pytest.mark.parametrize('contour_name, outside_root', [('tau_a_inside', 0.625), ('tau_a_tilde_inside', 1.6)])
def test_kasner_backends_agree_with_the_closed_form(request, kasner_monodromy, example_point,
                                                    contour_name, outside_root):
    contour = request.getfixturevalue(contour_name)
    assert contour.locate(outside_root) is PointLocation.OUTSIDE
    rational = canonical_solve(kasner_monodromy, example_point, contour, Backend.RATIONAL_ZERO_POLE)
    quadrature = canonical_solve(kasner_monodromy, example_point, contour, Backend.QUADRATURE)
    expected = kasner_m(KASNER_A, 4, example_point, outside_root)
    assert abs(rational.m_matrix[0] - expected) < 1e-12 * abs(expected)
    assert abs(quadrature.m_matrix[0] - rational.m_matrix[0]) < 1e-9 * abs(expected)
    assert abs(rational.m_matrix[0] * rational.m_matrix[1] - 1.0) < 1e-12


def test_kasner_closed_form_values(example_point):
    assert abs(kasner_m(KASNER_A, 4, example_point, 0.625) - 0.3125 ** 4) < 1e-15
    assert abs(kasner_m(KASNER_A, 4, example_point, 1.6) - 0.8 ** 4) < 1e-15


@pytest.mark.parametrize('contour_name', ['tau_a_inside', 'tau_a_tilde_inside'])
def test_deformed_kasner_is_independent_of_the_contour(request, kasner_monodromy, example_point, contour_name):
    contour = request.getfixturevalue(contour_name)
    solution = canonical_solve(kasner_monodromy, example_point, contour)
    deformed = deform(solution, DeformationSpec.single(2, 0, KASNER_A, 2))
    assert abs(deformed.m_matrix[0] - kasner_deformed_m(2, example_point)) < 1e-12
    assert abs(deformed.m_matrix[0] * deformed.m_matrix[1] - 1.0) < 1e-12
    assert deformed.is_meromorphic
    assert abs(deformed.x_values(np.array([0j]))[0, 0] - 1.0) < 1e-12


def test_select_backend(kasner_monodromy):
    assert select_backend(kasner_monodromy.channels[0]) is Backend.RATIONAL_ZERO_POLE
    assert select_backend(parse_monodromy(pulse_document()).channels[0]) is Backend.PARTIAL_FRACTION
    assert select_backend(parse_monodromy(einstein_rosen_document()).channels[0]) is Backend.QUADRATURE


def test_backend_aliases():
    assert Backend.parse('rational') is Backend.RATIONAL_ZERO_POLE
    assert Backend.parse('QuadratureCauchy') is Backend.QUADRATURE
    assert Backend.parse(None) is None
    with pytest.raises(ConfigurationError):
        Backend.parse('spectral')


@pytest.mark.parametrize('point', [WeylPoint(0.5, 0.2), WeylPoint(1.0, -0.4), WeylPoint(1.5, 0.3)])
def test_pulse_backends_agree_with_the_closed_form(circle, point):
    monodromy = parse_monodromy(pulse_document(1.0, 1.0))
    exact = canonical_solve(monodromy, point, circle, Backend.PARTIAL_FRACTION)
    quadrature = canonical_solve(monodromy, point, circle, Backend.QUADRATURE)
    log_delta = float(pulse_log_delta(1.0, 1.0, point.rho, point.v))
    assert abs(np.log(exact.m_matrix[0]) - log_delta) < 1e-12
    assert abs(np.log(quadrature.m_matrix[0]) - log_delta) < 1e-10
    assert abs(pulse_log_delta_integral(1.0, 1.0, point.rho, point.v) - log_delta) < 1e-9


def test_einstein_rosen_against_bessel(circle):
    monodromy = parse_monodromy(einstein_rosen_document(1.0, 1.0, 1.0))
    for point in (WeylPoint(0.3, 0.0), WeylPoint(1.2, 0.7), WeylPoint(3.0, -1.1)):
        solution = canonical_solve(monodromy, point, circle)
        expected = float(einstein_rosen_log_delta(1.0, 1.0, 1.0, point.rho, point.v))
        assert abs(np.log(solution.m_matrix[0]).real - expected) < 1e-10
        assert abs(np.log(solution.m_matrix[0]).imag) < 1e-12


def test_einstein_rosen_euclidean_signature_uses_i0():
    monodromy = parse_monodromy(einstein_rosen_document(1.0, 1.0, 1.0, lam=1))
    contour = unit_circle(Lambda.PLUS, 256)
    for point in (WeylPoint(0.5, 0.0), WeylPoint(1.5, 0.4)):
        solution = canonical_solve(monodromy, point, contour)
        expected = float(einstein_rosen_log_delta(1.0, 1.0, 1.0, point.rho, point.v, lam=1))
        assert abs(np.log(solution.m_matrix[0]).real - expected) < 1e-10
        assert abs(solution.m_matrix[0] * solution.m_matrix[1] - 1.0) < 1e-12


def test_x_is_normalized_and_rebuilds_the_monodromy(circle, example_point):
    monodromy = parse_monodromy(einstein_rosen_document(1.0, 1.0, 1.0))
    solution = canonical_solve(monodromy, example_point, circle)
    assert np.allclose(solution.x_values(np.array([0j]))[:, 0], 1.0, atol=1e-12)
    split = channel_split(solution, 0)
    nodes = circle.nodes
    rebuilt = split.minus(nodes) * solution.factors[0](nodes)
    assert np.max(np.abs(rebuilt - solution.monodromy_values(nodes)[0])) < 1e-10


def test_constant_monodromy_is_its_own_m(circle, example_point):
    solution = canonical_solve(parse_monodromy(constant_document(2.0)), example_point, circle)
    assert np.allclose(solution.m_matrix, [2.0, 0.5], atol=1e-14)
    assert np.allclose(solution.x_values(np.array([0.3, -0.5j])), 1.0, atol=1e-14)


def test_inverse_and_product_solutions(circle, example_point):
    er = canonical_solve(parse_monodromy(einstein_rosen_document(1.0, 1.0, 1.0)), example_point, circle)
    pulse = canonical_solve(parse_monodromy(pulse_document(1.0, 1.0)), example_point, circle)
    product = multiply_solutions(er, pulse)
    assert np.allclose(product.m_matrix, er.m_matrix * pulse.m_matrix)
    tau = np.array([0.2 + 0.1j, -0.4j])
    assert np.allclose(product.x_values(tau), er.x_values(tau) * pulse.x_values(tau))
    inverse = invert_solution(er)
    assert np.allclose(inverse.m_matrix * er.m_matrix, 1.0)
    assert np.allclose(inverse.x_values(tau) * er.x_values(tau), 1.0)
    assert inverse.provenance[-1] == 'invert'


def test_product_needs_the_same_contour(tau_a_inside, example_point):
    constant = parse_monodromy(constant_document(2.0))
    first = canonical_solve(constant, example_point, unit_circle(Lambda.MINUS, 256))
    second = canonical_solve(constant, example_point, tau_a_inside)
    with pytest.raises(ContourMismatchError):
        multiply_solutions(first, second)


def test_rational_split_of_the_identity_matrix(circle, example_point):
    # zero and pole of (omega - a)^N (omega - a)^-N cancel
    monodromy = parse_monodromy({
        'lambda': -1,
        'channels': [{'kind': 'product', 'factors': [{'kind': 'monomial', 'a': 3.0, 'N': 2},
                                                     {'kind': 'monomial', 'a': 3.0, 'N': -2}]}],
    })
    solution = canonical_solve(monodromy, example_point, circle)
    assert abs(solution.m_matrix[0] - 1.0) < 1e-12


def test_winding_channel_reports_its_index(example_point):
    # both roots of omega = a lie inside the radius-2 circle, so (omega - a) winds once
    monodromy = parse_monodromy({'lambda': -1, 'channels': [{'kind': 'monomial', 'a': KASNER_A, 'N': 1}]})
    wide = circle_contour(0.0, 2.0, Lambda.MINUS, 256)
    with pytest.raises(NoCanonicalFactorizationError) as error:
        canonical_solve(monodromy, example_point, wide, Backend.QUADRATURE)
    assert error.value.index == 1
    assert error.value.details['channel'] == 0


def test_deformation_factor_normalization(tau_a_inside, example_point):
    dressing = deformation_factor(KASNER_A, 2, example_point, tau_a_inside)
    assert abs(dressing.tau_out - 0.625) < 1e-12
    assert abs(dressing.tau_in - 1.6) < 1e-12
    assert abs(dressing.normalization - 2.56 ** 2) < 1e-12
    assert dressing(0.0) == 1


def test_contour_classes_cover_every_choice(example_point):
    channel = parse_monodromy(pulse_document(1.0, 1.0)).channels[0]
    classes = contour_class_projections(channel, example_point, Lambda.MINUS)
    assert len(classes) == 4
    assert len({tuple(np.round(c.outside_roots, 12)) for c in classes}) == 4
    circle_split = partial_fraction_projection(channel, example_point, unit_circle(Lambda.MINUS, 256))
    assert any(abs(c.log_m - circle_split.plus_at_zero) < 1e-12 for c in classes)
    # a class and its mirror differ only by the sign absorbed into M
    magnitudes = sorted({round(abs(c.log_m), 9) for c in classes})
    assert len(magnitudes) == 2
    assert magnitudes[0] == 0.0
    assert abs(magnitudes[1] - 2.0 * math.sqrt(2.0)) < 1e-8


def test_partial_fraction_needs_a_classification(example_point):
    channel = parse_monodromy(pulse_document(1.0, 1.0)).channels[0]
    with pytest.raises(ConfigurationError):
        partial_fraction_projection(channel, example_point)


def test_deformation_spec_document_round_trip():
    spec = DeformationSpec.single(2, 1, 0.5 + 0.25j, 3)
    assert DeformationSpec.from_document(spec.to_document()) == spec
    assert spec.channels[0][0].multiplicity == -3
    assert spec.negated().channels[1][0].multiplicity == -3
    assert math.isclose(spec.channels[1][0].omega.imag, 0.25)


def test_einstein_rosen_on_a_wide_grid(circle):
    b = 0.5 * math.e
    family = FactorizedFamily(parse_monodromy(einstein_rosen_document(1.0, 1.0, b)), circle)
    grid = GridSpec.parse('0.1:5:50,-3:3:50')
    delta = family.m_grid(grid)[0]
    expected = np.exp(einstein_rosen_log_delta(1.0, 1.0, b, grid.rho_values[:, None], grid.v_values[None, :]))
    assert np.max(np.abs(delta / expected - 1.0)) < 1e-9


@pytest.mark.parametrize('point', [WeylPoint(0.7, 0.1), WeylPoint(1.4, -0.6)])
def test_factorizing_a_product_multiplies_the_solutions(circle, point):
    first = parse_monodromy(einstein_rosen_document(1.0, 1.0, 1.0))
    second = parse_monodromy(einstein_rosen_document(2.0, 1.0, 1.0))
    joint = canonical_solve(first * second, point, circle)
    product = multiply_solutions(canonical_solve(first, point, circle), canonical_solve(second, point, circle))
    assert np.max(np.abs(joint.m_matrix / product.m_matrix - 1.0)) < 1e-12
    tau = np.array([0.0, 0.3 + 0.2j, -0.5j, 0.7])
    assert np.max(np.abs(joint.x_values(tau) / product.x_values(tau) - 1.0)) < 1e-12

    inverse = invert_solution(joint)
    assert np.max(np.abs(inverse.m_matrix * joint.m_matrix - 1.0)) < 1e-12
    assert np.max(np.abs(inverse.x_values(tau) * joint.x_values(tau) - 1.0)) < 1e-12


def test_deformation_factor_mirror_identity(tau_a_inside, example_point):
    dressing = deformation_factor(KASNER_A, 1, example_point, tau_a_inside)
    rng = np.random.default_rng(7)
    tau = rng.uniform(0.3, 3.0, 100) * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, 100))
    mirrored = dressing.ratio(-Lambda.MINUS / tau)
    # lambda = -1: (R^-1)(tau) (-lambda tau_out^2) = R(-lambda / tau)
    identity = dressing.tau_out ** 2 / dressing.ratio(tau)
    assert np.max(np.abs(identity - mirrored) / np.maximum(1.0, np.abs(mirrored))) < 1e-12


def test_deformed_solution_keeps_the_factorization_identity(kasner_monodromy, tau_a_inside, example_point):
    solution = canonical_solve(kasner_monodromy, example_point, tau_a_inside)
    deformed = deform(solution, DeformationSpec.single(2, 0, KASNER_A, 2))
    report = normalization_and_symmetry_report(deformed)
    assert report.whmt_residual < 1e-10
    assert report.x0_deviation < 1e-12
    assert report.flags() == []
