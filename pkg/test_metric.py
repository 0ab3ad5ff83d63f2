"""
Metric extraction, conformal factor and Kasner exponents
"""
import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gravity.bessel import bessel_j
from gravity.metric import (
    assemble_m,
    diagonal_matrices,
    einstein_rosen_psi,
    extract_delta_b,
    integrate_psi,
    kasner_exponents,
    kasner_index_for,
    kasner_line_element,
    line_element_descriptor,
    metric_data,
    pulse_psi,
    realness_domain,
)
from riemann_hilbert.spectral import WeylPoint
from solutions.families import GridSpec
from utils.errors import (
    ConfigurationError,
    DomainError,
    NotCosetRepresentativeError,
    UnreachableExponentsError,
)
from verification.checks import OneFormA, SolutionGrid, compute_a


def einstein_rosen_a(grid: GridSpec) -> OneFormA:
    rho = grid.rho_values[:, None]
    v = grid.v_values[None, :]
    amplitude = 4.0 * math.exp(-1.0)
    f_rho = -amplitude * np.cos(v) * bessel_j(1, rho)
    f_v = -amplitude * np.sin(v) * bessel_j(0, rho)
    return OneFormA(np.stack([f_rho, -f_rho]), np.stack([f_v, -f_v]))


def pulse_a(a: float, b: float, grid: GridSpec) -> OneFormA:
    rho = grid.rho_values[:, None]
    c = a - 1j * grid.v_values[None, :]
    g = 1.0 / np.sqrt(c ** 2 + rho ** 2)
    f_rho = 4.0 * b * (-rho * g ** 3).real
    f_v = 4.0 * b * (1j * c * g ** 3).real
    return OneFormA(np.stack([f_rho, -f_rho]), np.stack([f_v, -f_v]))


def test_assemble_and_extract():
    m = assemble_m(np.array([2.0, 0.5]), np.array([0.5, -1.0]))
    assert np.allclose(np.linalg.det(m), 1.0)
    delta, b_tilde = extract_delta_b(m)
    assert np.allclose(delta, [2.0, 0.5])
    assert np.allclose(b_tilde, [0.5, -1.0])


def test_extraction_rejects_non_coset_matrices():
    with pytest.raises(NotCosetRepresentativeError):
        extract_delta_b(np.array([[2.0, 1.0], [0.0, 0.5]]))
    with pytest.raises(NotCosetRepresentativeError):
        extract_delta_b(np.diag([2.0, 2.0]))
    with pytest.raises(NotCosetRepresentativeError):
        diagonal_matrices(np.ones((3, 4)))
    with pytest.raises(DomainError):
        assemble_m(0.0, 1.0)


def test_realness_domain():
    values = np.array([[1.0, 2.0 + 1e-3j], [1.0, 0.5]])
    assert realness_domain(values).tolist() == [True, False]


@pytest.mark.parametrize('n, expected', [
    (1, (Fraction(0), Fraction(0), Fraction(1))),
    (2, (Fraction(2, 3), Fraction(-1, 3), Fraction(2, 3))),
    (3, (Fraction(6, 7), Fraction(-2, 7), Fraction(3, 7))),
])
def test_kasner_exponents(n, expected):
    exponents = kasner_exponents(n)
    assert (exponents.p1, exponents.p2, exponents.p3) == expected
    assert sum(expected) == 1
    assert sum(p * p for p in expected) == 1
    assert kasner_index_for(*expected) == n


@given(st.integers(1, 1000))
def test_kasner_exponent_identities_are_exact(n):
    exponents = kasner_exponents(n)
    p = (exponents.p1, exponents.p2, exponents.p3)
    assert all(isinstance(value, Fraction) for value in p)
    assert sum(p) == 1
    assert sum(value * value for value in p) == 1
    assert kasner_index_for(*p) == n


def test_kasner_exponents_reject_bad_indices():
    with pytest.raises(ConfigurationError):
        kasner_exponents(1.5)
    with pytest.raises(DomainError):
        kasner_exponents(0)


def test_unreachable_exponents():
    with pytest.raises(UnreachableExponentsError) as error:
        kasner_index_for(Fraction(-1, 3), Fraction(2, 3), Fraction(2, 3))
    assert error.value.exit_code == 3
    with pytest.raises(UnreachableExponentsError):
        kasner_index_for(1, 0, 0)


def test_kasner_line_element():
    descriptor = kasner_line_element(2)
    assert descriptor['delta'] == '(rho/2)**4'
    assert descriptor['exp_psi'] == 'c * rho**8'
    assert descriptor['integration_constant_exact'] == '9/16'
    assert descriptor['exponents'] == {'n': 2, 'p1': '2/3', 'p2': '-1/3', 'p3': '2/3'}
    assert kasner_line_element(2, constant=3.0)['integration_constant'] == 3.0


@pytest.mark.parametrize('sigma, epsilon, two_d, four_d_sign', [
    (1, -1, 'drho^2 - dv^2', ''),
    (-1, 1, '-drho^2 + dv^2', ''),
    (1, 1, 'drho^2 + dv^2', '-'),
])
def test_line_element_descriptor(sigma, epsilon, two_d, four_d_sign):
    descriptor = line_element_descriptor(sigma, epsilon)
    assert descriptor['lambda'] == sigma * epsilon
    assert descriptor['ds2_2d'] == two_d
    assert descriptor['ds2_4d'].startswith(f'{four_d_sign}Delta (dy + B dphi)^2')


def test_einstein_rosen_psi_integrates_the_closed_form():
    grid = GridSpec.parse('0.8:1.0:9,0.1:0.3:9')
    result = integrate_psi(einstein_rosen_a(grid), grid.rho_values, grid.v_values, -1)
    exact = einstein_rosen_psi(1.0, 1.0, 1.0, grid.rho_values[:, None], grid.v_values[None, :])
    assert np.max(np.abs(result.psi.real - (exact - exact[0, 0]))) < 1e-8
    assert result.path_residual < 1e-8


def test_pulse_psi_integrates_the_closed_form():
    grid = GridSpec.parse('0.8:1.2:21,-0.2:0.2:21')
    base = WeylPoint(1.0, 0.0)
    result = integrate_psi(pulse_a(1.0, 1.0, grid), grid.rho_values, grid.v_values, -1, base_point=base,
                           constant=float(pulse_psi(1.0, 1.0, 1.0, 0.0)))
    exact = pulse_psi(1.0, 1.0, grid.rho_values[:, None], grid.v_values[None, :])
    assert np.max(np.abs(result.psi.real - exact)) < 1e-6
    assert result.path_residual < 1e-6


def test_pulse_psi_vanishes_on_the_axis():
    assert np.allclose(pulse_psi(2.0, 1.0, 0.0, np.linspace(-3.0, 3.0, 7)), 0.0, atol=1e-15)


def test_base_point_must_be_a_node():
    grid = GridSpec.parse('0.8:1.0:9,0.1:0.3:9')
    with pytest.raises(ConfigurationError):
        integrate_psi(einstein_rosen_a(grid), grid.rho_values, grid.v_values, -1, base_point=WeylPoint(0.81, 0.1))


def test_metric_data_from_a_family(einstein_rosen_family, small_grid):
    grid = SolutionGrid.solve(einstein_rosen_family, small_grid)
    data = metric_data(grid.m_values, compute_a(grid, 'analytic'), grid.rho, grid.v, -1)
    assert data.real_mask.all()
    assert np.allclose(data.delta, 1.0 / grid.m_values[1])
    assert np.allclose(data.b_tilde, 0.0)
    exact = einstein_rosen_psi(1.0, 1.0, 1.0, grid.rho[:, None], grid.v[None, :])
    assert np.max(np.abs(data.psi.real - (exact - exact[0, 0]))) < 1e-7
    summary = data.summary()
    assert summary['grid'] == [9, 9]
    assert summary['real_fraction'] == 1.0
    assert summary['line_element']['lambda'] == -1


def test_metric_csv_layout(einstein_rosen_family, small_grid):
    grid = SolutionGrid.solve(einstein_rosen_family, small_grid)
    data = metric_data(grid.m_values, compute_a(grid, 'analytic'), grid.rho, grid.v, -1)
    text = data.to_csv()
    lines = text.split('\n')
    assert lines[0] == 'rho,v,delta,b,psi,real'
    assert len(lines) == 1 + 81 + 1 and lines[-1] == ''
    first = lines[1].split(',')
    assert float(first[0]) == small_grid.rho_min
    assert float(first[1]) == small_grid.v_min
    assert first[4] == '0'
    assert first[5] == '1'
    assert '\r' not in text
    stream = io.StringIO()
    assert data.to_csv(stream) == ''
    assert stream.getvalue() == text


def test_metric_data_needs_matching_signs(einstein_rosen_family, small_grid):
    grid = SolutionGrid.solve(einstein_rosen_family, small_grid)
    with pytest.raises(ConfigurationError):
        metric_data(grid.m_values, compute_a(grid, 'analytic'), grid.rho, grid.v, -1, sigma=1, epsilon=1)
