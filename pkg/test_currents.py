"""
Kac-Moody currents on solution grids
"""
import numpy as np
import pytest

from solutions.factorize import DeformationSpec
from solutions.families import FactorizedFamily, GridSpec
from solutions.monodromy import parse_monodromy
from solutions.presets import kasner_document
from verification.currents import (
    current_conservation_residual,
    kac_moody_current,
    kasner_current_closed_form,
    star_d_current,
)

KASNER_A = 3.56 / 3.2
OMEGA = 0.2 + 2.0j


@pytest.fixture
def kasner_grid():
    return GridSpec.parse('0.9:1.0:9,-0.1:0.0:9')


def deformed_kasner(a, contour, n=2):
    family = FactorizedFamily(parse_monodromy(kasner_document(a, 2 * n)), contour)
    return family.deformed(DeformationSpec.single(2, 0, a, n))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_deformed_kasner_current_matches_the_closed_form(circle, kasner_grid, n):
    current = kac_moody_current(deformed_kasner(KASNER_A, circle, n), kasner_grid, OMEGA)
    closed = kasner_current_closed_form(n, current)
    assert current.j_rho.shape == (2, 9, 9)
    assert np.max(np.abs(current.j_rho - closed.j_rho)) < 1e-6
    assert np.max(np.abs(current.j_v - closed.j_v)) < 1e-6
    assert np.allclose(current.j_rho[1], -current.j_rho[0])


def test_kasner_current_does_not_depend_on_a(circle, kasner_grid):
    first = kac_moody_current(deformed_kasner(KASNER_A, circle), kasner_grid, OMEGA)
    second = kac_moody_current(deformed_kasner(1.3, circle), kasner_grid, OMEGA)
    assert np.max(np.abs(first.j_rho - second.j_rho)) < 1e-8
    assert np.max(np.abs(first.j_v - second.j_v)) < 1e-8


def test_currents_are_conserved(einstein_rosen_family, pulse_family, small_grid):
    for family in (einstein_rosen_family, pulse_family):
        current = kac_moody_current(family, small_grid, OMEGA)
        scale = max(1.0, float(np.max(np.abs(current.j_rho))))
        assert np.max(current_conservation_residual(current)) < 1e-8 * scale


def test_star_d_current_is_conserved(pulse_family, small_grid):
    current = star_d_current(pulse_family, small_grid, OMEGA)
    assert np.max(current_conservation_residual(current)) < 1e-8


def test_current_document(einstein_rosen_family, small_grid):
    document = kac_moody_current(einstein_rosen_family, small_grid, OMEGA).to_dict()
    assert document['omega'] == [0.2, 2.0]
    assert document['lambda'] == -1
    assert len(document['j_rho']) == 9 and len(document['j_rho'][0]) == 9
    assert len(document['j_v'][0][0]) == 2
