"""
Shared fixtures for the whgrav test suite
"""
import pytest
from hypothesis import settings

from riemann_hilbert.contour import Lambda, named_contour, unit_circle
from riemann_hilbert.spectral import WeylPoint
from solutions.families import FactorizedFamily, GridSpec
from solutions.monodromy import parse_monodromy
from solutions.presets import einstein_rosen_document, kasner_document, pulse_document

settings.register_profile('whgrav', deadline=None, max_examples=25)
settings.load_profile('whgrav')

KASNER_A = 3.56 / 3.2


@pytest.fixture
def circle():
    return unit_circle(Lambda.MINUS, 256)


@pytest.fixture
def tau_a_inside():
    return named_contour('tau-a-inside', Lambda.MINUS, 256)


@pytest.fixture
def tau_a_tilde_inside():
    return named_contour('tau-a-tilde-inside', Lambda.MINUS, 256)


@pytest.fixture
def example_point():
    return WeylPoint(1.0, 0.0)


@pytest.fixture
def kasner_monodromy():
    return parse_monodromy(kasner_document(KASNER_A, 4))


@pytest.fixture
def einstein_rosen_family(circle):
    return FactorizedFamily(parse_monodromy(einstein_rosen_document(1.0, 1.0, 1.0)), circle)


@pytest.fixture
def pulse_family(circle):
    return FactorizedFamily(parse_monodromy(pulse_document(3.0, 1.0)), circle)


@pytest.fixture
def small_grid():
    return GridSpec.parse('0.8:1.0:9,0.1:0.3:9')
