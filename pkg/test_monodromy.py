"""
Monodromy documents, channel algebra and composition with the spectral map
"""
import json

import numpy as np
import pytest

from riemann_hilbert.contour import Lambda
from riemann_hilbert.spectral import WeylPoint
from solutions.monodromy import (
    CosTerm,
    ExpSum,
    MonomialPower,
    compose_on_contour,
    evaluate_channel,
    parse_monodromy,
    singularity_roots,
    symmetry_residual,
)
from solutions.presets import (
    constant_document,
    einstein_rosen_document,
    kasner_document,
    preset_document,
    pulse_document,
)
from utils.errors import ConfigurationError, EvaluationError, InadmissibleContourError, MonodromyParseError


def test_einstein_rosen_channels_are_reciprocal():
    monodromy = parse_monodromy(einstein_rosen_document(2.0, 0.5, 1.0))
    omega = np.linspace(-3.0, 3.0, 13) + 0.2j
    values = monodromy.evaluate(omega)
    expected = np.exp(4.0 * np.exp(-1.0) * np.cos(2.0 * omega))
    assert np.allclose(values[0], expected, rtol=1e-14)
    assert monodromy.is_unimodular_pair(omega)
    assert monodromy.name == 'einstein_rosen'


def test_parse_from_json_and_yaml_text():
    document = pulse_document(1.0, 2.0)
    from_json = parse_monodromy(json.dumps(document))
    from_yaml = parse_monodromy("""
lambda: -1
channels:
  - kind: exp_sum
    strip: 1.0
    terms: [{type: inv_quad, c: 8.0, a: 1.0}]
  - kind: exp_sum
    strip: 1.0
    terms: [{type: inv_quad, c: -8.0, a: 1.0}]
""")
    omega = np.array([0.3, -0.7 + 0.4j])
    assert np.allclose(from_json.evaluate(omega), from_yaml.evaluate(omega))


def test_preset_key_expands_through_the_registry():
    monodromy = parse_monodromy({'preset': 'kasner', 'a': 2.0, 'N': 3})
    assert monodromy.channels[0] == MonomialPower(2.0, 3)
    assert monodromy.channels[1] == MonomialPower(2.0, -3)


def test_document_round_trip():
    monodromy = parse_monodromy(einstein_rosen_document(1.0, 1.0, 0.5))
    assert parse_monodromy(monodromy.to_document()) == monodromy


@pytest.mark.parametrize('document, path', [
    ({'channels': []}, '$.channels'),
    ({'channels': [{'kind': 'exp_sum', 'terms': [{'type': 'cos', 'c': 1.0}]}]}, '$.channels[0].terms[0]'),
    ({'channels': [{'kind': 'exp_sum', 'terms': [{'type': 'power', 'c': 1.0, 'p': 12}]}]},
     '$.channels[0].terms[0].p'),
    ({'channels': [{'kind': 'monomial', 'a': 1.0, 'N': 1.5}]}, '$.channels[0].N'),
    ({'channels': [{'kind': 'spline'}]}, '$.channels[0].kind'),
    ({'lambda': 0, 'channels': [{'kind': 'monomial', 'a': 1.0, 'N': 1}]}, '$.lambda'),
])
def test_parse_errors_carry_the_path(document, path):
    with pytest.raises(MonodromyParseError) as error:
        parse_monodromy(document)
    assert error.value.path == path
    assert error.value.exit_code == 2


def test_strip_wider_than_inv_quad_pole_rejected():
    document = pulse_document(1.0, 1.0)
    document['channels'][0]['strip'] = 2.0
    with pytest.raises(MonodromyParseError):
        parse_monodromy(document)


def test_unknown_preset():
    with pytest.raises(ConfigurationError):
        preset_document('schwarzschild')


def test_inverse_and_product():
    monodromy = parse_monodromy(einstein_rosen_document(1.0, 1.0, 1.0))
    other = parse_monodromy(constant_document(3.0))
    omega = np.array([0.1, 1.3 - 0.2j])
    assert np.allclose(monodromy.inverse().evaluate(omega) * monodromy.evaluate(omega), 1.0)
    assert np.allclose((monodromy * other).evaluate(omega), monodromy.evaluate(omega) * other.evaluate(omega))


def test_product_needs_matching_lambda():
    with pytest.raises(ConfigurationError):
        parse_monodromy(constant_document(2.0, -1)) * parse_monodromy(constant_document(2.0, 1))


def test_pole_evaluation_raises():
    with pytest.raises(EvaluationError):
        evaluate_channel(MonomialPower(1.0, -2), np.array([1.0]))


def test_exp_sum_log_derivative():
    channel = ExpSum((CosTerm(2.0, 1.5, 0.0),))
    omega = np.array([0.4 + 0.1j])
    h = 1e-6
    numeric = (np.log(channel.evaluate(omega + h)) - np.log(channel.evaluate(omega - h))) / (2 * h)
    assert np.allclose(channel.log_derivative(omega), numeric, atol=1e-7)


def test_compose_on_contour_samples_every_channel(circle, example_point):
    monodromy = parse_monodromy(einstein_rosen_document(1.0, 1.0, 1.0))
    samples = compose_on_contour(monodromy, example_point, circle)
    assert len(samples) == 2
    assert np.allclose(samples[0].values * samples[1].values, 1.0)
    assert symmetry_residual(monodromy, example_point, circle) < 1e-12


def test_kasner_singularity_on_the_unit_circle_is_inadmissible(circle):
    # omega = a with |a - v| < rho puts both roots on the unit circle
    monodromy = parse_monodromy(kasner_document(0.5, 2))
    with pytest.raises(InadmissibleContourError):
        compose_on_contour(monodromy, WeylPoint(1.0, 0.0), circle)


def test_singularity_roots_are_located(tau_a_inside, kasner_monodromy, example_point):
    located = singularity_roots(kasner_monodromy, example_point, tau_a_inside)
    taus = sorted(round(entry['tau'].real, 12) for entry in located if entry['channel'] == 0)
    assert taus == [0.625, 1.6]


def test_pulse_leaves_its_strip(tau_a_inside, example_point):
    with pytest.raises(InadmissibleContourError):
        compose_on_contour(parse_monodromy(pulse_document(0.1, 1.0)), example_point, tau_a_inside)


def test_lambda_mismatch_between_monodromy_and_contour(circle):
    monodromy = parse_monodromy(einstein_rosen_document(1.0, 1.0, 1.0, lam=1))
    assert monodromy.lam is Lambda.PLUS
    with pytest.raises(ConfigurationError):
        compose_on_contour(monodromy, WeylPoint(1.0, 0.0), circle)
