"""
Command-line front end: outputs, solution files and exit codes
"""
import json

import numpy as np
import pytest

from cli import main

GRID = '0.8:1.0:5,0.1:0.3:5'


def m_of(document):
    array = np.asarray(document['m'], dtype=float)
    return array[..., 0] + 1j * array[..., 1]


def error_of(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_factorize_writes_a_solution_document(capsys):
    assert main(['factorize', '--preset', 'einstein_rosen', '--grid', GRID]) == 0
    document = json.loads(capsys.readouterr().out)
    assert document['format'] == 'whgrav.solution/1'
    assert document['lambda'] == -1
    assert document['provenance'] == ['factorize']
    m = m_of(document)
    assert m.shape == (2, 5, 5)
    assert np.allclose(m[0] * m[1], 1.0)


def test_factorize_to_a_file(tmp_path, capsys):
    out = tmp_path / 'er.json'
    assert main(['factorize', '--preset', 'einstein_rosen', '--grid', GRID, '--out', str(out)]) == 0
    assert json.loads(out.read_text())['family']['kind'] == 'factorized'
    summary = capsys.readouterr().out
    assert 'factorized family, 2 channel(s)' in summary
    assert f'written to {out}' in summary


def test_compose_and_invert_solution_files(tmp_path, capsys):
    er, pulse = tmp_path / 'er.json', tmp_path / 'pulse.json'
    product, inverse = tmp_path / 'product.json', tmp_path / 'inverse.json'
    assert main(['factorize', '--preset', 'einstein_rosen', '--grid', GRID, '--out', str(er)]) == 0
    assert main(['factorize', '--preset', 'pulse', '--a', '3', '--grid', GRID, '--out', str(pulse)]) == 0
    assert main(['compose', str(er), str(pulse), '--out', str(product)]) == 0
    assert main(['invert', str(er), '--out', str(inverse)]) == 0
    capsys.readouterr()

    er_doc, pulse_doc = json.loads(er.read_text()), json.loads(pulse.read_text())
    product_doc, inverse_doc = json.loads(product.read_text()), json.loads(inverse.read_text())
    assert np.allclose(m_of(product_doc), m_of(er_doc) * m_of(pulse_doc))
    assert product_doc['provenance'] == ['factorize', 'compose', 'factorize']
    assert product_doc['family']['kind'] == 'product'
    assert np.allclose(m_of(inverse_doc) * m_of(er_doc), 1.0)
    assert inverse_doc['provenance'][-1] == 'invert'


def test_compose_on_different_contours_is_refused(tmp_path, capsys):
    first, second = tmp_path / 'first.json', tmp_path / 'second.json'
    assert main(['factorize', '--preset', 'einstein_rosen', '--grid', GRID, '--out', str(first)]) == 0
    assert main(['factorize', '--preset', 'einstein_rosen', '--grid', GRID, '--contour', 'tau-a-inside',
                 '--out', str(second)]) == 0
    capsys.readouterr()
    assert main(['compose', str(first), str(second)]) == 3
    assert error_of(capsys)['error'] == 'ContourMismatchError'


def test_deformed_kasner_on_the_unit_circle(capsys):
    argv = ['deform', '--preset', 'kasner', '--N', '4', '--a', '1.1125', '--omega', 'a', '--mult', '2',
            '--contour', 'circle', '--grid', '0.95:1.05:5,-0.05:0.05:5']
    assert main(argv) == 0
    document = json.loads(capsys.readouterr().out)
    rho = np.asarray(document['rho'])
    assert np.allclose(m_of(document)[0], ((rho / 2.0) ** 4)[:, None] * np.ones((1, 5)), rtol=1e-12)
    assert document['provenance'] == ['factorize', 'deform']


@pytest.mark.parametrize('argv', [
    ['factorize', '--preset', 'schwarzschild'],
    ['factorize', '--preset', 'einstein_rosen', '--grid', '0:1:5,0:1:5'],
    ['factorize', '--preset', 'einstein_rosen', '--grid', 'wide'],
    ['factorize', '--grid', GRID],
    ['factorize', '--preset', 'einstein_rosen', '--nodes', '7', '--grid', GRID],
    ['deform', '--preset', 'kasner', '--grid', GRID],
    ['factorize', '--preset', 'einstein_rosen', '--no-such-flag'],
    ['compose', 'missing-first.json', 'missing-second.json'],
    ['launch'],
])
def test_configuration_errors_exit_with_two(argv, capsys):
    assert main(argv) == 2
    error = error_of(capsys)
    assert error['exit_code'] == 2


def test_inadmissible_contour_exits_with_three(capsys):
    # |a - v| < rho puts the Kasner roots on the unit circle
    argv = ['factorize', '--preset', 'kasner', '--a', '0.5', '--N', '2', '--grid', '0.8:1.0:5,-0.1:0.1:5']
    assert main(argv) == 3
    assert error_of(capsys)['exit_code'] == 3


def test_verify_passes(capsys):
    argv = ['verify', '--preset', 'einstein_rosen', '--grid', '0.8:1.0:9,0.1:0.3:9', '--tol', '1e-4']
    assert main(argv) == 0
    report = json.loads(capsys.readouterr().out)
    assert report['passed']
    assert report['summary']['failed'] == 0


def test_verify_failure_exits_with_one(capsys):
    argv = ['verify', '--preset', 'einstein_rosen', '--grid', '0.8:1.0:9,0.1:0.3:9', '--tol', '1e-30',
            '--omegas', '0.2+2j']
    assert main(argv) == 1
    captured = capsys.readouterr()
    assert not json.loads(captured.out)['passed']
    error = json.loads(captured.err.strip().splitlines()[-1])
    assert error['exit_code'] == 1
    assert 'field_equation' in error['details']['failed_checks']


def test_verify_exported_solution(tmp_path, capsys):
    solution = tmp_path / 'er.json'
    grid = '0.8:1.0:21,0.1:0.3:21'
    assert main(['factorize', '--preset', 'einstein_rosen', '--grid', grid, '--out', str(solution)]) == 0
    report_path = tmp_path / 'report.json'
    assert main(['verify', '--solution', str(solution), '--tol', '1e-4', '--out', str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert [check['name'] for check in report['checks']] == ['field_equation', 'zero_curvature',
                                                             'psi_mixed_partials']
    assert 'PASS' in capsys.readouterr().out


def test_metric_csv(capsys):
    assert main(['metric', '--preset', 'pulse', '--a', '3', '--grid', GRID]) == 0
    lines = capsys.readouterr().out.strip().split('\n')
    assert lines[0] == 'rho,v,delta,b,psi,real'
    assert len(lines) == 26


def test_metric_summary_reports_the_closed_form_psi(tmp_path, capsys):
    out = tmp_path / 'metric.csv'
    assert main(['metric', '--preset', 'einstein_rosen', '--grid', '0.8:1.0:9,0.1:0.3:9', '--out', str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary['psi_reference_deviation'] < 1e-7
    assert out.read_text().startswith('rho,v,delta,b,psi,real\n')


def test_current_command(capsys):
    argv = ['current', '--preset', 'einstein_rosen', '--current-omega', '0.2+2i', '--grid', GRID]
    assert main(argv) == 0
    document = json.loads(capsys.readouterr().out)
    assert document['omega'] == [0.2, 2.0]
    assert document['max_conservation_residual'] < 1e-8


def test_example_walkthrough(capsys):
    assert main(['example']) == 0
    text = capsys.readouterr().out
    assert 'tau_a = 1.6' in text
    assert 'tau_a~ = 0.625' in text
    assert 'contour tau-a-inside (admissible)' in text
    assert 'contour tau-a-tilde-inside (admissible)' in text
    assert 'p1 = 2/3, p2 = -1/3, p3 = 2/3' in text
