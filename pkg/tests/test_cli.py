import csv
import io
import math
import pytest
from viskv.cli import CommandLineHandler, main
from viskv.core import MUSCLE_SAMPLE
from viskv.solvers import closed_form_flux

SMALL_SIMULATION = ['--set', 'n_per_delay=20', '--set', 'horizon_delays=2', '--set', 'modes=3',
                    '--set', 't_stride=5', '--set', 'x_points=5']


def _run(tmp_path, *argv, name='out.csv'):
    path = tmp_path / name
    code = CommandLineHandler([*argv, '--out', str(path)]).execute()
    return code, path


def _read(path):
    """(header, rows, summary) of a viskv CSV"""
    text = path.read_text()
    data = [line for line in text.splitlines() if not line.startswith('#')]
    summary = {}
    for line in text.splitlines():
        if line.startswith('# summary '):
            key, val = line[len('# summary '):].split(' = ', 1)
            summary[key] = val
    rows = list(csv.reader(io.StringIO('\n'.join(data))))
    return rows[0], rows[1:], summary


def test_flux_csv(tmp_path):
    code, path = _run(tmp_path, 'flux', '--set', 'n_per_delay=100', '--set', 'horizon_delays=2',
                      '--set', 't_stride=10')
    assert code == 0
    header, rows, summary = _read(path)
    assert header == ['t', 'psi[0.0]']
    assert len(rows) == 21
    t = [float(r[0]) for r in rows]
    psi = [float(r[1]) for r in rows]
    assert t[0] == 0.0
    assert t[-1] == pytest.approx(2000.0)
    for ti, p in zip(t, psi):
        assert p == pytest.approx(float(closed_form_flux(MUSCLE_SAMPLE, ti)), rel=1e-12, abs=1e-300)
    assert float(summary['psi_static[0.0]']) == pytest.approx(MUSCLE_SAMPLE.f / MUSCLE_SAMPLE.E)


def test_provenance_header(tmp_path):
    code, path = _run(tmp_path, 'flux', '--set', 'n_per_delay=100', '--set', 'horizon_delays=1')
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == '# scenario = flux'
    assert '# n_per_delay = 100' in lines
    assert '# override n_per_delay = 100' in lines
    assert any(line.startswith('# config_hash = ') for line in lines)


def test_config_file(tmp_path):
    config = tmp_path / 'run.conf'
    config.write_text('epsilon = 0.2\nn_per_delay = 100\nhorizon_delays = 2\n')
    code, path = _run(tmp_path, 'flux', '--config', str(config))
    assert code == 0
    header, rows, summary = _read(path)
    assert header == ['t', 'psi[0.2]']
    lines = path.read_text().splitlines()
    assert '# epsilon = 0.2' in lines
    assert '# override (file) epsilon = 0.2' in lines
    assert '# override (file) horizon_delays = 2' in lines


def test_repeated_runs_are_byte_identical(tmp_path):
    _, first = _run(tmp_path, 'simulate', *SMALL_SIMULATION, name='a.csv')
    _, second = _run(tmp_path, 'simulate', *SMALL_SIMULATION, name='b.csv')
    assert first.read_bytes() == second.read_bytes()


def test_parallel_run_gives_same_data(tmp_path):
    _, serial = _run(tmp_path, 'simulate', *SMALL_SIMULATION, name='serial.csv')
    _, parallel = _run(tmp_path, 'simulate', *SMALL_SIMULATION, '--set', 'workers=2', name='parallel.csv')
    assert _read(serial)[1] == _read(parallel)[1]


def test_simulated_tip_reaches_static_value(tmp_path):
    code, path = _run(tmp_path, 'simulate', '--set', 'n_per_delay=200', '--set', 'modes=5')
    assert code == 0
    header, rows, summary = _read(path)
    assert header == ['epsilon', 't', 'x', 'y', 'y_t']
    assert float(summary['tip_displacement[0.0]']) == pytest.approx(2.679e-3, rel=1e-2)


def test_stability_region_csv(tmp_path):
    code, path = _run(tmp_path, 'stability-region', '--set', 'resolution=39')
    assert code == 0
    header, rows, summary = _read(path)
    assert header == ['c2', 'd1', 'd2', 'assumption_ok', 'theorem_ok']
    assert len(rows) == 39 ** 3
    known = [r for r in rows
             if all(math.isclose(float(v), target) for v, target in zip(r[:3], (0.02, 0.2, 0.02)))]
    assert len(known) == 1
    assert known[0][4] == 'true'
    assert summary['components'] == '1'


def test_stability_check_to_stdout(capsys):
    code = CommandLineHandler(['stability-check', '--out', '-']).execute()
    assert code == 0
    captured = capsys.readouterr()
    out = captured.out
    assert '# scenario = stability-check' in out
    assert '# summary assumption_ok = true' in out
    data = [line for line in out.splitlines() if not line.startswith('#')]
    rows = list(csv.reader(data))
    assert rows[0] == ['condition', 'relation', 'lhs', 'rhs', 'satisfied']
    assert all(len(r) == 5 for r in rows)
    assert any(r[0] == 'stiffness_ratio' for r in rows)
    assert 'stiffness_ratio' in captured.err


def test_energy_fit(tmp_path, capsys):
    code, path = _run(tmp_path, 'energy', '--fit', '--set', 'nx=20', '--set', 'n_per_delay=20')
    assert code == 0
    _, rows, summary = _read(path)
    assert summary['sandwich_ok'] == 'true'
    assert float(summary['alpha_hat']) > 0
    assert 'alpha_hat = ' in capsys.readouterr().out


def test_singular_limit_csv(tmp_path):
    code, path = _run(tmp_path, 'singular-limit', '--set', 'nx=20', '--set', 'n_per_delay=20',
                      '--set', 'levels=3')
    assert code == 0
    header, rows, summary = _read(path)
    assert header == ['tau', 'error_sq']
    assert [float(r[0]) for r in rows] == [0.1, 0.05, 0.025]
    assert 'slope' in summary


def test_modes_csv(tmp_path):
    code, path = _run(tmp_path, 'modes', '--set', 'n_per_delay=20', '--set', 'horizon_delays=2',
                      '--set', 't_stride=5', '--set', 'mode_indices=0,1')
    assert code == 0
    header, rows, _ = _read(path)
    assert header == ['epsilon', 't', 'w_0', 'wdot_0', 'w_0_inst', 'w_1', 'wdot_1', 'w_1_inst']
    assert len(rows) == 9
    assert float(rows[0][1]) == 0.0
    # without delayed parts both columns solve the same modal equation
    for row in rows:
        assert float(row[2]) == pytest.approx(float(row[4]), rel=1e-12, abs=1e-300)
        assert float(row[5]) == pytest.approx(float(row[7]), rel=1e-12, abs=1e-300)
    assert any(float(row[3]) != 0.0 for row in rows)


def test_oracle_csv(tmp_path):
    code, path = _run(tmp_path, 'oracle', '--set', 'n_per_delay=20', '--set', 'horizon_delays=2',
                      '--set', 'nx=20', '--set', 'modes=3', '--set', 'x_points=5', '--set', 't_stride=10')
    assert code == 0
    header, rows, summary = _read(path)
    assert header == ['epsilon', 't', 'x', 'y', 'y_t']
    assert all(float(r[3]) == 0.0 for r in rows if float(r[1]) == 0.0)
    assert math.isfinite(float(summary['relative_l2_vs_modes[0.0]']))
    assert 'tip_displacement[0.0]' in summary


def test_configuration_error_exit_code(tmp_path):
    code, path = _run(tmp_path, 'flux', '--set', 'n_per_delay=abc')
    assert code == 2
    assert not path.exists()


def test_missing_config_file(tmp_path):
    code, _ = _run(tmp_path, 'flux', '--config', str(tmp_path / 'missing.conf'))
    assert code == 2


def test_domain_error_exit_code(tmp_path):
    code, path = _run(tmp_path, 'energy', '--set', 'c2=0.5')
    assert code == 3
    assert not path.exists()


def test_numeric_error_exit_code(tmp_path):
    code, _ = _run(tmp_path, 'energy', '--fit', '--set', 'horizon_delays=1', '--set', 'nx=20',
                   '--set', 'n_per_delay=20')
    assert code == 4


def test_main_exits_with_code(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(['stability-check', '--out', str(tmp_path / 'check.csv')])
    assert info.value.code == 0
