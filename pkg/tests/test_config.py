import math
import pytest
from viskv.config import CONFIG_STRUCT, Preset, Scenario, parse_config
from viskv.core import ParseError
from viskv.output import config_hash
from viskv.solvers import ForcingRow


def test_muscle_sample_defaults():
    config = parse_config('', Scenario.FLUX)
    assert config.preset is Preset.MUSCLE
    assert config.L == 5.33e-3
    assert config.rho == 1.06e3
    assert config.E == 2.0e4
    assert config.eta == 2.0e7
    assert config.f == 1.0052e4
    assert config.epsilon == 0.0
    assert config.n_per_delay == 1000
    assert config.horizon_delays == 10
    assert config.modes == 21
    c = config.coefficients()
    assert c.c1 == pytest.approx(18.8679, rel=1e-5)
    assert c.tau == pytest.approx(1000.0)


def test_muscle_preset_by_name():
    config = parse_config('preset = moravec2007\n', Scenario.ENERGY)
    assert config.preset is Preset.MUSCLE
    assert config.E == 2.0e4
    assert dict(config.effective_items())['preset'] == 'moravec2007'


def test_unit_preset():
    config = parse_config('', Scenario.ENERGY)
    assert config.preset is Preset.UNIT
    s = config.stability_input()
    assert s.cp == 1.0
    assert (s.coeffs.c1, s.coeffs.c2, s.coeffs.d1, s.coeffs.d2, s.coeffs.tau) == \
        pytest.approx((1.0, 0.1, 1.0, 0.1, 1.0))


def test_epsilon_override():
    config = parse_config('', Scenario.FLUX, ['epsilon=0.2'])
    assert config.physical().epsilon == 0.2
    c = config.coefficients()
    assert c.c2 == pytest.approx(0.2 * c.c1)
    assert c.d2 == pytest.approx(0.2 * c.d1)
    assert config.overrides == (('epsilon', '0.2'),)


def test_file_values_and_comments():
    text = '\n'.join([
        '# loaded rod',
        'scenario = simulate',
        '',
        'epsilons = 0, 0.1, 0.5  # sweep',
        'forcing_row = reference',
        'fit = yes',
    ])
    config = parse_config(text)
    assert config.scenario is Scenario.SIMULATE
    assert config.epsilons == (0.0, 0.1, 0.5)
    assert config.epsilon_list() == (0.0, 0.1, 0.5)
    assert config.forcing_row is ForcingRow.REFERENCE
    assert config.fit is True
    assert config.coefficients_at(0.5).c2 == pytest.approx(0.5 * config.coefficients_at(0.5).c1)
    assert config.file_assignments == (
        ('scenario', 'simulate'), ('epsilons', '0, 0.1, 0.5'), ('forcing_row', 'reference'), ('fit', 'yes'),
    )
    assert config.overrides == ()


def test_overrides_win_over_file():
    config = parse_config('epsilon = 0.1\n', Scenario.FLUX, ['epsilon = 0.3'])
    assert config.epsilon == 0.3


def test_explicit_coefficients():
    config = parse_config('c1 = 2\ntau = 0.5\n', Scenario.STABILITY_CHECK)
    c = config.coefficients()
    assert c.c1 == 2.0
    assert c.d1 == 1.0
    assert c.tau == 0.5


def test_unparsable_value_names_key_and_line():
    with pytest.raises(ParseError, match='line 1') as info:
        parse_config('n_per_delay = abc', Scenario.FLUX)
    assert 'n_per_delay' in str(info.value)


@pytest.mark.parametrize('text, fragment', [
    ('foo = 1', 'unknown key'),
    ('n_per_delay = 5', 'out of range'),
    ('E = 0', 'out of range'),
    ('tau = nan', 'cannot parse'),
    ('forcing_row = sideways', 'cannot parse'),
    ('mode_indices = ', 'cannot parse'),
    ('just text', 'expected'),
])
def test_invalid_lines(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_config('\n' + text, Scenario.FLUX)


def test_error_reports_line_number():
    with pytest.raises(ParseError, match='line 3'):
        parse_config('epsilon = 0.1\n\nnx = x', Scenario.ORACLE)


def test_bad_override():
    with pytest.raises(ParseError, match='<set>'):
        parse_config('', Scenario.FLUX, ['epsilon'])
    with pytest.raises(ParseError, match='<set>'):
        parse_config('', Scenario.FLUX, ['epsilon=-1'])


def test_scenario_required():
    with pytest.raises(ParseError):
        parse_config('epsilon = 0.1')


def test_effective_items_cover_every_key():
    config = parse_config('', Scenario.FLUX)
    items = dict(config.effective_items())
    assert list(items) == list(CONFIG_STRUCT.fields)
    assert items['scenario'] == 'flux'
    assert items['tau'] == '1000.0'
    assert items['epsilons'] == '0.0'
    assert float(items['cp']) == pytest.approx(4 * 5.33e-3 ** 2 / math.pi ** 2)


def test_config_hash():
    a = parse_config('', Scenario.FLUX)
    assert config_hash(a) == config_hash(parse_config('', Scenario.FLUX))
    assert config_hash(a) != config_hash(parse_config('', Scenario.FLUX, ['epsilon=0.1']))
