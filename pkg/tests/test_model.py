from dataclasses import replace
import math
import numpy as np
import pytest
from viskv.core import (
    Coefficients, DomainError, FieldGrid, GridMismatchError, MUSCLE_SAMPLE, MusclePhysical, StabilityInput,
    ValidationError, derive_coefficients, poincare_constant_interval, time_grid, validate_coefficients
)


UNIT = Coefficients(c1=1.0, c2=0.1, d1=1.0, d2=0.1, tau=1.0)


def test_validate_accepts_unit_coefficients():
    assert validate_coefficients(UNIT).ok


@pytest.mark.parametrize('changes, field', [
    ({'c1': 0.0}, 'c1'),
    ({'d1': -1.0}, 'd1'),
    ({'tau': 0.0}, 'tau'),
    ({'c2': 0.0}, 'c2'),
    ({'d2': 0.0}, 'd2'),
    ({'d1': math.nan}, 'd1'),
])
def test_validate_names_the_offending_field(changes, field):
    values = dict(c1=1.0, c2=0.1, d1=1.0, d2=0.1, tau=1.0)
    values.update(changes)
    result = validate_coefficients(Coefficients(**values))
    assert not result.ok
    assert result.fields == [field]


def test_zero_delay_terms_allowed_on_request():
    c = Coefficients(c1=1.0, c2=0.0, d1=1.0, d2=0.0, tau=1.0)
    assert not validate_coefficients(c).ok
    assert validate_coefficients(c, allow_zero_delay_terms=True).ok


def test_summed_coefficients():
    assert UNIT.summed() == (1.1, 1.1)


def test_derive_coefficients_for_muscle_sample():
    c = derive_coefficients(MUSCLE_SAMPLE)
    assert c.c1 == pytest.approx(2.0e4 / 1.06e3)
    assert c.d1 == pytest.approx(2.0e7 / 1.06e3)
    assert c.c2 == 0.0
    assert c.d2 == 0.0
    assert c.tau == pytest.approx(1000.0)


def test_derive_coefficients_scales_delayed_terms_by_epsilon():
    p = MusclePhysical(L=1.0, rho=2.0, E=4.0, eta=8.0, epsilon=0.2, f=1.0)
    c = derive_coefficients(p)
    assert p.tau == 2.0
    assert c.c2 == pytest.approx(0.2 * c.c1)
    assert c.d2 == pytest.approx(0.2 * c.d1)


def test_derive_coefficients_for_muscle_sample_with_delay():
    c = derive_coefficients(replace(MUSCLE_SAMPLE, epsilon=0.1))
    assert c.c1 == pytest.approx(18.868, rel=1e-4)
    assert c.d1 == pytest.approx(18867.9, rel=1e-5)
    assert c.c2 == pytest.approx(0.1 * c.c1, rel=1e-15)
    assert c.d2 == pytest.approx(0.1 * c.d1, rel=1e-15)
    assert c.tau == pytest.approx(1000.0)


@pytest.mark.parametrize('s', [0.25, 2.0, 1024.0])
def test_derive_coefficients_is_homogeneous(s):
    p = MusclePhysical(L=1.0, rho=1.06e3, E=2.0e4, eta=2.0e7, epsilon=0.3, f=1.0)
    base = derive_coefficients(p)
    scaled = derive_coefficients(replace(p, E=s * p.E, eta=s * p.eta, tau=None))
    assert scaled.c1 == s * base.c1
    assert scaled.c2 == s * base.c2
    assert scaled.d1 == s * base.d1
    assert scaled.d2 == s * base.d2
    assert scaled.tau == base.tau


def test_explicit_tau_wins():
    p = MusclePhysical(L=1.0, rho=1.0, E=1.0, eta=1.0, epsilon=0.1, f=1.0, tau=0.25)
    assert derive_coefficients(p).tau == 0.25


def test_invalid_physical_constants_raise():
    p = MusclePhysical(L=1.0, rho=1.0, E=0.0, eta=1.0, epsilon=0.1, f=1.0)
    result = p.validate()
    assert 'E' in result.fields
    assert 'tau' in result.fields
    with pytest.raises(ValidationError):
        derive_coefficients(p)


def test_poincare_constant():
    assert poincare_constant_interval(1.0) == pytest.approx(4 / math.pi ** 2)
    assert poincare_constant_interval(2.0) == pytest.approx(16 / math.pi ** 2)
    with pytest.raises(DomainError):
        poincare_constant_interval(0.0)


def test_poincare_constant_matches_first_eigenvalue():
    rng = np.random.default_rng(7)
    for L in rng.uniform(1e-3, 1e3, size=10):
        assert poincare_constant_interval(L) * math.pi ** 2 / (4 * L ** 2) == pytest.approx(1.0, rel=1e-14)


def test_stability_input_needs_positive_cp():
    with pytest.raises(DomainError):
        StabilityInput(UNIT, 0.0)


def test_time_grid_is_delay_aligned():
    t = time_grid(1.0, 10, 2)
    assert len(t) == 31
    assert t[0] == -1.0
    assert t[10] == 0.0
    assert t[-1] == 2.0


def test_field_grid_shape_is_checked():
    x = np.linspace(0, 1, 5)
    t = np.linspace(0, 1, 3)
    with pytest.raises(GridMismatchError):
        FieldGrid(x, t, np.zeros((3, 4)))
    with pytest.raises(GridMismatchError):
        FieldGrid(x, t, np.zeros((3, 5)), np.zeros((2, 5)))


def test_field_grid_since():
    x = np.linspace(0, 1, 3)
    t = (np.arange(21) - 10) * 0.1
    field = FieldGrid(x, t, np.outer(t, x), np.zeros((21, 3)))
    later = field.since(0.0)
    assert len(later.t_nodes) == 11
    assert later.t_nodes[0] == 0.0
    assert later.velocities.shape == (11, 3)
