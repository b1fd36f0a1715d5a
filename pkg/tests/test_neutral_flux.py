from dataclasses import replace
import math
import numpy as np
import pytest
from viskv.core import ConfigError, MUSCLE_SAMPLE, MusclePhysical, SingularSystemError
from viskv.solvers import (
    BoundaryFluxTrace, FluxNormalization, ImpulseHandling, closed_form_flux, flux_source, solve_neutral_flux
)


def test_stepper_reproduces_closed_form_without_delay():
    trace = solve_neutral_flux(MUSCLE_SAMPLE, 10_000, 10, closed_form=False)
    exact = closed_form_flux(MUSCLE_SAMPLE, trace.t_nodes)
    assert np.max(np.abs(trace.psi - exact)) / np.max(np.abs(exact)) < 1e-8


def test_closed_form_used_for_zero_epsilon():
    trace = solve_neutral_flux(MUSCLE_SAMPLE, 100, 3)
    np.testing.assert_array_equal(trace.psi, closed_form_flux(MUSCLE_SAMPLE, trace.t_nodes))


def test_history_is_zero():
    p = replace(MUSCLE_SAMPLE, epsilon=0.2)
    trace = solve_neutral_flux(p, 50, 2)
    assert trace.origin == 50
    assert trace.t_nodes[trace.origin] == 0.0
    np.testing.assert_array_equal(trace.psi[:trace.origin + 1], 0.0)
    assert trace.psi_dot_0 == pytest.approx(MUSCLE_SAMPLE.f / MUSCLE_SAMPLE.eta)


def test_second_order_convergence():
    p = replace(MUSCLE_SAMPLE, epsilon=0.2)
    samples = []
    for n in (100, 200, 400, 800):
        trace = solve_neutral_flux(p, n, 1)
        samples.append(trace.psi[trace.origin + n // 2])
    diffs = np.abs(np.diff(samples))
    orders = np.log2(diffs[:-1] / diffs[1:])
    assert np.all(orders >= 1.9)


@pytest.mark.parametrize('eps', [0.1, 0.2, 0.5])
def test_flux_settles_at_static_value(eps):
    p = replace(MUSCLE_SAMPLE, epsilon=eps)
    trace = solve_neutral_flux(p, 1000, 10)
    static = p.f / (p.E * (1 + eps))
    assert trace.psi[-1] == pytest.approx(static, rel=1e-3)


@pytest.mark.parametrize('eps', [0.1, 0.2, 0.5])
def test_flux_stays_below_comparison_bound(eps):
    p = replace(MUSCLE_SAMPLE, epsilon=eps)
    trace = solve_neutral_flux(p, 1000, 10)
    assert np.max(trace.psi) <= p.f / (p.E * (1 - eps))


def test_flux_is_continuous_under_refinement():
    p = replace(MUSCLE_SAMPLE, epsilon=0.5)
    jumps = []
    for n in (100, 200, 400):
        trace = solve_neutral_flux(p, n, 3)
        jumps.append(np.max(np.abs(np.diff(trace.psi))))
    assert jumps[1] < 0.6 * jumps[0]
    assert jumps[2] < 0.6 * jumps[1]


@pytest.mark.parametrize('eps', [0.0, 0.2, 0.5])
def test_zero_traction_gives_zero_flux(eps):
    p = replace(MUSCLE_SAMPLE, epsilon=eps, f=0.0)
    trace = solve_neutral_flux(p, 50, 3, closed_form=False)
    np.testing.assert_array_equal(trace.psi, 0.0)
    np.testing.assert_array_equal(flux_source(trace).values, 0.0)


def test_literal_normalization_scales_by_density():
    traction = solve_neutral_flux(MUSCLE_SAMPLE, 100, 2)
    literal = solve_neutral_flux(MUSCLE_SAMPLE, 100, 2, FluxNormalization.LITERAL)
    np.testing.assert_allclose(literal.psi, MUSCLE_SAMPLE.rho * traction.psi, rtol=1e-12)


def test_zero_viscosity_is_singular():
    p = MusclePhysical(L=1.0, rho=1.0, E=1.0, eta=0.0, epsilon=0.1, f=1.0, tau=1.0)
    with pytest.raises(SingularSystemError):
        solve_neutral_flux(p, 100, 2)


def test_coarse_grid_rejected():
    with pytest.raises(ConfigError):
        solve_neutral_flux(MUSCLE_SAMPLE, 5, 2)


def _ramp_trace(n=10, slope=2.0):
    dt = 0.1
    t = (np.arange(3 * n + 1) - n) * dt
    psi = slope * np.maximum(t, 0.0)
    return BoundaryFluxTrace(t_nodes=t, psi=psi, dt=dt, n_per_delay=n, psi_dot_0=slope)


def test_discrete_source_carries_the_kink():
    trace = _ramp_trace()
    source = flux_source(trace)
    n0 = trace.origin
    assert source.values[n0 + 1] == pytest.approx(2.0 / 0.1)
    assert source.impulse == 0.0
    others = np.delete(source.values, n0 + 1)
    np.testing.assert_allclose(others, 0.0, atol=1e-9)


def test_analytic_source_reports_the_impulse():
    trace = _ramp_trace()
    source = flux_source(trace, ImpulseHandling.ANALYTIC)
    np.testing.assert_allclose(source.values, 0.0, atol=1e-9)
    assert source.impulse == 2.0


def test_source_needs_positive_time_nodes():
    trace = BoundaryFluxTrace(t_nodes=np.arange(12) - 10.0, psi=np.zeros(12), dt=1.0, n_per_delay=10,
                              psi_dot_0=0.0)
    with pytest.raises(ConfigError):
        flux_source(trace)


def test_closed_form_at_retardation_time():
    psi = closed_form_flux(MUSCLE_SAMPLE, np.array([MUSCLE_SAMPLE.retardation_time]))
    assert psi[0] == pytest.approx(MUSCLE_SAMPLE.f / MUSCLE_SAMPLE.E * (1 - math.exp(-1)))


@pytest.mark.parametrize('dt', [0.1, 0.05, 0.025])
def test_source_of_quadratic_flux(dt):
    n, a = 10, 3.0
    t = (np.arange(4 * n + 1) - n) * dt
    psi = a * np.maximum(t, 0.0) ** 2
    trace = BoundaryFluxTrace(t_nodes=t, psi=psi, dt=dt, n_per_delay=n, psi_dot_0=0.0)
    source = flux_source(trace)
    np.testing.assert_allclose(source.values[n + 2:], 2 * a, rtol=1e-9)
    assert source.values[n + 1] == pytest.approx(a)
