"""Experiments behind the CLI subcommands. Each writes one CSV."""
import logging
from typing import Callable, Dict, List
import numpy as np
from viskv.analysis import (
    LyapunovWeights, admissible_ratio_interval, check_stability, compute_lyapunov, dyadic_taus, epsilon_interval,
    fit_decay_rate, lyapunov_weights, region_components, region_weights, run_singular_limit, sample_region
)
from viskv.config import RunConfig, Scenario
from viskv.core import InfeasibleWeightsError, StabilityInput
from viskv.output import CsvWriter
from viskv.solvers import (
    EigenSeries, FdConfig, InitialData, compare_fields, effective_traction, eigenpair, flux_source, mode_forcing,
    random_smooth_data, reconstruct_field, solve_fd_traction, solve_fd_delayed, solve_mode_instantaneous,
    solve_modes, solve_neutral_flux
)


def _time_indices(n_total: int, origin: int, stride: int) -> np.ndarray:
    """Every stride-th node from t = 0, always ending on the last node"""
    idx = np.arange(origin, n_total, stride)
    if idx[-1] != n_total - 1:
        idx = np.append(idx, n_total - 1)
    return idx


def _traction_run(config: RunConfig, epsilon: float):
    p = config.physical_at(epsilon)
    flux = solve_neutral_flux(p, config.n_per_delay, config.horizon_delays, config.normalization)
    return p, flux, flux_source(flux, config.impulse)


def run_flux(config: RunConfig, writer: CsvWriter):
    epsilons = config.epsilon_list()
    traces = []
    for eps in epsilons:
        logging.info(f'Solving boundary flux for epsilon = {eps}')
        p, flux, _ = _traction_run(config, eps)
        traces.append(flux)
        static = effective_traction(p, config.normalization) / (p.E * (1 + eps))
        writer.add_summary(f'psi_dot_0[{eps!r}]', flux.psi_dot_0)
        writer.add_summary(f'psi_static[{eps!r}]', static)

    first = traces[0]
    idx = _time_indices(len(first.t_nodes), first.origin, config.t_stride)
    writer.write_header(['t'] + [f'psi[{eps!r}]' for eps in epsilons])
    writer.write_rows([first.t_nodes[j]] + [tr.psi[j] for tr in traces] for j in idx)


def run_modes(config: RunConfig, writer: CsvWriter):
    columns = ['epsilon', 't']
    for k in config.mode_indices:
        columns += [f'w_{k}', f'wdot_{k}', f'w_{k}_inst']
    writer.write_header(columns)

    for eps in config.epsilon_list():
        logging.info(f'Solving modes {list(config.mode_indices)} for epsilon = {eps}')
        p, flux, source = _traction_run(config, eps)
        coeffs = config.coefficients_at(eps)
        delayed = solve_modes(coeffs, p.L, source, config.mode_indices, config.n_per_delay,
                              config.horizon_delays, config.forcing_row, config.workers)
        a, b = coeffs.summed()
        instantaneous = [
            solve_mode_instantaneous(k, a, b, mode_forcing(eigenpair(k, p.L), source), config.n_per_delay,
                                     config.horizon_delays, config.forcing_row)
            for k in config.mode_indices
        ]
        idx = _time_indices(len(flux.t_nodes), flux.origin, config.t_stride)
        rows = []
        for j in idx:
            row = [eps, flux.t_nodes[j]]
            for d, i in zip(delayed, instantaneous):
                row += [d.w[j], d.w_dot[j], i.w[j]]
            rows.append(row)
        writer.write_rows(rows)


def _field_rows(eps: float, field) -> List[list]:
    rows = []
    for i, t in enumerate(field.t_nodes):
        for m, x in enumerate(field.x_nodes):
            rows.append([eps, t, x, field.values[i, m], field.velocities[i, m]])
    return rows


def run_simulate(config: RunConfig, writer: CsvWriter):
    writer.write_header(['epsilon', 't', 'x', 'y', 'y_t'])
    for eps in config.epsilon_list():
        logging.info(f'Simulating the loaded rod with {config.modes} modes, epsilon = {eps}')
        p, flux, source = _traction_run(config, eps)
        coeffs = config.coefficients_at(eps)
        modes = solve_modes(coeffs, p.L, source, range(config.modes), config.n_per_delay,
                            config.horizon_delays, config.forcing_row, config.workers)
        idx = _time_indices(len(flux.t_nodes), flux.origin, config.t_stride)
        x = np.linspace(0.0, p.L, config.x_points)
        field = reconstruct_field(modes, flux, x, idx)
        writer.write_rows(_field_rows(eps, field))
        writer.add_summary(f'tip_displacement[{eps!r}]', field.values[-1, -1])
        writer.add_summary(f'static_tip[{eps!r}]',
                           effective_traction(p, config.normalization) * p.L / (p.E * (1 + eps)))


def run_oracle(config: RunConfig, writer: CsvWriter):
    writer.write_header(['epsilon', 't', 'x', 'y', 'y_t'])
    for eps in config.epsilon_list():
        logging.info(f'Finite-difference oracle with nx = {config.nx}, epsilon = {eps}')
        p, flux, source = _traction_run(config, eps)
        coeffs = config.coefficients_at(eps)
        cfg = FdConfig(config.nx, config.n_per_delay, config.horizon_delays * p.tau, p.L)
        fd = solve_fd_traction(coeffs, flux, cfg, source).since(0.0)

        modes = solve_modes(coeffs, p.L, source, range(config.modes), config.n_per_delay,
                            config.horizon_delays, config.forcing_row, config.workers)
        spectral = reconstruct_field(modes, flux, fd.x_nodes, np.arange(flux.origin, len(flux.t_nodes)))
        report = compare_fields(fd, spectral)
        writer.add_summary(f'relative_l2_vs_modes[{eps!r}]', report.relative_l2)

        t_idx = _time_indices(len(fd.t_nodes), 0, config.t_stride)
        x_idx = np.unique(np.round(np.linspace(0, config.nx, config.x_points)).astype(int))
        rows = []
        for i in t_idx:
            for m in x_idx:
                rows.append([eps, fd.t_nodes[i], fd.x_nodes[m], fd.values[i, m], fd.velocities[i, m]])
        writer.write_rows(rows)
        writer.add_summary(f'tip_displacement[{eps!r}]', fd.values[-1, -1])


def _weights(s: StabilityInput) -> LyapunovWeights:
    try:
        return lyapunov_weights(s)
    except InfeasibleWeightsError as e:
        logging.info(f'{e}; trying the region weights')
        return region_weights(s)


def run_energy(config: RunConfig, writer: CsvWriter):
    coeffs = config.coefficients()
    weights = _weights(config.stability_input())
    rng = np.random.default_rng(config.seed)
    ic = random_smooth_data(config.L, rng, config.ic_modes)
    horizon = config.horizon_delays * coeffs.tau
    cfg = FdConfig(config.nx, config.n_per_delay, horizon, config.L)
    logging.info(f'Energy run on [0, {horizon}] with nx = {config.nx}')

    field = solve_fd_delayed(coeffs, ic, cfg)
    trace = compute_lyapunov(field, coeffs, weights)
    lower = weights.k1 * trace.E
    upper = weights.k2 * trace.E

    writer.write_header(['t', 'E', 'F', 'k1_E', 'k2_E'])
    idx = _time_indices(len(trace.t_nodes), 0, config.t_stride)
    writer.write_rows([trace.t_nodes[j], trace.E[j], trace.F[j], lower[j], upper[j]] for j in idx)

    writer.add_summary('N', weights.N)
    writer.add_summary('M', weights.M)
    writer.add_summary('k1', weights.k1)
    writer.add_summary('k2', weights.k2)
    writer.add_summary('sandwich_ok', bool(np.all((lower <= trace.F) & (trace.F <= upper))))

    if config.fit:
        fit = fit_decay_rate(trace, (config.fit_start_delays * coeffs.tau, horizon))
        writer.add_summary('alpha_hat', fit.alpha_hat)
        writer.add_summary('c_hat', fit.c_hat)
        writer.add_summary('r_squared', fit.r_squared)
        print(f'alpha_hat = {fit.alpha_hat!r}', file=writer.console)
        print(f'c_hat = {fit.c_hat!r}', file=writer.console)
        print(f'r_squared = {fit.r_squared!r}', file=writer.console)


def run_stability_check(config: RunConfig, writer: CsvWriter):
    s = config.stability_input()
    verdict = check_stability(s)
    writer.write_header(['condition', 'relation', 'lhs', 'rhs', 'satisfied'])
    writer.write_rows([c.id, c.relation, c.lhs, c.rhs, c.satisfied] for c in verdict.conditions)
    writer.add_summary('assumption_ok', verdict.assumption_ok)
    writer.add_summary('theorem_ok', verdict.theorem_ok)

    c = s.coeffs
    if c.c2 + c.d2 > 0 and c.d1 > 0:
        interval = admissible_ratio_interval(s, c.d1 / (c.c2 + c.d2))
        writer.add_summary('ratio_lo', interval.lo)
        writer.add_summary('ratio_hi', interval.hi)
    eps_range = epsilon_interval(s)
    if eps_range is not None:
        writer.add_summary('eps_lo', eps_range[0])
        writer.add_summary('eps_hi', eps_range[1])

    for cond in verdict.conditions:
        mark = 'ok' if cond.satisfied else 'FAIL'
        print(f'{cond.id:28} {cond.lhs!r:>24} {cond.relation:28} {cond.rhs!r:<24} {mark}', file=writer.console)


def run_stability_region(config: RunConfig, writer: CsvWriter):
    s = config.stability_input()
    sample = sample_region(s.coeffs.c1, s.cp, (config.c2_min, config.c2_max), (config.d1_min, config.d1_max),
                           (config.d2_min, config.d2_max), config.resolution)
    writer.write_header(['c2', 'd1', 'd2', 'assumption_ok', 'theorem_ok'])
    writer.write_rows(sample.rows())
    writer.add_summary('assumption_points', int(np.count_nonzero(sample.assumption_ok)))
    writer.add_summary('theorem_points', int(np.count_nonzero(sample.theorem_ok)))
    writer.add_summary('components', region_components(sample))


def run_singular_limit_scenario(config: RunConfig, writer: CsvWriter):
    coeffs = config.coefficients()
    ic = InitialData.constant(EigenSeries((1.0,), config.length), config.length)
    cfg = FdConfig(config.nx, config.n_per_delay, config.horizon, config.length)
    report = run_singular_limit(coeffs, ic, dyadic_taus(config.tau0, config.levels), cfg,
                                workers=config.workers, pin=config.pin)

    writer.write_header(['tau', 'error_sq'])
    writer.write_rows(zip(report.taus, report.errors))
    writer.add_summary('slope', report.slope)
    writer.add_summary('intercept', report.intercept)
    if report.pinning is not None:
        writer.add_summary('pin_tau', report.pinning.tau)
        writer.add_summary('pin_scheme_error', report.pinning.scheme_error)
        writer.add_summary('pin_ratio', report.pinning.ratio)


SCENARIOS: Dict[Scenario, Callable[[RunConfig, CsvWriter], None]] = {
    Scenario.FLUX: run_flux,
    Scenario.MODES: run_modes,
    Scenario.SIMULATE: run_simulate,
    Scenario.ORACLE: run_oracle,
    Scenario.ENERGY: run_energy,
    Scenario.STABILITY_CHECK: run_stability_check,
    Scenario.STABILITY_REGION: run_stability_region,
    Scenario.SINGULAR_LIMIT: run_singular_limit_scenario,
}


def run(config: RunConfig, output, console=None):
    """Runs the configured scenario and writes its CSV to output, human-readable results to console"""
    writer = CsvWriter(output, config, console)
    writer.write_provenance()
    SCENARIOS[config.scenario](config, writer)
    writer.close()
