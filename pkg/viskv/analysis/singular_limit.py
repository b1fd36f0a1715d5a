"""
Convergence of the delayed rod to the instantaneous Kelvin-Voigt rod with
coefficients (c1 + c2, d1 + d2) as the delay shrinks.
"""
from dataclasses import dataclass, replace
from functools import partial
import logging
import math
from typing import List, Optional, Sequence
import numpy as np
from viskv.core import Coefficients, ConfigError, FieldGrid, ViskvError
from viskv.runner import map_ordered
from viskv.solvers import ErrorReport, FdConfig, InitialData, compare_fields, solve_fd_delayed, solve_fd_instantaneous


@dataclass(frozen=True)
class PinningCheck:
    """Largest-tau run repeated at the smallest step; bounds the scheme error"""
    tau: float
    scheme_error: float
    ratio: float


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    taus: np.ndarray
    errors: np.ndarray
    slope: float
    intercept: float
    reports: List[ErrorReport]
    pinning: Optional[PinningCheck] = None

    @property
    def constant(self) -> float:
        """Fitted C in e(tau) ~ C tau^slope"""
        return math.exp(self.intercept)


def dyadic_taus(tau0: float, levels: int) -> List[float]:
    if not tau0 > 0:
        raise ConfigError(f'tau0 must be positive, got {tau0}')
    if levels < 2:
        raise ConfigError(f'need at least 2 levels, got {levels}')
    return [tau0 / 2 ** i for i in range(levels)]


def _delayed_error(tau: float, coeffs: Coefficients, ic: InitialData, cfg: FdConfig,
                   reference: FieldGrid) -> ErrorReport:
    logging.debug(f'singular limit: tau = {tau}')
    try:
        delayed = solve_fd_delayed(replace(coeffs, tau=tau), ic, cfg)
        return compare_fields(delayed, reference)
    except ViskvError as e:
        raise type(e)(f'tau = {tau}: {e}') from e


def _fit_slope(taus: np.ndarray, errors: np.ndarray):
    if np.any(errors <= 0):
        return math.nan, math.nan
    slope, intercept = np.polyfit(np.log(taus), np.log(errors), 1)
    return float(slope), float(intercept)


def _pinning(coeffs: Coefficients, ic: InitialData, cfg: FdConfig, tau_max: float, tau_min: float,
             coarse: FieldGrid, e_min: float) -> PinningCheck:
    ratio = tau_max / tau_min
    refine = int(round(ratio))
    if abs(ratio - refine) > 1e-6 * ratio:
        raise ConfigError(f'tau_max / tau_min = {ratio} is not an integer, cannot pin the step')
    fine = solve_fd_delayed(replace(coeffs, tau=tau_max), ic, replace(cfg, n_per_delay=cfg.n_per_delay * refine))
    scheme_error = compare_fields(fine, coarse).sup_sq_error
    return PinningCheck(tau_max, scheme_error, scheme_error / e_min if e_min > 0 else math.inf)


def run_singular_limit(coeffs_base: Coefficients, ic: InitialData, taus: Sequence[float], cfg: FdConfig,
                       T: Optional[float] = None, workers: int = 1, pin: bool = True) -> ConvergenceReport:
    taus = [float(t) for t in taus]
    if len(taus) < 2:
        raise ConfigError('need at least two delays')
    if not all(t > 0 for t in taus) or any(b >= a for a, b in zip(taus, taus[1:])):
        raise ConfigError(f'delays must be positive and strictly decreasing: {taus}')
    if T is not None:
        cfg = replace(cfg, horizon=T)

    tau_min = taus[-1]
    logging.info(f'Singular limit sweep over {len(taus)} delays, horizon {cfg.horizon}')
    try:
        reference = solve_fd_instantaneous(coeffs_base.summed(), ic, cfg, tau=tau_min)
    except ViskvError as e:
        raise type(e)(f'instantaneous reference: {e}') from e

    fn = partial(_delayed_error, coeffs=coeffs_base, ic=ic, cfg=cfg, reference=reference)
    reports = map_ordered(fn, taus, workers)
    errors = np.array([r.sup_sq_error for r in reports])
    taus_arr = np.array(taus)
    slope, intercept = _fit_slope(taus_arr, errors)

    pinning = None
    if pin:
        try:
            coarse = solve_fd_delayed(replace(coeffs_base, tau=taus[0]), ic, cfg)
            pinning = _pinning(coeffs_base, ic, cfg, taus[0], tau_min, coarse, float(errors[-1]))
        except ViskvError as e:
            raise type(e)(f'tau = {taus[0]} (pinning): {e}') from e
        logging.info(f'Pinning: scheme error {pinning.scheme_error:.3e}, ratio {pinning.ratio:.3e}')

    return ConvergenceReport(taus_arr, errors, slope, intercept, reports, pinning)
