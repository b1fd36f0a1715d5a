"""
Energy and Lyapunov functional of a solved trajectory.

With z(s) = y(t - tau s) for s in [0, 1] the natural energy is

    E(t) = 1/2 |y_t|^2 + c1/2 |y_x|^2 + tau d1/2 int |z_x|^2 ds + tau d2/2 int |z_tx|^2 ds

and the Lyapunov functional reweights it as

    F(t) = N/2 |y_t|^2 + c1 N/2 |y_x|^2 + M <y, y_t> + tau xi1/2 int |z_x|^2 ds + tau xi2/2 int |z_tx|^2 ds.
"""
from dataclasses import dataclass
import logging
import math
from typing import Optional, Tuple
import numpy as np
from viskv.core import (
    Coefficients, ConfigError, DomainError, FieldGrid, FitError, GridMismatchError, InfeasibleWeightsError,
    StabilityInput, WindowError
)
from viskv.core.utils import h1_seminorm_sq, inner, l2_norm_sq, trapezoid_weights

MIN_ENERGY = 1e-300
MIN_FIT_NODES = 8


@dataclass(frozen=True, eq=False)
class EnergyTrace:
    t_nodes: np.ndarray
    E: np.ndarray
    F: Optional[np.ndarray] = None


@dataclass(frozen=True)
class LyapunovWeights:
    N: float
    M: float
    xi1: float
    xi2: float
    eps1: float
    eps2: float
    eps3: float
    eps4: float
    eps5: float
    k1: float
    k2: float
    eps_hat: float

    @property
    def decay_constant(self) -> float:
        """C in E(t) <= C exp(-2 alpha t) E(0)"""
        return self.k2 / self.k1


@dataclass(frozen=True)
class DecayFit:
    alpha_hat: float
    c_hat: float
    r_squared: float


def equivalence_constants(N: float, M: float, xi1: float, xi2: float, s: StabilityInput) -> Tuple[float, float, float]:
    """(k1, k2, eps_hat) with k1 E <= F <= k2 E"""
    c = s.coeffs
    eps_hat = math.sqrt(s.cp / c.c1)
    lows = (N - M * eps_hat, c.c1 * N - M * s.cp / eps_hat, xi1, xi2)
    highs = (N + M * eps_hat, c.c1 * N + M * s.cp / eps_hat, xi1, xi2)
    scales = (1.0, c.c1, c.d1, c.d2)
    k1 = min(lows) / max(scales)
    k2 = max(highs) / min(scales)
    return k1, k2, eps_hat


def lyapunov_weights(s: StabilityInput, tie_break: str = 'geometric') -> LyapunovWeights:
    from .stability import check_assumption

    verdict = check_assumption(s)
    if not verdict.assumption_ok:
        raise InfeasibleWeightsError(f'decay assumption fails: {", ".join(verdict.failed())}')

    c = s.coeffs
    upper = c.d1 * (c.c1 ** 2 - 9 * c.c2 ** 2) / (9 * c.c1 * c.c2 ** 2)
    lower = max(9 * c.d2 ** 2 * c.d1 / (c.c1 * (c.d1 ** 2 - 9 * c.d2 ** 2)),
                (2 * s.cp * c.c1 + 3 * c.d1 ** 2) / (c.c1 * c.d1))
    if not lower < upper:
        raise InfeasibleWeightsError(f'empty interval for N/M: ({lower}, {upper})')

    if tie_break == 'geometric':
        ratio = math.sqrt(lower * upper)
    elif tie_break == 'arithmetic':
        ratio = 0.5 * (lower + upper)
    else:
        raise ConfigError(f'unknown tie break: {tie_break}')
    logging.debug(f'N/M interval ({lower}, {upper}), picked {ratio}')

    M = 1.0
    N = ratio * M
    xi1 = M * c.c1 / 3
    xi2 = N * c.d1 / 3
    k1, k2, eps_hat = equivalence_constants(N, M, xi1, xi2, s)
    if not k1 > 0:
        raise InfeasibleWeightsError(f'lower equivalence constant is not positive: {k1}')

    return LyapunovWeights(
        N=N,
        M=M,
        xi1=xi1,
        xi2=xi2,
        eps1=c.d1 / (3 * c.c2),
        eps2=c.d1 / (3 * c.d2),
        eps3=c.c1 / (3 * c.c2),
        eps4=c.c1 / (3 * c.d1),
        eps5=c.c1 / (3 * c.d2),
        k1=k1,
        k2=k2,
        eps_hat=eps_hat,
    )


def _delay_steps(field: FieldGrid, tau: float) -> int:
    ratio = tau / field.dt
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-6 * ratio:
        raise GridMismatchError(f'time step {field.dt} does not divide tau = {tau}')
    return n


def _history_integral(per_node: np.ndarray, n: int) -> np.ndarray:
    """int_0^1 g(t_j - tau s) ds for every j >= n, trapezoid over n + 1 samples"""
    return np.convolve(per_node, trapezoid_weights(n + 1, 1.0 / n), mode='valid')


@dataclass(frozen=True, eq=False)
class _Parts:
    t_nodes: np.ndarray
    kinetic: np.ndarray
    strain: np.ndarray
    cross: np.ndarray
    strain_history: np.ndarray
    rate_history: np.ndarray


def _energy_parts(field: FieldGrid, coeffs: Coefficients) -> _Parts:
    if field.velocities is None:
        raise ConfigError('energy needs a field with velocities')
    if coeffs.d2 < 0:
        raise DomainError(f'energy is only defined for d2 >= 0, got {coeffs.d2}')
    n = _delay_steps(field, coeffs.tau)
    if len(field.t_nodes) <= n:
        raise WindowError(f'trajectory of {len(field.t_nodes)} nodes does not cover one delay ({n} steps)')

    dx = field.dx
    strain = h1_seminorm_sq(field.values, dx)
    rate = h1_seminorm_sq(field.velocities, dx)
    return _Parts(
        t_nodes=field.t_nodes[n:],
        kinetic=l2_norm_sq(field.velocities[n:], dx),
        strain=strain[n:],
        cross=inner(field.values[n:], field.velocities[n:], dx),
        strain_history=_history_integral(strain, n),
        rate_history=_history_integral(rate, n),
    )


def _natural_energy(p: _Parts, c: Coefficients) -> np.ndarray:
    return (0.5 * p.kinetic + 0.5 * c.c1 * p.strain
            + 0.5 * c.tau * c.d1 * p.strain_history + 0.5 * c.tau * c.d2 * p.rate_history)


def compute_energy(field: FieldGrid, coeffs: Coefficients) -> EnergyTrace:
    """E on every node whose past delay window lies inside the field"""
    parts = _energy_parts(field, coeffs)
    return EnergyTrace(parts.t_nodes, _natural_energy(parts, coeffs))


def compute_lyapunov(field: FieldGrid, coeffs: Coefficients, w: LyapunovWeights) -> EnergyTrace:
    parts = _energy_parts(field, coeffs)
    c = coeffs
    F = (0.5 * w.N * parts.kinetic + 0.5 * c.c1 * w.N * parts.strain + w.M * parts.cross
         + 0.5 * c.tau * w.xi1 * parts.strain_history + 0.5 * c.tau * w.xi2 * parts.rate_history)
    return EnergyTrace(parts.t_nodes, _natural_energy(parts, c), F)


def fit_decay_rate(trace: EnergyTrace, window: Optional[Tuple[float, float]] = None) -> DecayFit:
    """Least-squares line through (t, log E); E ~ c_hat exp(-2 alpha_hat t)"""
    t, E = trace.t_nodes, trace.E
    lo, hi = (t[0], t[-1]) if window is None else window
    inside = (t >= lo) & (t <= hi)
    usable = inside & (E > MIN_ENERGY)
    dropped = int(np.count_nonzero(inside & ~usable))
    if dropped:
        logging.warning(f'Dropping {dropped} nodes with vanishing energy from the fit')
    if np.count_nonzero(usable) < MIN_FIT_NODES:
        raise FitError(f'need at least {MIN_FIT_NODES} positive energies in [{lo}, {hi}], '
                       f'got {np.count_nonzero(usable)}')

    ts = t[usable]
    logs = np.log(E[usable])
    slope, intercept = np.polyfit(ts, logs, 1)
    residual = logs - (slope * ts + intercept)
    ss_res = float(np.sum(residual ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(alpha_hat=-0.5 * float(slope), c_hat=math.exp(intercept), r_squared=r_squared)
