"""
Boundary flux psi(t) = dy/dnu(t, L) of the loaded rod.

The traction condition at x = L is a scalar neutral delay equation

    eta psi'(t) + E psi(t) + eps E psi(t - tau) + eps eta psi'(t - tau) = f,

with psi = 0 on [-tau, 0]. It is integrated with the trapezoidal rule on the
delay-aligned grid; the delayed derivative enters through the exact increment
of psi over the delayed image of each step.
"""
from dataclasses import dataclass
from enum import Enum, unique
import logging
import numpy as np
from viskv.core import ConfigError, MusclePhysical, SingularSystemError, derive_coefficients, time_grid


@unique
class FluxNormalization(Enum):
    TRACTION = 'traction'  # eta psi' + E psi + ... = f
    LITERAL = 'literal'  # d1 psi' + c1 psi + ... = f, i.e. a traction of rho f


@unique
class ImpulseHandling(Enum):
    DISCRETE = 'discrete'
    ANALYTIC = 'analytic'


@dataclass(frozen=True, eq=False)
class BoundaryFluxTrace:
    t_nodes: np.ndarray
    psi: np.ndarray
    dt: float
    n_per_delay: int
    psi_dot_0: float

    @property
    def origin(self) -> int:
        """Index of the node t = 0"""
        return self.n_per_delay

    def scaled(self, factor: float) -> 'BoundaryFluxTrace':
        return BoundaryFluxTrace(self.t_nodes, factor * self.psi, self.dt, self.n_per_delay,
                                 factor * self.psi_dot_0)

    def derivative(self) -> np.ndarray:
        """Backward differences, zero on the history"""
        out = np.zeros_like(self.psi)
        out[1:] = np.diff(self.psi) / self.dt
        out[:self.origin + 1] = 0.0
        return out


@dataclass(frozen=True, eq=False)
class FluxSourceTrace:
    t_nodes: np.ndarray
    values: np.ndarray
    dt: float
    n_per_delay: int
    impulse: float = 0.0  # mass of the delta at t = 0 not contained in values


def effective_traction(p: MusclePhysical, normalization: FluxNormalization) -> float:
    if normalization is FluxNormalization.LITERAL:
        return p.f * p.rho
    return p.f


def closed_form_flux(p: MusclePhysical, t: np.ndarray,
                     normalization: FluxNormalization = FluxNormalization.TRACTION) -> np.ndarray:
    """psi(t) = (f/E)(1 - exp(-E t / eta)) for t >= 0, the eps = 0 solution"""
    f = effective_traction(p, normalization)
    t = np.asarray(t, dtype=float)
    return np.where(t > 0, -(f / p.E) * np.expm1(-p.E * np.maximum(t, 0.0) / p.eta), 0.0)


def solve_neutral_flux(p: MusclePhysical, n_per_delay: int, horizon_delays: int,
                       normalization: FluxNormalization = FluxNormalization.TRACTION,
                       closed_form: bool = True) -> BoundaryFluxTrace:
    if p.eta == 0:
        raise SingularSystemError('eta = 0 leaves the neutral equation without a derivative term')
    derive_coefficients(p)
    if n_per_delay < 10:
        raise ConfigError(f'n_per_delay must be at least 10, got {n_per_delay}')
    if horizon_delays < 1:
        raise ConfigError(f'horizon_delays must be at least 1, got {horizon_delays}')

    t = time_grid(p.tau, n_per_delay, horizon_delays)
    dt = p.tau / n_per_delay
    f = effective_traction(p, normalization)
    n = n_per_delay

    if p.epsilon == 0 and closed_form:
        psi = closed_form_flux(p, t, normalization)
    else:
        logging.debug(f'neutral flux: epsilon = {p.epsilon}, {len(t)} nodes')
        eps = p.epsilon
        E, eta = p.E, p.eta
        lhs = eta + 0.5 * dt * E
        keep = eta - 0.5 * dt * E
        delayed_stiff = 0.5 * dt * eps * E
        delayed_visc = eps * eta

        # Plain floats: this loop is the hot path for fine grids
        values = [0.0] * len(t)
        for j in range(n + 1, len(t)):
            old, new = values[j - 1 - n], values[j - n]
            values[j] = (dt * f + keep * values[j - 1]
                         - delayed_stiff * (old + new)
                         - delayed_visc * (new - old)) / lhs
        psi = np.array(values)

    if not np.all(np.isfinite(psi)):
        raise SingularSystemError('boundary flux became non-finite')

    # With zero history the equation at t = 0+ reads eta psi'(0+) = f
    return BoundaryFluxTrace(t_nodes=t, psi=psi, dt=dt, n_per_delay=n, psi_dot_0=f / p.eta)


def flux_source(trace: BoundaryFluxTrace,
                impulse: ImpulseHandling = ImpulseHandling.DISCRETE) -> FluxSourceTrace:
    """
    Three-point backward second difference of psi. The node right after
    t = 0 straddles the kink of psi and carries the discrete impulse
    psi'(0+)/dt; ANALYTIC replaces it by the regular value of the next node
    and reports the delta mass separately.
    """
    n0 = trace.origin
    if len(trace.psi) - n0 - 1 < 3:
        raise ConfigError('flux source needs at least 3 positive-time nodes')

    values = np.zeros_like(trace.psi)
    values[2:] = (trace.psi[2:] - 2 * trace.psi[1:-1] + trace.psi[:-2]) / trace.dt ** 2
    values[:n0 + 1] = 0.0

    mass = 0.0
    if impulse is ImpulseHandling.ANALYTIC:
        values[n0 + 1] = values[n0 + 2]
        mass = trace.psi_dot_0
    return FluxSourceTrace(trace.t_nodes, values, trace.dt, trace.n_per_delay, mass)
