"""
Spectral solver for the loaded rod.

The lifted displacement w = y - psi(t) x solves the delayed wave equation with
homogeneous mixed boundary conditions and the source -psi''(t) x. Expanding w
in the eigenfunctions of -d^2/dx^2 with w(0) = 0, w'(L) = 0 decouples it into
scalar delay oscillators

    w_k'' + d1 lam_k w_k' + c1 lam_k w_k + d2 lam_k w_k'(t - tau) + c2 lam_k w_k(t - tau) = -gamma_k psi''(t)

that are integrated with Crank-Nicolson in first-order form.
"""
from dataclasses import dataclass
from enum import Enum, unique
from functools import partial
import logging
import math
from typing import List, Optional, Sequence, Tuple
import numpy as np
from viskv.core import (
    Coefficients, ConfigError, DomainError, FieldGrid, GridMismatchError, HistoryBuffer,
    SingularSystemError, make_history_buffer
)
from viskv.runner import map_ordered
from .neutral_flux import BoundaryFluxTrace, FluxSourceTrace

POSITION_ROW = 0
VELOCITY_ROW = 1


@unique
class ForcingRow(Enum):
    VELOCITY = 'velocity'
    REFERENCE = 'reference'  # +F'' on the position row at the new node


@dataclass(frozen=True)
class ModeSpec:
    k: int
    lam: float
    L: float

    @property
    def wavenumber(self) -> float:
        return math.pi * (self.k + 0.5) / self.L

    def phi(self, x) -> np.ndarray:
        return math.sqrt(2 / self.L) * np.sin(self.wavenumber * np.asarray(x, dtype=float))

    def phi_prime(self, x) -> np.ndarray:
        return math.sqrt(2 / self.L) * self.wavenumber * np.cos(self.wavenumber * np.asarray(x, dtype=float))


def eigenpair(k: int, L: float) -> ModeSpec:
    if k < 0:
        raise DomainError(f'mode index must be non-negative, got {k}')
    if not L > 0:
        raise DomainError(f'domain length must be positive, got {L}')
    lam = math.pi ** 2 * (2 * k + 1) ** 2 / (4 * L * L)
    return ModeSpec(k=k, lam=lam, L=L)


def forcing_coefficient(k: int, L: float) -> float:
    """gamma_k = <x, phi_k>, the projection of the lifting profile"""
    if k < 0:
        raise DomainError(f'mode index must be non-negative, got {k}')
    return math.sqrt(2 / L) * (4 * L * L / math.pi ** 2) * (-1) ** k / (2 * k + 1) ** 2


@dataclass(frozen=True, eq=False)
class ModeForcingTrace:
    mode: ModeSpec
    gamma: float
    t_nodes: np.ndarray
    values: np.ndarray
    dt: float
    n_per_delay: int
    impulse: float = 0.0

    @property
    def k(self) -> int:
        return self.mode.k


def mode_forcing(mode: ModeSpec, source: FluxSourceTrace) -> ModeForcingTrace:
    gamma = forcing_coefficient(mode.k, mode.L)
    return ModeForcingTrace(mode, gamma, source.t_nodes, gamma * source.values, source.dt,
                            source.n_per_delay, gamma * source.impulse)


@dataclass(frozen=True, eq=False)
class ModeTrajectory:
    k: int
    t_nodes: np.ndarray
    w: np.ndarray
    w_dot: np.ndarray
    mode: ModeSpec


def mode_matrices(coeffs: Coefficients, lam: float) -> Tuple[np.ndarray, np.ndarray]:
    A = np.array([[0.0, 1.0],
                  [-coeffs.c1 * lam, -coeffs.d1 * lam]])
    B = np.array([[0.0, 0.0],
                  [-coeffs.c2 * lam, -coeffs.d2 * lam]])
    return A, B


class CrankNicolsonStepper:
    """
    (I - dt/2 A) x_j = (I + dt/2 A) x_{j-1} + dt/2 B (x_{j-1-N} + x_{j-N}) + dt/2 rhs e_row

    The implicit matrix is inverted once; B = None drops the delayed term.
    """

    def __init__(self, dt: float, A: np.ndarray, B: Optional[np.ndarray] = None):
        identity = np.eye(len(A))
        implicit = identity - 0.5 * dt * A
        det = np.linalg.det(implicit)
        if not np.isfinite(det) or det == 0:
            raise SingularSystemError(f'implicit Crank-Nicolson matrix is singular (det = {det})')
        self.dt = dt
        self.inverse = np.linalg.inv(implicit)
        self.explicit = identity + 0.5 * dt * A
        self.delayed = None if B is None else 0.5 * dt * np.asarray(B, dtype=float)

    def step(self, state: np.ndarray, history: Optional[HistoryBuffer] = None, rhs: float = 0.0,
             row: int = VELOCITY_ROW) -> np.ndarray:
        b = self.explicit @ state
        if self.delayed is not None:
            old, new = history.delayed_pair()
            b = b + self.delayed @ (old + new)
        b[row] += 0.5 * self.dt * rhs
        return self.inverse @ b


def step_mode_cn(state: np.ndarray, history: HistoryBuffer, dt: float, A: np.ndarray, B: np.ndarray,
                 rhs: float, row: int = VELOCITY_ROW) -> np.ndarray:
    if not math.isclose(history.dt, dt, rel_tol=1e-12):
        raise GridMismatchError(f'history step {history.dt} does not match dt = {dt}')
    return CrankNicolsonStepper(dt, A, B).step(np.asarray(state, dtype=float), history, rhs, row)


def _check_grid(k: int, forcing: ModeForcingTrace, tau: float, n_per_delay: int, horizon_delays: int):
    expected = (horizon_delays + 1) * n_per_delay + 1
    if forcing.k != k:
        raise GridMismatchError(f'forcing belongs to mode {forcing.k}, not {k}')
    if forcing.n_per_delay != n_per_delay or len(forcing.t_nodes) != expected:
        raise GridMismatchError(
            f'forcing grid has {len(forcing.t_nodes)} nodes at N = {forcing.n_per_delay}, '
            f'solver expects {expected} at N = {n_per_delay}')
    if not math.isclose(forcing.dt * n_per_delay, tau, rel_tol=1e-9):
        raise GridMismatchError(f'forcing step {forcing.dt} is not tau / {n_per_delay}')


def _march(forcing: ModeForcingTrace, stepper: CrankNicolsonStepper, tau: float, n_per_delay: int,
           row: ForcingRow, delayed: bool) -> ModeTrajectory:
    n = n_per_delay
    F = forcing.values
    states = np.zeros((len(forcing.t_nodes), 2))

    if forcing.impulse:
        if row is ForcingRow.REFERENCE:
            raise ConfigError('the reference forcing row only supports the discrete impulse')
        # The delta mass becomes a jump of the velocity at t = 0
        states[n] = (0.0, -forcing.impulse)

    history = None
    if delayed:
        history = make_history_buffer(tau, n, lambda t: np.zeros(2))
        history.set_head(states[n])

    state = states[n]
    for j in range(n + 1, len(states)):
        if row is ForcingRow.VELOCITY:
            state = stepper.step(state, history, -(F[j - 1] + F[j]), VELOCITY_ROW)
        else:
            state = stepper.step(state, history, F[j], POSITION_ROW)
        states[j] = state
        if history is not None:
            history.push(state)

    return ModeTrajectory(forcing.k, forcing.t_nodes, states[:, 0].copy(), states[:, 1].copy(), forcing.mode)


def solve_mode(k: int, coeffs: Coefficients, forcing: ModeForcingTrace, n_per_delay: int, horizon_delays: int,
               row: ForcingRow = ForcingRow.VELOCITY) -> ModeTrajectory:
    _check_grid(k, forcing, coeffs.tau, n_per_delay, horizon_delays)
    A, B = mode_matrices(coeffs, forcing.mode.lam)
    stepper = CrankNicolsonStepper(forcing.dt, A, B)
    return _march(forcing, stepper, coeffs.tau, n_per_delay, row, delayed=True)


def solve_mode_instantaneous(k: int, a: float, b: float, forcing: ModeForcingTrace, n_per_delay: int,
                             horizon_delays: int, row: ForcingRow = ForcingRow.VELOCITY) -> ModeTrajectory:
    """Kelvin-Voigt modal oscillator with stiffness a and viscosity b, no delay"""
    tau = forcing.dt * n_per_delay
    _check_grid(k, forcing, tau, n_per_delay, horizon_delays)
    A = np.array([[0.0, 1.0],
                  [-a * forcing.mode.lam, -b * forcing.mode.lam]])
    return _march(forcing, CrankNicolsonStepper(forcing.dt, A), tau, n_per_delay, row, delayed=False)


def _solve_forced(forcing: ModeForcingTrace, coeffs: Coefficients, n_per_delay: int, horizon_delays: int,
                  row: ForcingRow) -> ModeTrajectory:
    logging.debug(f'solving mode {forcing.k}')
    return solve_mode(forcing.k, coeffs, forcing, n_per_delay, horizon_delays, row)


def solve_modes(coeffs: Coefficients, L: float, source: FluxSourceTrace, mode_indices: Sequence[int],
                n_per_delay: int, horizon_delays: int, row: ForcingRow = ForcingRow.VELOCITY,
                workers: int = 1) -> List[ModeTrajectory]:
    forcings = [mode_forcing(eigenpair(k, L), source) for k in mode_indices]
    fn = partial(_solve_forced, coeffs=coeffs, n_per_delay=n_per_delay, horizon_delays=horizon_delays, row=row)
    return map_ordered(fn, forcings, workers)


def reconstruct_field(modes: Sequence[ModeTrajectory], flux: BoundaryFluxTrace, x_nodes: np.ndarray,
                      t_sel: Optional[np.ndarray] = None) -> FieldGrid:
    """y(t, x) = sum_k w_k(t) phi_k(x) + psi(t) x on the selected time nodes"""
    if len(modes) == 0:
        raise ConfigError('cannot reconstruct a field from an empty mode list')
    n_t = len(flux.t_nodes)
    for m in modes:
        if len(m.t_nodes) != n_t:
            raise GridMismatchError(f'mode {m.k} has {len(m.t_nodes)} time nodes, flux has {n_t}')

    idx = np.arange(n_t) if t_sel is None else np.asarray(t_sel, dtype=int)
    x = np.asarray(x_nodes, dtype=float)

    basis = np.stack([m.mode.phi(x) for m in modes])
    w = np.stack([m.w[idx] for m in modes], axis=1)
    w_dot = np.stack([m.w_dot[idx] for m in modes], axis=1)

    values = w @ basis + flux.psi[idx][:, None] * x[None, :]
    velocities = w_dot @ basis + flux.derivative()[idx][:, None] * x[None, :]
    return FieldGrid(x_nodes=x, t_nodes=flux.t_nodes[idx], values=values, velocities=velocities)
