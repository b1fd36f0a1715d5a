"""
Finite-difference method-of-lines solver for the delayed Kelvin-Voigt rod

    y_tt = c1 y_xx + d1 y_txx + c2 y_xx(t - tau) + d2 y_txx(t - tau) + s(t, x)

on (0, L) with y(t, 0) = 0 and y_x(t, L) = 0. Space is discretised with
second-order central differences and a ghost node at x = L, time with
Crank-Nicolson on the delay-aligned grid. Delayed terms only reference
stored history, so each step is one solve with a fixed tridiagonal matrix.
"""
from dataclasses import dataclass, field
import logging
import math
from typing import Callable, Optional, Tuple
import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu
from viskv.core import (
    Coefficients, ConfigError, FieldGrid, GridMismatchError, HistoryBuffer, NumericError,
    SingularSystemError, validate_coefficients
)
from viskv.core.utils import h1_seminorm_sq, l2_norm_sq
from .modal import eigenpair
from .neutral_flux import BoundaryFluxTrace, FluxSourceTrace

Profile = Callable[[np.ndarray], np.ndarray]
History = Callable[[float, np.ndarray], np.ndarray]
Source = Callable[[float, np.ndarray], np.ndarray]

COMPATIBILITY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FdConfig:
    nx: int
    n_per_delay: int
    horizon: float
    length: float = 1.0

    def __post_init__(self):
        if self.nx < 8:
            raise ConfigError(f'nx must be at least 8, got {self.nx}')
        if self.n_per_delay < 2:
            raise ConfigError(f'n_per_delay must be at least 2, got {self.n_per_delay}')
        if not self.horizon > 0:
            raise ConfigError(f'horizon must be positive, got {self.horizon}')
        if not self.length > 0:
            raise ConfigError(f'length must be positive, got {self.length}')

    @property
    def dx(self) -> float:
        return self.length / self.nx

    def x_nodes(self) -> np.ndarray:
        """All nodes including the Dirichlet end x = 0"""
        return np.linspace(0.0, self.length, self.nx + 1)

    def dt_for(self, tau: float) -> float:
        return tau / self.n_per_delay

    def steps(self, dt: float) -> int:
        return int(math.ceil(self.horizon / dt - 1e-9))


@dataclass(frozen=True)
class EigenSeries:
    """x -> sum_k a_k phi_k(x) with the eigenfunctions of the rod"""
    amplitudes: Tuple[float, ...]
    length: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for k, a in enumerate(self.amplitudes):
            out = out + a * eigenpair(k, self.length).phi(x)
        return out


@dataclass(frozen=True)
class Ramp:
    slope: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.slope * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class LinearHistory:
    """phi(t, x) = y0(x) + t y1(x) on [-tau, 0]"""
    y0: Profile
    y1: Profile

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.y0(x) + t * self.y1(x)

    def rate(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.y1(x)


@dataclass(frozen=True)
class InitialData:
    y0: Profile
    y1: Profile
    phi: History
    phi_dot: Optional[History] = field(default=None)

    @classmethod
    def zero(cls, length: float = 1.0) -> 'InitialData':
        return cls.constant(EigenSeries((), length), length)

    @classmethod
    def constant(cls, y0: Profile, length: float = 1.0) -> 'InitialData':
        """Rest state y0 held over the whole history"""
        zero = EigenSeries((), length)
        history = LinearHistory(y0, zero)
        return cls(y0, zero, history, history.rate)


def random_smooth_data(length: float, rng: np.random.Generator, modes: int = 4) -> InitialData:
    decay = (2 * np.arange(modes) + 1.0) ** 2
    y0 = EigenSeries(tuple(float(a) for a in rng.standard_normal(modes) / decay), length)
    y1 = EigenSeries(tuple(float(a) for a in rng.standard_normal(modes) / decay), length)
    history = LinearHistory(y0, y1)
    return InitialData(y0, y1, history, history.rate)


def neumann_laplacian(nx: int, dx: float) -> sparse.csc_matrix:
    """
    Second difference on x_1..x_nx with u_0 = 0 and a ghost node mirroring
    u_{nx-1} across x = L
    """
    lower = np.ones(nx - 1)
    lower[-1] = 2.0
    main = np.full(nx, -2.0)
    upper = np.ones(nx - 1)
    return sparse.diags([lower, main, upper], [-1, 0, 1], format='csc') / (dx * dx)


def _history_samples(ic: InitialData, xi: np.ndarray, tau: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    dt = tau / n
    times = (np.arange(n + 1) - n) * dt
    ys = np.stack([np.asarray(ic.phi(t, xi), dtype=float) for t in times])
    if ic.phi_dot is not None:
        vs = np.stack([np.asarray(ic.phi_dot(t, xi), dtype=float) for t in times])
    else:
        vs = np.gradient(ys, dt, axis=0)
    return ys, vs


def _check_initial_data(ic: InitialData, x: np.ndarray):
    y0 = np.asarray(ic.y0(x), dtype=float)
    scale = max(1.0, float(np.max(np.abs(y0))))
    if abs(y0[0]) > COMPATIBILITY_TOLERANCE * scale:
        raise ConfigError(f'initial displacement violates y(0) = 0: {y0[0]}')
    gap = float(np.max(np.abs(np.asarray(ic.phi(0.0, x), dtype=float) - y0)))
    if gap > COMPATIBILITY_TOLERANCE * scale:
        raise ConfigError(f'history does not match the initial displacement at t = 0 (gap {gap})')


def _march(a: float, b: float, c2: float, d2: float, ic: InitialData, cfg: FdConfig, tau: float,
           source: Optional[Source], delayed: bool) -> FieldGrid:
    n = cfg.n_per_delay
    nx = cfg.nx
    dt = cfg.dt_for(tau)
    n_steps = cfg.steps(dt)
    x = cfg.x_nodes()
    xi = x[1:]
    _check_initial_data(ic, x)

    D = neumann_laplacian(nx, cfg.dx)
    coef = 0.5 * dt * a + b
    implicit = (sparse.identity(nx, format='csc') - 0.5 * dt * coef * D).tocsc()
    try:
        lu = splu(implicit)
    except RuntimeError as e:
        raise SingularSystemError(f'implicit finite-difference operator is singular: {e}')
    logging.debug(f'fd march: nx = {nx}, dt = {dt}, {n_steps} steps, delayed = {delayed}')

    y = np.asarray(ic.y0(xi), dtype=float)
    v = np.asarray(ic.y1(xi), dtype=float)
    first = n if delayed else 0
    values = np.zeros((first + n_steps + 1, nx + 1))
    velocities = np.zeros_like(values)

    history = None
    if delayed:
        ys, vs = _history_samples(ic, xi, tau, n)
        history = HistoryBuffer(tau, n, np.hstack([ys, vs]))
        history.set_head(np.concatenate([y, v]))
        values[:n, 1:] = ys[:n]
        velocities[:n, 1:] = vs[:n]
    values[first, 1:] = y
    velocities[first, 1:] = v

    s_prev = None if source is None else np.asarray(source(0.0, xi), dtype=float)
    for j in range(1, n_steps + 1):
        rhs = v + 0.5 * dt * (coef * (D @ v) + 2 * a * (D @ y))
        if history is not None:
            old, new = history.delayed_pair()
            lagged = c2 * (old[:nx] + new[:nx]) + d2 * (old[nx:] + new[nx:])
            rhs = rhs + 0.5 * dt * (D @ lagged)
        if source is not None:
            s = np.asarray(source(j * dt, xi), dtype=float)
            rhs = rhs + 0.5 * dt * (s_prev + s)
            s_prev = s

        v_new = lu.solve(rhs)
        y = y + 0.5 * dt * (v + v_new)
        v = v_new

        values[first + j, 1:] = y
        velocities[first + j, 1:] = v
        if history is not None:
            history.push(np.concatenate([y, v]))

    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(velocities))):
        raise NumericError('finite-difference solution became non-finite')

    t = (np.arange(first + n_steps + 1) - first) * dt
    return FieldGrid(x_nodes=x, t_nodes=t, values=values, velocities=velocities)


def solve_fd_delayed(coeffs: Coefficients, ic: InitialData, cfg: FdConfig,
                     source: Optional[Source] = None) -> FieldGrid:
    """Solution on t in [-tau, T]; the history rows hold the sampled phi"""
    validate_coefficients(coeffs, allow_zero_delay_terms=True).raise_for_violations()
    return _march(coeffs.c1, coeffs.d1, coeffs.c2, coeffs.d2, ic, cfg, coeffs.tau, source, delayed=True)


def solve_fd_instantaneous(coeffs_sum: Tuple[float, float], ic: InitialData, cfg: FdConfig,
                           source: Optional[Source] = None, *, tau: float) -> FieldGrid:
    """
    Kelvin-Voigt rod without delay, on t in [0, T] with dt = tau / n_per_delay.
    tau only fixes the step so that grids nest with delayed runs.
    """
    a, b = coeffs_sum
    if not a > 0 or not b >= 0:
        raise ConfigError(f'instantaneous coefficients need a > 0 and b >= 0, got ({a}, {b})')
    if not tau > 0:
        raise ConfigError(f'reference tau must be positive, got {tau}')
    return _march(a, b, 0.0, 0.0, ic, cfg, tau, source, delayed=False)


@dataclass(frozen=True)
class LiftedSource:
    """-psi''(t) x read off a flux source trace by grid index"""
    values: np.ndarray
    dt: float
    n_per_delay: int

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        j = int(round(t / self.dt)) + self.n_per_delay
        return -self.values[j] * np.asarray(x, dtype=float)


def solve_fd_traction(coeffs: Coefficients, flux: BoundaryFluxTrace, cfg: FdConfig,
                      source: FluxSourceTrace) -> FieldGrid:
    """Loaded rod through the lifting y = w + psi(t) x"""
    if cfg.n_per_delay != flux.n_per_delay or source.n_per_delay != flux.n_per_delay:
        raise GridMismatchError('flux, source and finite-difference grid must share n_per_delay')
    if cfg.horizon > flux.t_nodes[-1] * (1 + 1e-9):
        raise GridMismatchError(f'horizon {cfg.horizon} exceeds the flux trace ({flux.t_nodes[-1]})')

    zero = EigenSeries((), cfg.length)
    # An analytic impulse enters as the initial velocity of w
    ic = InitialData(zero, Ramp(-source.impulse), LinearHistory(zero, zero))
    lifted = LiftedSource(source.values, source.dt, source.n_per_delay)
    w = solve_fd_delayed(coeffs, ic, cfg, lifted)

    rows = len(w.t_nodes)
    x = w.x_nodes
    values = w.values + flux.psi[:rows, None] * x[None, :]
    velocities = w.velocities + flux.derivative()[:rows, None] * x[None, :]
    return FieldGrid(x_nodes=x, t_nodes=w.t_nodes, values=values, velocities=velocities)


def discrete_energy(field: FieldGrid, a: float) -> np.ndarray:
    """1/2 ||y_t||^2 + a/2 ||y_x||^2 per time node"""
    if field.velocities is None:
        raise ConfigError('discrete energy needs velocities')
    return 0.5 * l2_norm_sq(field.velocities, field.dx) + 0.5 * a * h1_seminorm_sq(field.values, field.dx)


@dataclass(frozen=True, eq=False)
class ErrorReport:
    t_nodes: np.ndarray
    sq_errors: np.ndarray
    l2_errors: np.ndarray
    sup_sq_error: float
    sup_l2_error: float
    reference_l2: float

    @property
    def relative_l2(self) -> float:
        if self.sup_l2_error == 0:
            return 0.0
        if self.reference_l2 == 0:
            return math.inf
        return self.sup_l2_error / self.reference_l2


def _nesting(fine: np.ndarray, coarse: np.ndarray, what: str) -> int:
    h_fine = fine[1] - fine[0]
    h_coarse = coarse[1] - coarse[0]
    ratio = h_coarse / h_fine
    stride = int(round(ratio))
    if stride < 1 or abs(ratio - stride) > 1e-6 * ratio:
        raise GridMismatchError(f'{what} grids are not nested (step ratio {ratio})')
    if abs(fine[0] - coarse[0]) > 1e-9 * h_coarse or abs(fine[-1] - coarse[-1]) > 1e-6 * h_coarse:
        raise GridMismatchError(f'{what} grids cover different ranges: '
                                f'[{fine[0]}, {fine[-1]}] vs [{coarse[0]}, {coarse[-1]}]')
    if len(fine[::stride]) != len(coarse):
        raise GridMismatchError(f'{what} grids have incompatible node counts')
    return stride


def _restrict(f: FieldGrid, t_stride: int, x_stride: int) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    values = f.values[::t_stride, ::x_stride]
    velocities = None if f.velocities is None else f.velocities[::t_stride, ::x_stride]
    return values, velocities


def compare_fields(a: FieldGrid, b: FieldGrid) -> ErrorReport:
    """
    Per-node ||a - b||^2_H1 + ||a_t - b_t||^2_L2 on t >= 0, after restricting
    the finer of two nested grids to the coarser one
    """
    a = a.since(0.0)
    b = b.since(0.0)
    if len(a.t_nodes) < 2 or len(b.t_nodes) < 2:
        raise GridMismatchError('fields need at least two nodes with t >= 0')

    a_fine_t = a.dt <= b.dt
    t_stride = _nesting(a.t_nodes, b.t_nodes, 'time') if a_fine_t else _nesting(b.t_nodes, a.t_nodes, 'time')
    a_fine_x = a.dx <= b.dx
    x_stride = _nesting(a.x_nodes, b.x_nodes, 'space') if a_fine_x else _nesting(b.x_nodes, a.x_nodes, 'space')

    ya, va = _restrict(a, t_stride if a_fine_t else 1, x_stride if a_fine_x else 1)
    yb, vb = _restrict(b, 1 if a_fine_t else t_stride, 1 if a_fine_x else x_stride)
    t = a.t_nodes[::t_stride] if a_fine_t else a.t_nodes
    dx = max(a.dx, b.dx)

    diff = ya - yb
    l2_sq = l2_norm_sq(diff, dx)
    sq = l2_sq + h1_seminorm_sq(diff, dx)
    if va is not None and vb is not None:
        sq = sq + l2_norm_sq(va - vb, dx)
    l2 = np.sqrt(l2_sq)

    return ErrorReport(
        t_nodes=t,
        sq_errors=sq,
        l2_errors=l2,
        sup_sq_error=float(np.max(sq)),
        sup_l2_error=float(np.max(l2)),
        reference_l2=float(np.max(np.sqrt(l2_norm_sq(yb, dx)))),
    )
