from dataclasses import dataclass, field
import logging
import math
from typing import List, Optional, Tuple
import numpy as np
from .exc import DomainError, GridMismatchError, ValidationError


@dataclass(frozen=True)
class Coefficients:
    c1: float
    c2: float
    d1: float
    d2: float
    tau: float

    def summed(self) -> Tuple[float, float]:
        """Coefficients of the instantaneous limit system"""
        return (self.c1 + self.c2, self.d1 + self.d2)


@dataclass(frozen=True)
class Violation:
    field: str
    constraint: str

    def __str__(self):
        return f'{self.constraint} ({self.field})'


@dataclass(frozen=True)
class ValidationResult:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return len(self.violations) == 0

    @property
    def fields(self) -> List[str]:
        return [v.field for v in self.violations]

    @property
    def constraints(self) -> List[str]:
        return [v.constraint for v in self.violations]

    def raise_for_violations(self):
        if not self.ok:
            raise ValidationError('violated: ' + ', '.join(str(v) for v in self.violations))


def validate_coefficients(c: Coefficients, allow_zero_delay_terms: bool = False) -> ValidationResult:
    violations = []
    # Written as negations so that NaN fails every check
    if not c.c1 > 0:
        violations.append(Violation('c1', 'c1 > 0'))
    if not c.d1 > 0:
        violations.append(Violation('d1', 'd1 > 0'))
    if not c.tau > 0:
        violations.append(Violation('tau', 'tau > 0'))
    if not allow_zero_delay_terms:
        if not c.c2 != 0:
            violations.append(Violation('c2', 'c2 ≠ 0'))
        if not c.d2 != 0:
            violations.append(Violation('d2', 'd2 ≠ 0'))
    return ValidationResult(tuple(violations))


@dataclass(frozen=True)
class MusclePhysical:
    """Rod-shaped sample fixed at x = 0 and loaded by a traction f at x = L"""
    L: float
    rho: float
    E: float
    eta: float
    epsilon: float
    f: float
    tau: Optional[float] = None

    def __post_init__(self):
        # The delay defaults to the retardation time of the material
        if self.tau is None and self.E:
            object.__setattr__(self, 'tau', self.eta / self.E)

    @property
    def retardation_time(self) -> float:
        return self.eta / self.E

    def validate(self) -> ValidationResult:
        violations = []
        for name in ('L', 'rho', 'E', 'eta'):
            if not getattr(self, name) > 0:
                violations.append(Violation(name, f'{name} > 0'))
        if not self.epsilon >= 0:
            violations.append(Violation('epsilon', 'epsilon ≥ 0'))
        if self.tau is None or not self.tau > 0:
            violations.append(Violation('tau', 'tau > 0'))
        if not math.isfinite(self.f):
            violations.append(Violation('f', 'f finite'))
        return ValidationResult(tuple(violations))


MUSCLE_SAMPLE = MusclePhysical(
    L=5.33e-3,
    rho=1.06e3,
    E=2.00e4,
    eta=2.00e7,
    epsilon=0.0,
    f=1.0052e4,
)


def derive_coefficients(p: MusclePhysical) -> Coefficients:
    p.validate().raise_for_violations()
    c1 = p.E / p.rho
    d1 = p.eta / p.rho
    return Coefficients(c1=c1, c2=p.epsilon * p.E / p.rho, d1=d1, d2=p.epsilon * p.eta / p.rho, tau=p.tau)


def poincare_constant_interval(L: float) -> float:
    """
    Sharp constant in ||u||^2 <= cp ||u'||^2 for u on (0, L) with u(0) = 0 and
    a free end at L. It is the inverse of the first eigenvalue pi^2 / (4 L^2).
    """
    if not L > 0:
        raise DomainError(f'interval length must be positive, got {L}')
    return 4 * L * L / (math.pi * math.pi)


@dataclass(frozen=True)
class StabilityInput:
    coeffs: Coefficients
    cp: float

    def __post_init__(self):
        if not self.cp > 0:
            raise DomainError(f'Poincaré constant must be positive, got {self.cp}')


@dataclass(frozen=True, eq=False)
class FieldGrid:
    x_nodes: np.ndarray
    t_nodes: np.ndarray
    values: np.ndarray
    velocities: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        shape = (len(self.t_nodes), len(self.x_nodes))
        if self.values.shape != shape:
            raise GridMismatchError(f'field values have shape {self.values.shape}, expected {shape}')
        if self.velocities is not None and self.velocities.shape != shape:
            raise GridMismatchError(f'field velocities have shape {self.velocities.shape}, expected {shape}')

    @property
    def dx(self) -> float:
        return float(self.x_nodes[1] - self.x_nodes[0])

    @property
    def dt(self) -> float:
        return float(self.t_nodes[1] - self.t_nodes[0])

    def scaled(self, factor: float) -> 'FieldGrid':
        velocities = None if self.velocities is None else factor * self.velocities
        return FieldGrid(self.x_nodes, self.t_nodes, factor * self.values, velocities)

    def since(self, t0: float) -> 'FieldGrid':
        """Restriction to the nodes with t >= t0"""
        keep = self.t_nodes >= t0 - 1e-9 * max(1.0, abs(self.dt))
        velocities = None if self.velocities is None else self.velocities[keep]
        return FieldGrid(self.x_nodes, self.t_nodes[keep], self.values[keep], velocities)


def time_grid(tau: float, n_per_delay: int, horizon_delays: int) -> np.ndarray:
    """Delay-aligned nodes t_j = (j - N) tau / N from -tau to horizon_delays * tau"""
    n_total = (horizon_delays + 1) * n_per_delay + 1
    dt = tau / n_per_delay
    logging.debug(f'time grid: {n_total} nodes, dt = {dt}')
    return (np.arange(n_total) - n_per_delay) * dt
