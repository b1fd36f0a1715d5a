"""
Closed-form sufficient conditions for exponential decay of the delayed rod.

Two families are evaluated: the assumption under which the Lyapunov weights
of the energy module exist, and the larger region obtained by choosing all
Young parameters equal to eps = d1 / (c2 + d2). The formula helpers accept
scalars or numpy arrays so that single checks and the region sampler share
one implementation. Comparisons are exact; boundary points of a strict
inequality fail.
"""
from dataclasses import dataclass
import logging
import math
from typing import Iterator, List, Optional, Tuple
import numpy as np
from scipy import ndimage
from viskv.core import ConfigError, DomainError, InfeasibleWeightsError, StabilityInput


@dataclass(frozen=True)
class Condition:
    id: str
    relation: str
    lhs: float
    rhs: float
    satisfied: bool


@dataclass(frozen=True)
class StabilityVerdict:
    assumption_ok: Optional[bool]
    theorem_ok: Optional[bool]
    conditions: Tuple[Condition, ...]

    def failed(self) -> List[str]:
        return [c.id for c in self.conditions if not c.satisfied]

    def condition(self, id: str) -> Condition:
        for c in self.conditions:
            if c.id == id:
                return c
        raise KeyError(id)


def _viscosity_bound(c1, c2, d2, cp):
    """max{9 c1^2 d2^2 / (c1^2 - 9 c2^2), 18 c1 c2^2 cp / (c1^2 - 36 c2^2)}, inf off its domain"""
    den1 = c1 * c1 - 9 * c2 * c2
    den2 = c1 * c1 - 36 * c2 * c2
    with np.errstate(divide='ignore', invalid='ignore'):
        first = np.where(den1 > 0, 9 * c1 * c1 * d2 * d2 / den1, np.inf)
        second = np.where(den2 > 0, 18 * c1 * c2 * c2 * cp / den2, np.inf)
    return np.maximum(first, second)


def _ratio_window(c1, c2, d1, d2, cp):
    """Both sides of the N/M window at eps = d1 / (c2 + d2)"""
    s = c2 + d2
    gap = d1 * d1 - d2 * s
    with np.errstate(divide='ignore', invalid='ignore'):
        lhs = np.where(gap > 0, (2 * d1 * cp + (d1 + d2) * s) / gap, np.inf)
        rhs = np.where(c2 * s > 0,
                       2 * c1 * d1 / (c2 * s) - 1 - d1 * d1 * (c2 + d1 + d2) / (c2 * s * s),
                       -np.inf)
    return lhs, rhs


def _poincare_window(c1, c2, d1, d2, cp):
    s = c2 + d2
    with np.errstate(divide='ignore', invalid='ignore'):
        lhs = np.sqrt(cp / c1)
        rhs = np.where((c2 * s > 0) & (d1 > 0),
                       d1 / (c2 * s) * (2 * c1 - (c2 * d1 + d1 * d1 + d1 * d2) / s - c2 * s / d1),
                       -np.inf)
    return np.where(c1 > 0, lhs, np.inf), rhs


def _assumption_mask(c1, c2, d1, d2, cp):
    return (c1 > 6 * c2) & (6 * c2 > 0) & (d1 * d1 >= _viscosity_bound(c1, c2, d2, cp)) & (d2 > 0)


def _gate_mask(c1, c2, d1, d2):
    return (d1 * d1 >= d2 * (c2 + d2)) & (c1 * c1 >= c2 * (c2 + d1 + d2))


def _theorem_mask(c1, c2, d1, d2, cp):
    ratio_lhs, ratio_rhs = _ratio_window(c1, c2, d1, d2, cp)
    poincare_lhs, poincare_rhs = _poincare_window(c1, c2, d1, d2, cp)
    return _gate_mask(c1, c2, d1, d2) & (ratio_lhs < ratio_rhs) & (poincare_lhs < poincare_rhs)


def _unpack(s: StabilityInput):
    c = s.coeffs
    return c.c1, c.c2, c.d1, c.d2, s.cp


def check_assumption(s: StabilityInput) -> StabilityVerdict:
    c1, c2, d1, d2, cp = _unpack(s)
    bound = float(_viscosity_bound(c1, c2, d2, cp))
    conditions = (
        Condition('stiffness_ratio', 'c1 > 6 c2', c1, 6 * c2, c1 > 6 * c2),
        Condition('delayed_stiffness_positive', '6 c2 > 0', 6 * c2, 0.0, 6 * c2 > 0),
        Condition('viscosity_bound', 'd1^2 >= max(...)', d1 * d1, bound, d1 * d1 >= bound),
        Condition('delayed_viscosity_positive', 'd2 > 0', d2, 0.0, d2 > 0),
    )
    ok = all(c.satisfied for c in conditions)
    return StabilityVerdict(assumption_ok=ok, theorem_ok=None, conditions=conditions)


def check_theorem_region(s: StabilityInput) -> StabilityVerdict:
    c1, c2, d1, d2, cp = _unpack(s)
    ratio_lhs, ratio_rhs = (float(v) for v in _ratio_window(c1, c2, d1, d2, cp))
    poincare_lhs, poincare_rhs = (float(v) for v in _poincare_window(c1, c2, d1, d2, cp))
    conditions = (
        Condition('viscosity_gate', 'd1^2 >= d2 (c2 + d2)', d1 * d1, d2 * (c2 + d2), d1 * d1 >= d2 * (c2 + d2)),
        Condition('stiffness_gate', 'c1^2 >= c2 (c2 + d1 + d2)', c1 * c1, c2 * (c2 + d1 + d2),
                  c1 * c1 >= c2 * (c2 + d1 + d2)),
        Condition('ratio_window', '<', ratio_lhs, ratio_rhs, ratio_lhs < ratio_rhs),
        Condition('poincare_window', 'sqrt(cp / c1) <', poincare_lhs, poincare_rhs, poincare_lhs < poincare_rhs),
    )
    ok = all(c.satisfied for c in conditions)
    return StabilityVerdict(assumption_ok=None, theorem_ok=ok, conditions=conditions)


def check_stability(s: StabilityInput) -> StabilityVerdict:
    """Both families in one verdict"""
    assumption = check_assumption(s)
    theorem = check_theorem_region(s)
    return StabilityVerdict(assumption.assumption_ok, theorem.theorem_ok,
                            assumption.conditions + theorem.conditions)


@dataclass(frozen=True)
class RatioInterval:
    lo: float
    hi: float
    feasible: bool


def admissible_ratio_interval(s: StabilityInput, eps: float) -> RatioInterval:
    """Window for N/M at a common Young parameter eps"""
    if not eps > 0:
        raise DomainError(f'eps must be positive, got {eps}')
    c1, c2, d1, d2, cp = _unpack(s)
    den = c2 * eps - 2 * d1 + d2 * eps + d2 / eps
    hi = (2 * c1 - c2 * eps - d1 * eps - d2 * eps - c2 / eps) * eps / c2 if c2 != 0 else -math.inf
    if den >= 0:
        return RatioInterval(math.nan, hi, False)
    lo = (-2 * cp - d1 / eps - d2 / eps) / den
    return RatioInterval(lo, hi, lo < hi)


def epsilon_interval(s: StabilityInput) -> Optional[Tuple[float, float]]:
    """
    Open set of eps where the lower window bound has a negative denominator
    and the upper one is positive; None when empty
    """
    c1, c2, d1, d2, _ = _unpack(s)
    bounds = []
    # (c2 + d2) eps^2 - 2 d1 eps + d2 < 0 and (c2 + d1 + d2) eps^2 - 2 c1 eps + c2 < 0
    for a, b, c in ((c2 + d2, d1, d2), (c2 + d1 + d2, c1, c2)):
        disc = b * b - a * c
        if not a > 0 or not disc > 0:
            return None
        root = math.sqrt(disc)
        bounds.append(((b - root) / a, (b + root) / a))
    lo = max(bounds[0][0], bounds[1][0], 0.0)
    hi = min(bounds[0][1], bounds[1][1])
    return (lo, hi) if lo < hi else None


def region_weights(s: StabilityInput):
    """Lyapunov weights along the equal-Young-parameter derivation"""
    from .energy import LyapunovWeights, equivalence_constants

    c1, c2, d1, d2, cp = _unpack(s)
    if not (c2 > 0 and d2 > 0):
        raise InfeasibleWeightsError('region weights need c2 > 0 and d2 > 0')
    eps = d1 / (c2 + d2)
    interval = admissible_ratio_interval(s, eps)
    eps_hat = math.sqrt(cp / c1)
    lower = max(interval.lo, eps_hat) if interval.feasible else math.nan
    if not lower < interval.hi:
        raise InfeasibleWeightsError(f'no admissible N/M above {eps_hat} at eps = {eps}')

    M = 1.0
    N = math.sqrt(lower * interval.hi) * M
    xi1_range = ((N + M) * c2 / eps, M * (2 * c1 - (c2 + d1 + d2) * eps))
    xi2_range = ((N + M) * d2 / eps, N * (2 * d1 - (c2 + d2) * eps) - M * (2 * cp + d1 / eps))
    for name, (lo, hi) in (('xi1', xi1_range), ('xi2', xi2_range)):
        if not lo < hi:
            raise InfeasibleWeightsError(f'empty interval for {name}: ({lo}, {hi})')
    xi1 = 0.5 * sum(xi1_range)
    xi2 = 0.5 * sum(xi2_range)

    k1, k2, eps_hat = equivalence_constants(N, M, xi1, xi2, s)
    return LyapunovWeights(N=N, M=M, xi1=xi1, xi2=xi2, eps1=eps, eps2=eps, eps3=eps, eps4=eps, eps5=eps,
                           k1=k1, k2=k2, eps_hat=eps_hat)


@dataclass(frozen=True, eq=False)
class RegionSample:
    c1: float
    cp: float
    c2_axis: np.ndarray
    d1_axis: np.ndarray
    d2_axis: np.ndarray
    assumption_ok: np.ndarray
    theorem_ok: np.ndarray
    gate_ok: np.ndarray

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.theorem_ok.shape

    def rows(self) -> Iterator[Tuple[float, float, float, bool, bool]]:
        for i, c2 in enumerate(self.c2_axis):
            for j, d1 in enumerate(self.d1_axis):
                for k, d2 in enumerate(self.d2_axis):
                    yield (float(c2), float(d1), float(d2),
                           bool(self.assumption_ok[i, j, k]), bool(self.theorem_ok[i, j, k]))


def _axis(name: str, bounds: Tuple[float, float], resolution: int) -> np.ndarray:
    lo, hi = bounds
    if lo > hi:
        raise ConfigError(f'{name} range is empty: [{lo}, {hi}]')
    if lo == hi:
        return np.array([float(lo)])
    return np.linspace(lo, hi, resolution)


def sample_region(c1: float, cp: float, c2_range: Tuple[float, float], d1_range: Tuple[float, float],
                  d2_range: Tuple[float, float], resolution: int = 40) -> RegionSample:
    if resolution < 2:
        raise ConfigError(f'resolution must be at least 2, got {resolution}')
    c2_axis = _axis('c2', c2_range, resolution)
    d1_axis = _axis('d1', d1_range, resolution)
    d2_axis = _axis('d2', d2_range, resolution)
    c2, d1, d2 = np.meshgrid(c2_axis, d1_axis, d2_axis, indexing='ij')
    logging.debug(f'sampling {c2.size} parameter points')

    return RegionSample(
        c1=c1,
        cp=cp,
        c2_axis=c2_axis,
        d1_axis=d1_axis,
        d2_axis=d2_axis,
        assumption_ok=_assumption_mask(c1, c2, d1, d2, cp),
        theorem_ok=_theorem_mask(c1, c2, d1, d2, cp),
        gate_ok=_gate_mask(c1, c2, d1, d2),
    )


def region_components(sample: RegionSample) -> int:
    """Number of 26-connected clusters of in-region grid points"""
    _, count = ndimage.label(sample.theorem_ok, structure=np.ones((3, 3, 3)))
    return int(count)
