from .energy import (
    DecayFit,
    EnergyTrace,
    LyapunovWeights,
    compute_energy,
    compute_lyapunov,
    equivalence_constants,
    fit_decay_rate,
    lyapunov_weights
)
from .stability import (
    Condition,
    RatioInterval,
    RegionSample,
    StabilityVerdict,
    admissible_ratio_interval,
    check_assumption,
    check_stability,
    check_theorem_region,
    epsilon_interval,
    region_components,
    region_weights,
    sample_region
)
from .singular_limit import ConvergenceReport, PinningCheck, dyadic_taus, run_singular_limit
