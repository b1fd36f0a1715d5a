from .neutral_flux import (
    BoundaryFluxTrace,
    FluxNormalization,
    FluxSourceTrace,
    ImpulseHandling,
    closed_form_flux,
    effective_traction,
    flux_source,
    solve_neutral_flux
)
from .modal import (
    CrankNicolsonStepper,
    ForcingRow,
    ModeForcingTrace,
    ModeSpec,
    ModeTrajectory,
    eigenpair,
    forcing_coefficient,
    mode_forcing,
    mode_matrices,
    reconstruct_field,
    solve_mode,
    solve_mode_instantaneous,
    solve_modes,
    step_mode_cn
)
from .fd_oracle import (
    EigenSeries,
    ErrorReport,
    FdConfig,
    InitialData,
    LinearHistory,
    compare_fields,
    discrete_energy,
    neumann_laplacian,
    random_smooth_data,
    solve_fd_delayed,
    solve_fd_instantaneous,
    solve_fd_traction
)
