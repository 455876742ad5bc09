"""Fourier-lattice simulator and series analyzer for 3D incompressible flow
in the mild (integral) formulation."""

from .bilinear import ConvPlan, bilinear_direct, bilinear_fast, plan_convolution, support_radius
from .config import PRESETS, RunConfig, parse_config
from .errors import (
    ConfigError,
    DomainError,
    IntegrityError,
    NoConvergenceError,
    NskvError,
    PreconditionError,
    UnsupportedVersionError,
)
from .evolution import (
    DiagSeries,
    RunResult,
    StepperState,
    boundary_guard,
    etd_rk2_step,
    heat_step,
    phi1,
    phi2,
    picard_solve,
    run_simulation,
)
from .lattice import (
    KLattice,
    VecField,
    XGrid,
    antisymmetrize,
    divergence_max,
    lattice_rescale_map,
    parseval_energy,
    parseval_enstrophy,
    project_solenoidal,
)
from .physical import (
    alignment_cosine,
    default_xgrid,
    detect_peak_time,
    marginal_enstrophy_k3,
    marginal_enstrophy_x3,
    max_speed,
    reconstruct_velocity,
    reconstruct_vorticity,
)
from .seeds import (
    FlowConfig,
    build_antisym_seed,
    build_complex_seed,
    build_seed,
    calibrate_amplitude,
    cutoff_chi,
    gaussian_density,
)
from .series import (
    GpTable,
    bracket_critical_amplitude,
    compute_gp_table,
    estimate_critical_amplitude,
    estimate_lambda,
    fit_fixed_point,
    lambda_history,
    rescale_gp,
    series_partial_sum,
)
from .snapshot import read_snapshot, read_snapshot_tagged, write_snapshot

__version__ = "0.1.0"
