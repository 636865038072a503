//! Boundary null controls for the 1D wave equation
//!
//! ```text
//! y_tt - (a(x) y_x)_x + b(x,t) y = 0        in (0,1) x (0,T)
//! y(0,t) = 0,  y(1,t) = v(t)
//! y(.,0) = y0, y_t(.,0) = y1
//! ```
//!
//! computed by a direct space-time variational method: the optimal pair
//! (y, v) of a Carleman-weighted quadratic cost is expressed through the
//! solution p of a fourth-order elliptic problem on the space-time domain,
//! which is discretized with conforming C1 bicubic Hermite elements and
//! solved by banded Cholesky. The control is read off the boundary trace of
//! p and verified by an independent forward wave solve; the discrete
//! observability constant is estimated by power iteration.
//!
//! Modules follow the pipeline:
//!
//! - [`problem`]: coefficients, data profiles, Carleman weights, admissibility
//! - [`mesh`] / [`field`] / [`hermite`]: the C1 finite element space
//! - [`assembly`]: weighted bilinear form, load, observability form
//! - [`linalg`]: banded Cholesky and the eigen-iterations
//! - [`control`]: control/state extraction, P-norms, residual checks
//! - [`forward`]: verification solve, final-time norms, cost
//! - [`experiments`]: presets, reports, convergence rates
//! - [`config`]: plain-text problem configuration
//!
//! See the crate examples for runnable entry points into each capability,
//! and the `wavectl` binary for the batch runner.

pub mod assembly;
pub mod config;
pub mod control;
pub mod error;
pub mod field;
pub mod forward;
pub mod hermite;
pub mod linalg;
pub mod mesh;
pub mod poisson;
pub mod problem;
pub mod quad;

pub mod experiments;

pub use error::{Error, Result};

pub use assembly::{
    apply_l_to_shape, assemble_a_obs, assemble_m, assemble_rhs, assemble_system,
    galerkin_residual, AssembledSystem, ShapeDerivs, WeightMode,
};
pub use config::{load_config, parse_config};
pub use control::{
    extract_control, extract_state, pnorm, pnorm_distance, sample_control, weak_residual,
    ControlTrace,
};
pub use field::{interpolate, ControlTraceRaw, FieldPh, FnInterpolant, Interpolant};
pub use forward::{
    default_substeps, energy_series, eval_cost_j, forward_solve, l2_project_fn, l2_project_y0,
    norm_hminus1_final_velocity, norm_l2_final, SpatialFieldZh, WaveTrajectory, ZhSpace,
};
pub use hermite::{element_moment_oracles, hermite_eval, MomentTable};
pub use linalg::{
    condition_estimate, factorize, observability_constant, BandedSpdMatrix, CholeskyFactor,
    EigenEstimate,
};
pub use mesh::{DofMap, SpaceTimeMesh};
pub use poisson::{h_minus1_norm, neg_laplacian_inverse_1d, PiecewisePoly};
pub use problem::{
    beta_bounds, check_admissible, check_time_horizon, minimal_m0, rho0_eval, weight_eval,
    AdmissibilityReport, CoefficientField, HorizonReport, InitialData, PotentialField,
    ProblemConfig, Profile, ThetaShape, WeightParams,
};

pub use experiments::{
    convergence_rates, fit_rate, rates_from_report, run_config, run_preset, run_single,
    ExperimentPreset, Overrides, PresetId, ReportRow, RunOptions, RunReport, SingleRun,
};
