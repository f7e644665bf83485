//! Solvers and entropy audits for a traffic-flow conservation law whose
//! velocity responds to an exponentially weighted average of the density
//! ahead.
//!
//! The library evolves ρ_t + (ρ v(q))_x = 0, where
//! q(x) = ∫ₓ^∞ ε⁻¹ e^((x−y)/ε) ρ(y) dy, alongside the local law
//! ρ_t + (ρ v(ρ))_x = 0, and certifies numerically that the nonlocal
//! solutions approach the unique entropy-admissible local solution as
//! ε → 0:
//!
//! - [`kernel`]: exact O(N) evaluation of the averaged density q.
//! - [`model`]: admissible velocity laws and the entropy machinery
//!   (η, ψ, W) in closed form.
//! - [`nonlocal`] / [`local`]: upwind and Godunov finite-volume solvers.
//! - [`local::riemann_similarity`]: exact Riemann fans from flux
//!   envelopes, the reference oracle.
//! - [`audit`]: weak entropy residuals and the J-term decomposition of
//!   the entropy production rate, with its sign facts and identities.
//! - [`harness`]: ε-sweeps, L¹ errors, rate fits, verdicts.
//! - [`config`] / [`csvio`]: reproducible run documents and CSV output.

pub mod audit;
pub mod config;
pub mod csvio;
pub mod error;
pub mod field;
pub mod harness;
pub mod kernel;
pub mod local;
mod march;
pub mod model;
pub mod nonlocal;
pub mod trajectory;

pub use audit::{
    entropy_residual, j_decomposition, l1_distance, standard_bumps, standard_spatial_bumps,
    total_variation, Bump1d, JDecomposition, TestFunction,
};
pub use config::{parse_config, InitialData, ModelSpec, RunConfig};
pub use error::{Error, Result};
pub use field::{BoundaryPolicy, DensityField, Window};
pub use harness::{
    convergence_study, decide_verdict, fit_rate, frozen_jump_trajectory, negative_control_study,
    standard_suite, worst_residual, ConvergenceReport, EpsRun, RateFit, StudyOutcome, Verdict,
};
pub use kernel::{check_ode_identity, exp_average, OdeResidual, QField};
pub use local::{
    godunov_flux, godunov_state, riemann_similarity, solve_local, step_godunov, RiemannSolution,
    Wave, WaveKind,
};
pub use model::{EntropyPair, ModelKind, ValidationReport, VelocityModel};
pub use nonlocal::{
    cfl_dt, solve_nonlocal, step_nonlocal, NonlocalState, SolverOptions, TimeIntegrator,
};
pub use trajectory::{RunMeta, Snapshot, Trajectory};
