//! Opinion dynamics on networks and their step-graphon mean-field limit.
//!
//! The crate is organised around four layers:
//!
//! * [`graphon`] and [`piecewise`]: partitions, step graphons, finite weighted
//!   networks, step functions on `[0, 1]`, and structural operations
//!   (pixel embedding, midpoint sampling, group matrix, Laplacian, norms).
//! * [`cut`]: exact cut norm of a step graphon by block-subset enumeration.
//! * [`mean_field`]: closed-form solution of the graphon Cauchy problem
//!   `du/dt = ∫ W(x, y) (u(y) - u(x)) dy` for step graphons.
//! * [`ode`]: RK4 integration of the finite `M`-agent system and the
//!   convergence study against the analytic solution.
//! * [`three_group`]: closed-form spectrum and scenario classification for
//!   symmetric three-group interaction matrices.
//!
//! Data-parallel loops go through [`Execution`]; with the `parallel` feature
//! disabled every loop runs sequentially.

pub mod cli;
pub mod cut;
mod error;
mod exec;
pub mod graphon;
pub mod io;
pub mod linalg;
pub mod mean_field;
pub mod ode;
pub mod piecewise;
pub mod three_group;

pub use cut::{cut_norm, cut_norm_with, CutNorm, MAX_CUT_GROUPS};
pub use error::{Error, Result};
pub use exec::Execution;
pub use graphon::{laplacian, pixel_graphon, sample_network, FiniteNetwork, GroupMatrix, Partition, StepGraphon};
pub use mean_field::{
    decompose, energy, evolve_means, gronwall_constant, residual_rates, solve_at, solve_many, Decomposition,
    EvolvedState,
};
pub use ode::{convergence_study, embed, rhs, simulate, ConvergenceRow, SimConfig, Trajectory};
pub use piecewise::{l2_distance, PiecewiseFn};
pub use three_group::{
    classify, discriminant, dispersion_rate, spectrum3, BarycenterCase, Coupling3, GroupCase, ScenarioReport,
    Spectrum3,
};

/// Tolerance for structural identities (row sums, symmetry, partition lengths).
pub const STRUCTURAL_TOL: f64 = 1e-12;

/// Tolerance for time-evolved quantities (conservation laws, semigroup checks).
pub const EVOLVED_TOL: f64 = 1e-9;
