//! Steadily co-rotating and counter-rotating pairs of unequal vortex patches.
//!
//! Each patch boundary is the image of the unit circle under
//! `phi_j(w) = w + eps b_j f_j(w)`, `f_j = sum_n a_n conj(w)^n`, scaled by the
//! patch size `eps b_j`. The steady-state condition is a real-analytic map
//! `F(eps, g)` whose root at `eps = 0` is the point-vortex pair; this crate
//! evaluates `F` spectrally, continues its root curve in `eps` by Newton's
//! method, and checks the result against the small-`eps` expansion and an
//! independent Biot-Savart evaluation.
//!
//! ```no_run
//! use vpair::{continue_branch, Mode, PairConfig};
//!
//! let cfg = PairConfig::new(Mode::CoRotating, [1.0, 2.0], [1.0, 1.0], 5.0);
//! let branch = continue_branch(&cfg, &[0.1, 0.2, 0.4]).unwrap();
//! println!("Omega = {}", branch.states[2].state.scalars[0]);
//! ```

pub mod asymptotics;
pub mod diagnostics;
pub mod error;
pub mod functional;
pub mod problem;
pub mod solver;
pub mod spectral;

pub use asymptotics::{expansion_report, expansion_state, fit_power_coefficient, ExpansionCoeffs, FitResult, ReportRow};
pub use diagnostics::{
    curvature, equilibrium_residual, min_curvature, patch_moments, reconstruct_patches, velocity_at,
    PatchMoments, PhysicalPatchPair,
};
pub use error::{Error, Result};
pub use functional::{residual, Functional, Grids};
pub use problem::{
    base_state, linearized_apply, linearized_solve, point_vortex_equilibrium, Mode, PairConfig, StateVector,
    TangentVector,
};
pub use solver::{continue_branch, jacobian_fd, newton_solve, Branch, Solver, VState};
pub use spectral::{CircleGrid, FourierMap, GridOffset, Order, SineSeries, C64};
