//! Verification tools: lattice dispersion, convergence, drift, census and the
//! reverse-causality identity.

pub mod causality;
pub mod convergence;
pub mod drift;
pub mod maxwell;
pub mod spectral;

pub use causality::{record_levels, reverse_causality_check};
pub use convergence::{
    convergence_study, fit_log_slope, l2_error, solution_for, ConvergenceOrder, ConvergenceReport,
    ResolutionResult,
};
pub use drift::{circular_center, drift_velocity, track_centers, DriftReport};
pub use maxwell::{maxwell_residual, maxwell_residual_study, MaxwellResidual, MaxwellStudy};
pub use spectral::{lattice_dispersion, mode_matrix, spectral_step, DispersionSample, Mat2};

use crate::error::Result;
use crate::lattice::{Count, ProcessState};
use crate::processes::StepReport;

/// Exact per-species census and occupancy of the current level.
pub fn census<T: Count>(state: &ProcessState<T>) -> Result<StepReport<T>> {
    StepReport::from_state(state)
}
