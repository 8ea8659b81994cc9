//! Storage capacity, mean-field dynamics and exact small-N simulation of an
//! open quantum Hopfield network.

pub mod capacity;
pub mod limits;
pub mod lindblad;
pub mod meanfield;
pub mod quadrature;
mod roots;

pub use capacity::{
    compute_capacity, compute_capacity_with, maximize_y, saddle_residuals, solve_saddle,
    solve_saddle_with, sweep, y_value, CapacityError, CapacityResult, Reason, SaddleState,
    SolverConfig,
};
pub use meanfield::{ModelParams, OverlapState};
pub use quadrature::{build_grid, GaussianGrid};
