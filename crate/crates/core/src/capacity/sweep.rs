use rayon::prelude::*;

use super::{compute_capacity_with, CapacityError, CapacityResult, SolverConfig};
use crate::meanfield::ModelParams;
use crate::quadrature::GaussianGrid;

/// Evaluates every point independently in parallel; results keep the input
/// order.
pub fn sweep(
    points: &[ModelParams],
    grid: &GaussianGrid,
    config: &SolverConfig,
) -> Vec<Result<CapacityResult, CapacityError>> {
    points
        .par_iter()
        .map(|p| compute_capacity_with(p, grid, config))
        .collect()
}
