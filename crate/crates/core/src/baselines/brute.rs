use itertools::Itertools;

use crate::channel::EstimationProblem;
use crate::linalg;
use crate::{thread_cpu_seconds, Error, Estimate, Result};

pub const BRUTE_FORCE_MAX_COLS: usize = 16;
pub const BRUTE_FORCE_MAX_SPARSITY: usize = 4;

/// Exhaustive l0-constrained least squares: tries every support of size
/// `sparsity` and keeps the one with the smallest residual. Only meant as a
/// ground-truth oracle on tiny problems.
pub fn brute_force_l0(problem: &EstimationProblem, sparsity: usize) -> Result<Estimate> {
    let start = thread_cpu_seconds();
    let cols = problem.cols();
    if cols > BRUTE_FORCE_MAX_COLS {
        return Err(Error::invalid(format!(
            "brute force limited to {BRUTE_FORCE_MAX_COLS} columns, got {cols}"
        )));
    }
    if sparsity > BRUTE_FORCE_MAX_SPARSITY || sparsity > cols {
        return Err(Error::invalid(format!(
            "brute force sparsity {sparsity} exceeds limit {}",
            BRUTE_FORCE_MAX_SPARSITY.min(cols)
        )));
    }
    let (x, y) = (problem.x(), problem.y());
    let mut best = linalg::zeros(cols);
    let mut best_residual = y.norm_squared();
    let mut tried = 0;
    for support in (0..cols).combinations(sparsity) {
        let candidate = linalg::restricted_min_norm_lstsq(x, &support, y);
        let residual = (y - x * &candidate).norm_squared();
        tried += 1;
        if residual < best_residual {
            best_residual = residual;
            best = candidate;
        }
    }
    let mut est = Estimate::new(best, "brute_l0");
    est.iterations = tried;
    est.cpu_seconds = (thread_cpu_seconds() - start).max(0.0);
    Ok(est)
}
