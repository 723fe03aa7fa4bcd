//! Reference estimators the smoothed-l0 solver is benchmarked against.

mod brute;
mod greedy;
mod lasso;
mod least_squares;

pub use brute::{brute_force_l0, BRUTE_FORCE_MAX_COLS, BRUTE_FORCE_MAX_SPARSITY};
pub use greedy::{cosamp_solve, cosamp_undersampled, omp_solve, GreedyParams};
pub use lasso::{default_lambda, lasso_objective, lasso_solve, lasso_solve_traced, LassoParams};
pub use least_squares::{ls_min_norm, oracle_estimate, oracle_mse_bound};
