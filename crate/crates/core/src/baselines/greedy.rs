use crate::channel::EstimationProblem;
use crate::linalg;
use crate::{thread_cpu_seconds, CVector, Error, Estimate, Result};

/// Shared settings for OMP and CoSaMP.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreedyParams {
    pub target_sparsity: usize,
    pub max_iterations: usize,
    /// Absolute residual norm at which the pursuit stops early.
    pub residual_tolerance: f64,
}

impl GreedyParams {
    pub fn new(target_sparsity: usize) -> Self {
        Self {
            target_sparsity,
            max_iterations: 100,
            residual_tolerance: 0.0,
        }
    }

    fn validate(&self, problem: &EstimationProblem) -> Result<()> {
        if self.target_sparsity == 0 {
            return Err(Error::invalid("target_sparsity must be at least 1"));
        }
        if self.target_sparsity > problem.cols() {
            return Err(Error::invalid(format!(
                "target_sparsity {} exceeds {} columns",
                self.target_sparsity,
                problem.cols()
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.residual_tolerance >= 0.0) {
            return Err(Error::invalid("residual_tolerance must be non-negative"));
        }
        Ok(())
    }

    /// Residual norm that counts as an exact fit. A relative floor keeps the
    /// pursuit from chasing round-off.
    fn stop_tolerance(&self, y: &CVector) -> f64 {
        self.residual_tolerance.max(1e-12 * y.norm())
    }
}

/// CoSaMP wants `3 T <= N` for its merged least-squares step.
pub fn cosamp_undersampled(rows: usize, target_sparsity: usize) -> bool {
    3 * target_sparsity > rows
}

/// Orthogonal matching pursuit: one atom per iteration, least squares
/// re-fit on the selected set.
pub fn omp_solve(problem: &EstimationProblem, params: &GreedyParams) -> Result<Estimate> {
    let start = thread_cpu_seconds();
    params.validate(problem)?;
    let (x, y) = (problem.x(), problem.y());
    let col_norms: Vec<f64> = x.column_iter().map(|c| c.norm()).collect();
    let tol = params.stop_tolerance(y);
    let budget = params.target_sparsity.min(params.max_iterations).min(problem.rows());

    let mut support: Vec<usize> = Vec::with_capacity(budget);
    let mut h = linalg::zeros(problem.cols());
    let mut residual = y.clone();
    while support.len() < budget && residual.norm() > tol {
        let proxy = x.ad_mul(&residual);
        let pick = (0..proxy.len())
            .filter(|&i| col_norms[i] > 0.0)
            .max_by(|&a, &b| (proxy[a].norm() / col_norms[a]).total_cmp(&(proxy[b].norm() / col_norms[b])))
            .ok_or_else(|| Error::invalid("training matrix has no nonzero column"))?;
        if support.contains(&pick) {
            return Err(Error::Invariant(format!("OMP reselected column {pick}")));
        }
        support.push(pick);
        let mut sorted = support.clone();
        sorted.sort_unstable();
        h = linalg::restricted_least_squares(x, &sorted, y)?;
        residual = y - x * &h;
    }

    let mut est = Estimate::new(h, "omp");
    est.iterations = support.len();
    est.cpu_seconds = (thread_cpu_seconds() - start).max(0.0);
    Ok(est)
}

/// Compressive sampling matching pursuit.
///
/// Each iteration merges the `2T` strongest proxy indices with the current
/// support, fits least squares on the union and prunes back to `T` taps. The
/// union is truncated to `N` indices (current support first, then proxy
/// order) so the fit stays overdetermined when `3T > N`.
pub fn cosamp_solve(problem: &EstimationProblem, params: &GreedyParams) -> Result<Estimate> {
    let start = thread_cpu_seconds();
    params.validate(problem)?;
    let (x, y) = (problem.x(), problem.y());
    let rows = problem.rows();
    let t = params.target_sparsity;
    let tol = params.stop_tolerance(y);

    let mut h = linalg::zeros(problem.cols());
    let mut support: Vec<usize> = Vec::new();
    let mut residual_norm = y.norm();
    let mut iterations = 0;
    if residual_norm > tol {
        let mut residual = y.clone();
        while iterations < params.max_iterations {
            let proxy = x.ad_mul(&residual);
            let mut order: Vec<usize> = (0..proxy.len()).collect();
            order.sort_by(|&a, &b| proxy[b].norm_sqr().total_cmp(&proxy[a].norm_sqr()).then(a.cmp(&b)));

            let mut merged = support.clone();
            for &i in order.iter().take(2 * t) {
                if merged.len() >= rows {
                    break;
                }
                if !merged.contains(&i) {
                    merged.push(i);
                }
            }
            merged.sort_unstable();

            let fit = linalg::restricted_least_squares(x, &merged, y)?;
            support = linalg::top_k_by_magnitude(&fit, t);
            h = linalg::zeros(problem.cols());
            for &i in &support {
                h[i] = fit[i];
            }
            residual = y - x * &h;
            iterations += 1;

            let next_norm = residual.norm();
            let stagnated = (residual_norm - next_norm).abs() < 1e-6 * residual_norm;
            residual_norm = next_norm;
            if residual_norm <= tol || stagnated {
                break;
            }
        }
    }
    if !linalg::is_finite(&h) {
        return Err(Error::Divergence {
            solver: "cosamp",
            context: format!("iteration {iterations}"),
        });
    }

    let mut est = Estimate::new(h, "cosamp");
    est.iterations = iterations;
    est.cpu_seconds = (thread_cpu_seconds() - start).max(0.0);
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_channel, generate_training, synthesize_measurement, NoiseSpec, TrainingMatrix};
    use crate::{CMatrix, Complex64};

    #[test]
    fn zero_observation_stops_immediately() {
        let x = generate_training(10, 20, 1).unwrap();
        let p = EstimationProblem::new(x, linalg::zeros(10), NoiseSpec::noiseless()).unwrap();
        let omp = omp_solve(&p, &GreedyParams::new(3)).unwrap();
        assert_eq!(omp.taps, linalg::zeros(20));
        assert_eq!(omp.iterations, 0);
        let cosamp = cosamp_solve(&p, &GreedyParams::new(3)).unwrap();
        assert_eq!(cosamp.taps, linalg::zeros(20));
        assert_eq!(cosamp.iterations, 0);
    }

    #[test]
    fn omp_one_step_with_orthonormal_columns() {
        let x = CMatrix::identity(6, 6).map(|v: Complex64| v * Complex64::new(0.0, 1.0));
        let mut h = linalg::zeros(6);
        h[4] = Complex64::new(1.5, -0.5);
        let ch = crate::channel::SparseChannel::from_taps(h.clone()).unwrap();
        let tm = TrainingMatrix::from_matrix(x).unwrap();
        let p = synthesize_measurement(&tm, &ch, f64::INFINITY, 0).unwrap();
        let est = omp_solve(&p, &GreedyParams::new(1)).unwrap();
        assert_eq!(est.iterations, 1);
        assert!((&est.taps - &h).norm() < 1e-14);
    }

    #[test]
    fn pursuit_outputs_respect_target_sparsity() {
        for seed in 0..20 {
            let x = generate_training(20, 40, seed).unwrap();
            let h = generate_channel(40, 8, 1.0, seed + 100).unwrap();
            let p = synthesize_measurement(&x, &h, 5.0, seed + 200).unwrap();
            for t in [1, 3, 6] {
                assert!(omp_solve(&p, &GreedyParams::new(t)).unwrap().support().len() <= t);
                assert!(cosamp_solve(&p, &GreedyParams::new(t)).unwrap().support().len() <= t);
            }
        }
    }

    #[test]
    fn cosamp_tolerates_heavy_sparsity() {
        let x = generate_training(40, 60, 7).unwrap();
        let h = generate_channel(60, 20, 1.0, 8).unwrap();
        let p = synthesize_measurement(&x, &h, 10.0, 9).unwrap();
        assert!(cosamp_undersampled(40, 20));
        let est = cosamp_solve(&p, &GreedyParams::new(20)).unwrap();
        assert!(est.support().len() <= 20);
    }

    #[test]
    fn invalid_params() {
        let x = generate_training(10, 20, 1).unwrap();
        let p = EstimationProblem::new(x, linalg::zeros(10), NoiseSpec::noiseless()).unwrap();
        assert!(omp_solve(&p, &GreedyParams::new(0)).is_err());
        assert!(cosamp_solve(&p, &GreedyParams::new(21)).is_err());
    }
}
