use crate::channel::EstimationProblem;
use crate::linalg::{self, RowProjector};
use crate::{thread_cpu_seconds, Error, Estimate, Result};

/// Minimum-l2-norm interpolant `X^H (X X^H)^{-1} y`.
pub fn ls_min_norm(problem: &EstimationProblem) -> Result<Estimate> {
    let start = thread_cpu_seconds();
    let projector = RowProjector::new(problem.x())?;
    let mut est = Estimate::new(projector.pseudo_inverse_apply(problem.y()), "ls");
    est.iterations = 1;
    est.cpu_seconds = (thread_cpu_seconds() - start).max(0.0);
    Ok(est)
}

fn check_support(problem: &EstimationProblem, support: &[usize]) -> Result<()> {
    if support.len() > problem.rows() {
        return Err(Error::invalid(format!(
            "support of size {} exceeds {} measurements",
            support.len(),
            problem.rows()
        )));
    }
    if let Some(&bad) = support.iter().find(|&&i| i >= problem.cols()) {
        return Err(Error::invalid(format!("support index {bad} out of range")));
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != support.len() {
        return Err(Error::invalid("support contains duplicate indices"));
    }
    Ok(())
}

/// Least squares restricted to the known support; exact zeros elsewhere.
pub fn oracle_estimate(problem: &EstimationProblem, true_support: &[usize]) -> Result<Estimate> {
    let start = thread_cpu_seconds();
    check_support(problem, true_support)?;
    let taps = linalg::restricted_least_squares(problem.x(), true_support, problem.y())?;
    let mut est = Estimate::new(taps, "oracle");
    est.iterations = 1;
    est.cpu_seconds = (thread_cpu_seconds() - start).max(0.0);
    Ok(est)
}

/// Expected squared error of the oracle estimator,
/// `noise_variance * trace((X_S^H X_S)^{-1})`.
pub fn oracle_mse_bound(problem: &EstimationProblem, support: &[usize]) -> Result<f64> {
    check_support(problem, support)?;
    if support.is_empty() {
        return Ok(0.0);
    }
    let sub = problem.x().select_columns(support.iter());
    let gram = sub.ad_mul(&sub);
    let ratio = linalg::eigen_ratio(&gram);
    if ratio < linalg::RANK_RATIO {
        return Err(Error::NumericalRank {
            what: "restricted Gram X_S^H X_S",
            ratio,
        });
    }
    let inv = gram.try_inverse().ok_or(Error::NumericalRank {
        what: "restricted Gram X_S^H X_S",
        ratio,
    })?;
    Ok(problem.noise.noise_variance * inv.trace().re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_channel, generate_training, synthesize_measurement, NoiseSpec, TrainingMatrix};
    use crate::{CMatrix, CVector, Complex64};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_row_symmetric_solution() {
        let x = TrainingMatrix::from_matrix(CMatrix::from_row_slice(1, 2, &[c(1., 0.), c(1., 0.)])).unwrap();
        let p = EstimationProblem::new(x, CVector::from_vec(vec![c(2., 0.)]), NoiseSpec::noiseless()).unwrap();
        let est = ls_min_norm(&p).unwrap();
        assert!((est.taps[0] - c(1., 0.)).norm() < 1e-14);
        assert!((est.taps[1] - c(1., 0.)).norm() < 1e-14);
    }

    #[test]
    fn orthonormal_rows_reduce_to_adjoint() {
        let x = CMatrix::from_row_slice(
            2,
            3,
            &[c(0., 1.), c(0., 0.), c(0., 0.), c(0., 0.), c(0.6, 0.), c(0., 0.8)],
        );
        let y = CVector::from_vec(vec![c(1., 1.), c(-2., 0.5)]);
        let p = EstimationProblem::new(
            TrainingMatrix::from_matrix(x.clone()).unwrap(),
            y.clone(),
            NoiseSpec::noiseless(),
        )
        .unwrap();
        let est = ls_min_norm(&p).unwrap();
        assert!((&est.taps - x.ad_mul(&y)).norm() < 1e-14);
    }

    #[test]
    fn ls_interpolates() {
        let x = generate_training(40, 60, 3).unwrap();
        let h = generate_channel(60, 6, 1.0, 4).unwrap();
        let p = synthesize_measurement(&x, &h, 5.0, 5).unwrap();
        let est = ls_min_norm(&p).unwrap();
        assert!((p.x() * &est.taps - p.y()).norm() <= 1e-10 * p.y().norm());
    }

    #[test]
    fn oracle_is_exact_without_noise() {
        let x = generate_training(40, 60, 3).unwrap();
        let h = generate_channel(60, 6, 1.0, 4).unwrap();
        let p = synthesize_measurement(&x, &h, f64::INFINITY, 5).unwrap();
        let est = oracle_estimate(&p, h.support()).unwrap();
        assert!((&est.taps - h.taps()).norm() <= 1e-12 * h.taps().norm());
        for i in 0..60 {
            if !h.support().contains(&i) {
                assert_eq!(est.taps[i], c(0., 0.));
            }
        }
    }

    #[test]
    fn oracle_rejects_bad_supports() {
        let x = generate_training(3, 8, 3).unwrap();
        let p = EstimationProblem::new(x, CVector::zeros(3), NoiseSpec::noiseless()).unwrap();
        assert!(matches!(
            oracle_estimate(&p, &[0, 1, 2, 3]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(oracle_estimate(&p, &[9]), Err(Error::InvalidArgument(_))));
        let dup = TrainingMatrix::from_matrix(CMatrix::from_row_slice(
            2,
            2,
            &[c(1., 0.), c(1., 0.), c(0., 1.), c(0., 1.)],
        ))
        .unwrap();
        let p = EstimationProblem::new(dup, CVector::zeros(2), NoiseSpec::noiseless()).unwrap();
        assert!(matches!(oracle_estimate(&p, &[0, 1]), Err(Error::NumericalRank { .. })));
    }
}
