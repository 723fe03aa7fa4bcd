use crate::channel::EstimationProblem;
use crate::linalg;
use crate::{thread_cpu_seconds, CVector, Complex64, Error, Estimate, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LassoParams {
    pub lambda: f64,
    pub max_iterations: usize,
    /// Stop once the relative objective decrease of one step falls below this.
    pub objective_tolerance: f64,
    /// Gradient step on `X^H (y - X h)`; `None` uses `1 / ||X||_op^2`.
    pub step_size: Option<f64>,
    /// Nesterov momentum with function-value restart. The restart keeps the
    /// objective sequence nonincreasing.
    pub accelerate: bool,
}

impl LassoParams {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            max_iterations: 5000,
            objective_tolerance: 1e-9,
            step_size: None,
            accelerate: false,
        }
    }
}

/// `s sqrt(2 ln L) max_j ||x_j||` with `s` the per-component noise standard
/// deviation `sqrt(E|z|^2 / 2)`: the universal threshold applied to the
/// complex correlations `x_j^H z`. Noiseless problems fall back to a small
/// multiple of `||X^H y||_inf` so that lambda stays positive.
pub fn default_lambda(problem: &EstimationProblem) -> f64 {
    let max_col = problem.x().column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let l = problem.cols().max(2) as f64;
    let component_std = (problem.noise.noise_variance / 2.0).sqrt();
    let universal = component_std * (2.0 * l.ln()).sqrt() * max_col;
    let floor = 1e-6 * linalg::max_abs(&problem.x().ad_mul(problem.y()));
    universal.max(floor).max(f64::MIN_POSITIVE)
}

/// `||y - X h||^2 + lambda * sum_i |h_i|`.
pub fn lasso_objective(problem: &EstimationProblem, taps: &CVector, lambda: f64) -> f64 {
    (problem.y() - problem.x() * taps).norm_squared() + lambda * taps.iter().map(|t| t.norm()).sum::<f64>()
}

/// Complex soft threshold: shrink each modulus by `tau`, keep the phase.
fn soft_threshold(v: &CVector, tau: f64) -> CVector {
    v.map(|z| {
        let m = z.norm();
        if m <= tau {
            Complex64::new(0.0, 0.0)
        } else {
            z * ((m - tau) / m)
        }
    })
}

pub fn lasso_solve(problem: &EstimationProblem, params: &LassoParams) -> Result<Estimate> {
    lasso_solve_traced(problem, params).map(|(est, _)| est)
}

/// Proximal gradient for the complex LASSO; also returns the objective after
/// every accepted iterate (starting with `h = 0`).
pub fn lasso_solve_traced(problem: &EstimationProblem, params: &LassoParams) -> Result<(Estimate, Vec<f64>)> {
    let start = thread_cpu_seconds();
    if !(params.lambda > 0.0 && params.lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {}",
            params.lambda
        )));
    }
    if params.max_iterations == 0 {
        return Err(Error::invalid("max_iterations must be at least 1"));
    }
    if !(params.objective_tolerance > 0.0) {
        return Err(Error::invalid("objective_tolerance must be positive"));
    }
    let (x, y) = (problem.x(), problem.y());
    let lipschitz = linalg::operator_norm_sq(x);
    if !(lipschitz > 0.0) {
        return Err(Error::invalid("training matrix is zero"));
    }
    let step = match params.step_size {
        Some(s) if s > 0.0 && s <= 1.0 / lipschitz * (1.0 + 1e-12) => s,
        Some(s) => {
            return Err(Error::invalid(format!(
                "step_size {s} outside (0, 1/||X||^2 = {}]",
                1.0 / lipschitz
            )))
        }
        None => 1.0 / lipschitz,
    };
    // Minimising ||y - Xh||^2 + lambda ||h||_1 is the same as minimising
    // half of it, whose smooth part has gradient -X^H (y - X h).
    let tau = step * params.lambda / 2.0;
    let prox_step = |from: &CVector| -> CVector {
        let grad = x.ad_mul(&(y - x * from));
        soft_threshold(&(from + grad * Complex64::new(step, 0.0)), tau)
    };

    let mut h = linalg::zeros(problem.cols());
    let mut objective = lasso_objective(problem, &h, params.lambda);
    let mut history = vec![objective];
    let mut momentum_point = h.clone();
    let mut t_k = 1.0f64;
    let mut iterations = 0;

    while iterations < params.max_iterations {
        iterations += 1;
        let mut next = prox_step(if params.accelerate { &momentum_point } else { &h });
        let mut next_objective = lasso_objective(problem, &next, params.lambda);
        if params.accelerate && next_objective > objective {
            t_k = 1.0;
            next = prox_step(&h);
            next_objective = lasso_objective(problem, &next, params.lambda);
        }
        if !next_objective.is_finite() {
            return Err(Error::Divergence {
                solver: "lasso",
                context: format!("iteration {iterations}"),
            });
        }
        if params.accelerate {
            let t_next = (1.0 + (1.0 + 4.0 * t_k * t_k).sqrt()) / 2.0;
            let beta = Complex64::new((t_k - 1.0) / t_next, 0.0);
            momentum_point = &next + (&next - &h) * beta;
            t_k = t_next;
        }
        let decrease = objective - next_objective;
        h = next;
        objective = next_objective;
        history.push(objective);
        if decrease.abs() <= params.objective_tolerance * objective.max(f64::MIN_POSITIVE) {
            break;
        }
    }

    let mut est = Estimate::new(h, "lasso");
    est.iterations = iterations;
    est.cpu_seconds = (thread_cpu_seconds() - start).max(0.0);
    Ok((est, history))
}
