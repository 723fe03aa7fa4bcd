//! Noise-aware smoothed-l0 (MSL0) recovery.
//!
//! The l0 count of a vector is approximated through the Gaussian surrogate
//! `C_sigma(h) = exp(-|h|^2 / 2 sigma^2)`: as `sigma -> 0` it tends to 1 on
//! zero taps and 0 elsewhere, so `L - J_sigma(h)` with
//! `J_sigma(h) = sum_i C_sigma(h_i)` approaches `||h||_0`. The solver
//! maximises `J_sigma` over a data-fidelity set while walking `sigma` down a
//! geometric schedule, since for small `sigma` the surrogate is riddled with
//! local maxima.
//!
//! The data-fidelity set is the residual ball `||X h - y||_2 <= eps1`. A zero
//! budget reduces to the exact affine set `X h = y` (classic SL0).

use crate::channel::EstimationProblem;
use crate::linalg::{self, RowProjector};
use crate::{thread_cpu_seconds, CVector, Complex64, Error, Estimate, Result};

pub const SOLVER_NAME: &str = "msl0";

/// Default `eps1 = factor * sqrt(N) * noise_std`; with factor 1 the budget is
/// the expected noise norm.
pub const DEFAULT_RESIDUAL_BUDGET_FACTOR: f64 = 1.0;

/// Which data-fidelity constraint drives the iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Constraint {
    /// `||X h - y||_2 <= budget`; enforced by radial projection.
    Residual { budget: f64 },
    /// `||X^H (y - X h)||_inf <= budget`. The iteration then runs on the
    /// exact affine set, which satisfies the bound for every budget; the
    /// budget is available to callers through
    /// [`correlation_constraint_satisfied`].
    Correlation { budget: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Msl0Params {
    pub sigma_decay: f64,
    /// The schedule stops once `sigma < sigma_floor_factor * noise scale`.
    pub sigma_floor_factor: f64,
    pub inner_iterations: usize,
    /// Shrink factor `mu` in `h <- h - mu * h * exp(-|h|^2 / 2 sigma^2)`.
    pub step_size: f64,
    pub constraint: Constraint,
    pub max_sigma_levels: usize,
    /// Standard deviation of one complex noise sample, `sqrt(E|z|^2)`.
    pub noise_std: f64,
}

impl Default for Msl0Params {
    fn default() -> Self {
        Self {
            sigma_decay: 0.5,
            sigma_floor_factor: 0.25,
            inner_iterations: 3,
            step_size: 2.0,
            constraint: Constraint::Residual { budget: 0.0 },
            max_sigma_levels: 40,
            noise_std: 0.0,
        }
    }
}

impl Msl0Params {
    /// Defaults with the residual budget set from the problem's noise level.
    pub fn for_problem(problem: &EstimationProblem) -> Self {
        Self::default().with_noise(problem, DEFAULT_RESIDUAL_BUDGET_FACTOR)
    }

    /// Sets `noise_std` and `eps1 = budget_factor * sqrt(N) * noise_std`.
    pub fn with_noise(mut self, problem: &EstimationProblem, budget_factor: f64) -> Self {
        self.noise_std = problem.noise.noise_std();
        self.constraint = Constraint::Residual {
            budget: budget_factor * (problem.rows() as f64).sqrt() * self.noise_std,
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_decay > 0.0 && self.sigma_decay < 1.0) {
            return Err(Error::invalid(format!(
                "sigma_decay must lie in (0, 1), got {}",
                self.sigma_decay
            )));
        }
        if !(self.sigma_floor_factor > 0.0) {
            return Err(Error::invalid("sigma_floor_factor must be positive"));
        }
        if self.inner_iterations == 0 {
            return Err(Error::invalid("inner_iterations must be at least 1"));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::invalid("step_size must be positive"));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::invalid("noise_std must be non-negative"));
        }
        let budget = match self.constraint {
            Constraint::Residual { budget } | Constraint::Correlation { budget } => budget,
        };
        if !(budget >= 0.0 && budget.is_finite()) {
            return Err(Error::invalid("constraint budget must be finite and non-negative"));
        }
        Ok(())
    }
}

/// One sigma level of an MSL0 run, for inspecting the continuation.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelTrace {
    pub level: usize,
    pub sigma: f64,
    /// `L - J_sigma` of the iterate at the end of the level.
    pub smoothed_l0: f64,
    pub residual_norm: f64,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "sigma must be positive and finite, got {sigma}"
        )))
    }
}

/// `exp(-|tap|^2 / 2 sigma^2)`; 1 at zero, vanishing for `|tap| >> sigma`.
pub fn gaussian_surrogate(tap: Complex64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(surrogate(tap, sigma))
}

#[inline]
fn surrogate(tap: Complex64, sigma: f64) -> f64 {
    (-tap.norm_sqr() / (2.0 * sigma * sigma)).exp()
}

/// `J_sigma(h)`; `L - J_sigma(h)` is the smoothed count of dominant taps.
pub fn smoothness_measure(taps: &CVector, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if taps.is_empty() {
        return Err(Error::invalid("smoothness measure of an empty vector"));
    }
    Ok(taps.iter().map(|&t| surrogate(t, sigma)).sum())
}

/// `d_i = h_i exp(-|h_i|^2 / 2 sigma^2)`, which equals `-sigma^2` times the
/// gradient of `J_sigma` taken over `(Re h_i, Im h_i)`. A step
/// `h - mu * d` therefore climbs `J_sigma`, shrinking taps that are small
/// relative to `sigma` and leaving large ones alone.
pub fn ascent_direction(taps: &CVector, sigma: f64) -> Result<CVector> {
    check_sigma(sigma)?;
    Ok(taps.map(|t| t * surrogate(t, sigma)))
}

/// Euclidean projection of `taps` onto `{h : X h = y}`.
///
/// Fails with a numerical-rank error when `X X^H` is singular, and with an
/// invariant error if the projected residual exceeds
/// `tolerance * max(||y||, ||X h||)`.
pub fn feasible_projection(taps: &CVector, problem: &EstimationProblem, tolerance: f64) -> Result<CVector> {
    if taps.len() != problem.cols() {
        return Err(Error::invalid("tap vector length does not match problem columns"));
    }
    let projector = problem.matrix.projector()?;
    let projected = projector.project(taps, problem.y());
    let residual = (problem.x() * &projected - problem.y()).norm();
    let scale = problem.y().norm().max((problem.x() * taps).norm());
    if residual > tolerance * scale {
        return Err(Error::Invariant(format!(
            "projection residual {residual:.3e} exceeds tolerance {:.3e}",
            tolerance * scale
        )));
    }
    Ok(projected)
}

/// Geometric smoothing schedule `sigma_1 = 2 max|h0|`, `sigma_{j+1} = decay * sigma_j`.
///
/// Stops after `max_sigma_levels` entries or once sigma drops below
/// `sigma_floor_factor * max(noise_std, sqrt(eps) * max|h0|)`. An all-zero
/// start yields an empty schedule.
pub fn sigma_schedule(initial_estimate: &CVector, params: &Msl0Params) -> Vec<f64> {
    let peak = linalg::max_abs(initial_estimate);
    if !(peak > 0.0) || !peak.is_finite() {
        return Vec::new();
    }
    let floor = params.sigma_floor_factor * params.noise_std.max(f64::EPSILON.sqrt() * peak);
    let mut schedule = Vec::new();
    let mut sigma = 2.0 * peak;
    while schedule.len() < params.max_sigma_levels && sigma >= floor {
        schedule.push(sigma);
        sigma *= params.sigma_decay;
    }
    schedule
}

/// `true` iff `||X^H (y - X taps)||_inf <= epsilon2`.
pub fn correlation_constraint_satisfied(taps: &CVector, problem: &EstimationProblem, epsilon2: f64) -> bool {
    correlation_residual(taps, problem) <= epsilon2
}

/// `||X^H (y - X taps)||_inf`.
pub fn correlation_residual(taps: &CVector, problem: &EstimationProblem) -> f64 {
    let residual = problem.y() - problem.x() * taps;
    linalg::max_abs(&problem.x().ad_mul(&residual))
}

/// Default correlation budget `noise_std * sqrt(2 ln L)`.
pub fn default_correlation_budget(problem: &EstimationProblem) -> f64 {
    problem.noise.noise_std() * (2.0 * (problem.cols() as f64).ln()).sqrt()
}

/// Projects onto the active constraint set using a prebuilt projector.
fn enforce(projector: &RowProjector, h: CVector, y: &CVector, constraint: Constraint) -> CVector {
    match constraint {
        Constraint::Residual { budget } if budget > 0.0 => {
            let residual = projector.matrix() * &h - y;
            let norm = residual.norm();
            if norm <= budget {
                h
            } else {
                // Moving by a fraction of the affine correction scales the
                // residual itself, landing it on the ball boundary.
                let shrink = Complex64::new(1.0 - budget / norm, 0.0);
                h - projector.pseudo_inverse_apply(&residual) * shrink
            }
        }
        _ => projector.project(&h, y),
    }
}

pub fn msl0_solve(problem: &EstimationProblem, params: &Msl0Params) -> Result<Estimate> {
    solve_inner(problem, params, |_| {})
}

/// As [`msl0_solve`], also returning one [`LevelTrace`] per sigma level.
pub fn msl0_solve_traced(problem: &EstimationProblem, params: &Msl0Params) -> Result<(Estimate, Vec<LevelTrace>)> {
    let mut trace = Vec::new();
    let est = solve_inner(problem, params, |t| trace.push(t))?;
    Ok((est, trace))
}

fn solve_inner(
    problem: &EstimationProblem,
    params: &Msl0Params,
    mut observe: impl FnMut(LevelTrace),
) -> Result<Estimate> {
    let start = thread_cpu_seconds();
    params.validate()?;
    let projector = problem.matrix.projector()?;
    let y = problem.y();
    let cols = problem.cols() as f64;
    let mu = Complex64::new(params.step_size, 0.0);

    let mut h = projector.pseudo_inverse_apply(y);
    let schedule = sigma_schedule(&h, params);
    let mut iterations = 0;
    let mut sigma_final = 0.0;

    for (level, &sigma) in schedule.iter().enumerate() {
        for _ in 0..params.inner_iterations {
            let d = h.map(|t| t * surrogate(t, sigma));
            h -= d * mu;
            h = enforce(&projector, h, y, params.constraint);
            iterations += 1;
        }
        if !linalg::is_finite(&h) {
            return Err(Error::Divergence {
                solver: SOLVER_NAME,
                context: format!("sigma level {level} (sigma = {sigma:.3e})"),
            });
        }
        sigma_final = sigma;
        observe(LevelTrace {
            level,
            sigma,
            smoothed_l0: cols - h.iter().map(|&t| surrogate(t, sigma)).sum::<f64>(),
            residual_norm: (projector.matrix() * &h - y).norm(),
        });
    }

    let mut est = Estimate::new(h, SOLVER_NAME);
    est.iterations = iterations;
    est.sigma_final = sigma_final;
    est.cpu_seconds = (thread_cpu_seconds() - start).max(0.0);
    Ok(est)
}
