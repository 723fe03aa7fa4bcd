//! Paired Monte-Carlo experiments: MSE against sparsity and SNR, and solver
//! CPU time.
//!
//! Every trial derives its seed from `(base_seed, cell, trial_index)` only, so
//! all algorithms in a trial see the same `(X, h, z)` and the records do not
//! depend on scheduling.

use std::fmt;
use std::str::FromStr;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::baselines::{self, GreedyParams, LassoParams};
use crate::channel::{self, EstimationProblem, SparseChannel};
use crate::linalg;
use crate::sl0::{self, Msl0Params};
use crate::{thread_cpu_seconds, Error, Estimate, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Ls,
    Oracle,
    Omp,
    Cosamp,
    Lasso,
    Msl0,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Ls,
        Algorithm::Oracle,
        Algorithm::Omp,
        Algorithm::Cosamp,
        Algorithm::Lasso,
        Algorithm::Msl0,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Ls => "ls",
            Algorithm::Oracle => "oracle",
            Algorithm::Omp => "omp",
            Algorithm::Cosamp => "cosamp",
            Algorithm::Lasso => "lasso",
            Algorithm::Msl0 => "msl0",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.label() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Sparsity,
    Snr,
    Timing,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::Sparsity => "sparsity",
            ExperimentKind::Snr => "snr",
            ExperimentKind::Timing => "timing",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparsity" => Ok(ExperimentKind::Sparsity),
            "snr" => Ok(ExperimentKind::Snr),
            "timing" => Ok(ExperimentKind::Timing),
            other => Err(Error::invalid(format!("unknown experiment `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Msl0Settings {
    pub sigma_decay: f64,
    pub inner_iterations: usize,
    pub step_size: f64,
    pub max_sigma_levels: usize,
    pub residual_budget_factor: f64,
    pub sigma_floor_factor: f64,
}

impl Default for Msl0Settings {
    fn default() -> Self {
        let p = Msl0Params::default();
        Self {
            sigma_decay: p.sigma_decay,
            inner_iterations: p.inner_iterations,
            step_size: p.step_size,
            max_sigma_levels: p.max_sigma_levels,
            residual_budget_factor: sl0::DEFAULT_RESIDUAL_BUDGET_FACTOR,
            sigma_floor_factor: p.sigma_floor_factor,
        }
    }
}

impl Msl0Settings {
    pub fn params_for(&self, problem: &EstimationProblem) -> Msl0Params {
        Msl0Params {
            sigma_decay: self.sigma_decay,
            sigma_floor_factor: self.sigma_floor_factor,
            inner_iterations: self.inner_iterations,
            step_size: self.step_size,
            max_sigma_levels: self.max_sigma_levels,
            ..Msl0Params::default()
        }
        .with_noise(problem, self.residual_budget_factor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LassoSettings {
    /// Fixed lambda; `None` picks [`baselines::default_lambda`] per problem.
    pub lambda: Option<f64>,
    pub max_iterations: usize,
    pub objective_tolerance: f64,
}

impl Default for LassoSettings {
    fn default() -> Self {
        let p = LassoParams::new(1.0);
        Self {
            lambda: None,
            max_iterations: p.max_iterations,
            objective_tolerance: p.objective_tolerance,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreedySettings {
    pub max_iterations: usize,
    pub residual_tolerance: f64,
}

impl Default for GreedySettings {
    fn default() -> Self {
        let p = GreedyParams::new(1);
        Self {
            max_iterations: p.max_iterations,
            residual_tolerance: p.residual_tolerance,
        }
    }
}

/// Grid, trial count and solver settings of one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub channel_length: usize,
    pub training_length: usize,
    pub sparsity_values: Vec<usize>,
    pub snr_values_db: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub tap_std: f64,
    /// SNR held fixed by the sparsity and timing sweeps.
    pub fixed_snr_db: f64,
    /// Sparsity held fixed by the SNR sweep.
    pub fixed_sparsity: usize,
    /// Solves per record in the timing sweep; the median CPU time is kept.
    pub timing_repeats: usize,
    pub msl0: Msl0Settings,
    pub lasso: LassoSettings,
    pub greedy: GreedySettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            channel_length: 60,
            training_length: 40,
            sparsity_values: (2..=20).step_by(2).collect(),
            snr_values_db: (0..=30).step_by(5).map(f64::from).collect(),
            trials: 1000,
            base_seed: 0,
            algorithms: Algorithm::ALL.to_vec(),
            tap_std: channel::DEFAULT_TAP_STD,
            fixed_snr_db: 10.0,
            fixed_sparsity: 4,
            timing_repeats: 1,
            msl0: Msl0Settings::default(),
            lasso: LassoSettings::default(),
            greedy: GreedySettings::default(),
        }
    }
}

impl ExperimentConfig {
    /// Checks every invariant; the error names the offending key.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| Error::Config {
            key: key.to_string(),
            location: "validation".to_string(),
            message,
        };
        if self.channel_length == 0 {
            return Err(bad("channel_length", "must be at least 1".into()));
        }
        if self.training_length == 0 {
            return Err(bad("training_length", "must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(bad("trials", "trials must be >= 1".into()));
        }
        if self.sparsity_values.is_empty() {
            return Err(bad("sparsity_values", "must not be empty".into()));
        }
        for &t in self.sparsity_values.iter().chain(std::iter::once(&self.fixed_sparsity)) {
            if t == 0 || t > self.channel_length {
                return Err(bad(
                    "sparsity_values",
                    format!("sparsity {t} must lie in 1..={}", self.channel_length),
                ));
            }
        }
        if self.snr_values_db.is_empty() {
            return Err(bad("snr_values_db", "must not be empty".into()));
        }
        if self
            .snr_values_db
            .iter()
            .chain(std::iter::once(&self.fixed_snr_db))
            .any(|s| s.is_nan() || *s == f64::NEG_INFINITY)
        {
            return Err(bad("snr_values_db", "SNR values must be numbers or +inf".into()));
        }
        if self.algorithms.is_empty() {
            return Err(bad("algorithms", "must name at least one algorithm".into()));
        }
        if !(self.tap_std > 0.0 && self.tap_std.is_finite()) {
            return Err(bad("tap_std", "must be positive".into()));
        }
        if self.timing_repeats == 0 {
            return Err(bad("timing_repeats", "must be at least 1".into()));
        }
        let m = &self.msl0;
        if !(m.sigma_decay > 0.0 && m.sigma_decay < 1.0) {
            return Err(bad("msl0.sigma_decay", "must lie in (0, 1)".into()));
        }
        if m.inner_iterations == 0 {
            return Err(bad("msl0.inner_iterations", "must be at least 1".into()));
        }
        if !(m.step_size > 0.0) {
            return Err(bad("msl0.step_size", "must be positive".into()));
        }
        if !(m.residual_budget_factor >= 0.0) {
            return Err(bad("msl0.residual_budget_factor", "must be non-negative".into()));
        }
        if !(m.sigma_floor_factor > 0.0) {
            return Err(bad("msl0.sigma_floor_factor", "must be positive".into()));
        }
        if let Some(l) = self.lasso.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(bad("lasso.lambda", "must be positive".into()));
            }
        }
        if self.lasso.max_iterations == 0 {
            return Err(bad("lasso.max_iterations", "must be at least 1".into()));
        }
        if self.greedy.max_iterations == 0 {
            return Err(bad("greedy.max_iterations", "must be at least 1".into()));
        }
        if !(self.greedy.residual_tolerance >= 0.0) {
            return Err(bad("greedy.residual_tolerance", "must be non-negative".into()));
        }
        Ok(())
    }

    /// Grid points visited by a sweep, in output order.
    pub fn cells(&self, kind: ExperimentKind) -> Vec<Cell> {
        match kind {
            ExperimentKind::Sparsity | ExperimentKind::Timing => self
                .sparsity_values
                .iter()
                .map(|&sparsity| Cell {
                    sparsity,
                    snr_db: self.fixed_snr_db,
                })
                .collect(),
            ExperimentKind::Snr => self
                .snr_values_db
                .iter()
                .map(|&snr_db| Cell {
                    sparsity: self.fixed_sparsity,
                    snr_db,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub sparsity: usize,
    pub snr_db: f64,
}

/// One algorithm on one Monte-Carlo draw.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub experiment: ExperimentKind,
    pub algorithm: Algorithm,
    pub channel_length: usize,
    pub training_length: usize,
    pub sparsity: usize,
    pub snr_db: f64,
    pub trial_index: usize,
    pub seed: u64,
    pub mse: f64,
    pub support_recovered: bool,
    pub cpu_seconds: f64,
    pub failed: bool,
}

/// Per-(algorithm, cell) summary of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub algorithm: Algorithm,
    pub sparsity: usize,
    pub snr_db: f64,
    pub trials: usize,
    pub mean_mse: f64,
    /// Standard error of `mean_mse`.
    pub mse_std_error: f64,
    pub mean_cpu_seconds: f64,
    pub success_rate: f64,
    pub failures: usize,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl SweepResult {
    pub fn aggregate(&self, algorithm: Algorithm, cell: Cell) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| {
            a.algorithm == algorithm && a.sparsity == cell.sparsity && a.snr_db.to_bits() == cell.snr_db.to_bits()
        })
    }

    /// Mean MSE of `algorithm` in every cell, in cell order.
    pub fn mse_curve(&self, algorithm: Algorithm) -> Vec<f64> {
        self.curve(algorithm, |a| a.mean_mse)
    }

    pub fn cpu_curve(&self, algorithm: Algorithm) -> Vec<f64> {
        self.curve(algorithm, |a| a.mean_cpu_seconds)
    }

    fn curve(&self, algorithm: Algorithm, f: impl Fn(&Aggregate) -> f64) -> Vec<f64> {
        self.config
            .cells(self.kind)
            .into_iter()
            .filter_map(|c| self.aggregate(algorithm, c).map(&f))
            .collect()
    }
}

/// SplitMix64 finaliser, used to hash seed components together.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one Monte-Carlo draw; independent of the algorithm.
pub fn trial_seed(base_seed: u64, cell: Cell, trial_index: usize) -> u64 {
    [cell.sparsity as u64, cell.snr_db.to_bits(), trial_index as u64]
        .into_iter()
        .fold(mix(base_seed), |acc, part| mix(acc ^ part))
}

/// Regenerates the `(X, h, z)` realisation of a trial from its seed.
pub fn problem_from_seed(config: &ExperimentConfig, cell: Cell, seed: u64) -> Result<EstimationProblem> {
    let h = channel::generate_channel(config.channel_length, cell.sparsity, config.tap_std, mix(seed ^ 1))?;
    let x = channel::generate_training(config.training_length, config.channel_length, mix(seed ^ 2))?;
    channel::synthesize_measurement(&x, &h, cell.snr_db, mix(seed ^ 3))
}

pub fn build_problem(config: &ExperimentConfig, cell: Cell, trial_index: usize) -> Result<(EstimationProblem, u64)> {
    let seed = trial_seed(config.base_seed, cell, trial_index);
    Ok((problem_from_seed(config, cell, seed)?, seed))
}

/// Runs one algorithm with the configured settings. Greedy solvers and the
/// oracle are told the true sparsity / support.
pub fn solve(algorithm: Algorithm, problem: &EstimationProblem, config: &ExperimentConfig) -> Result<Estimate> {
    let truth = problem.truth.as_ref();
    let need_truth = || truth.ok_or_else(|| Error::invalid(format!("{algorithm} needs the planted channel")));
    match algorithm {
        Algorithm::Ls => baselines::ls_min_norm(problem),
        Algorithm::Oracle => baselines::oracle_estimate(problem, need_truth()?.support()),
        Algorithm::Omp | Algorithm::Cosamp => {
            let params = GreedyParams {
                target_sparsity: need_truth()?.sparsity(),
                max_iterations: config.greedy.max_iterations,
                residual_tolerance: config.greedy.residual_tolerance,
            };
            if algorithm == Algorithm::Omp {
                baselines::omp_solve(problem, &params)
            } else {
                baselines::cosamp_solve(problem, &params)
            }
        }
        Algorithm::Lasso => {
            let mut params = LassoParams::new(
                config
                    .lasso
                    .lambda
                    .unwrap_or_else(|| baselines::default_lambda(problem)),
            );
            params.max_iterations = config.lasso.max_iterations;
            params.objective_tolerance = config.lasso.objective_tolerance;
            baselines::lasso_solve(problem, &params)
        }
        Algorithm::Msl0 => sl0::msl0_solve(problem, &config.msl0.params_for(problem)),
    }
}

/// `||h - h_hat||^2`.
pub fn squared_error(truth: &SparseChannel, estimate: &Estimate) -> Result<f64> {
    if truth.len() != estimate.taps.len() {
        return Err(Error::invalid(format!(
            "truth has {} taps, estimate has {}",
            truth.len(),
            estimate.taps.len()
        )));
    }
    Ok((truth.taps() - &estimate.taps).norm_squared())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Scores one algorithm on an already generated problem. Solver errors are
/// recorded as failures carrying the zero-estimate error `||h||^2`.
pub fn evaluate(
    kind: ExperimentKind,
    config: &ExperimentConfig,
    cell: Cell,
    trial_index: usize,
    seed: u64,
    problem: &EstimationProblem,
    algorithm: Algorithm,
) -> Result<TrialRecord> {
    let truth = problem
        .truth
        .as_ref()
        .ok_or_else(|| Error::invalid("trial problems must carry the planted channel"))?;
    let repeats = if kind == ExperimentKind::Timing {
        config.timing_repeats
    } else {
        1
    };

    let mut times = Vec::with_capacity(repeats);
    let mut outcome = None;
    for _ in 0..repeats {
        let start = thread_cpu_seconds();
        let result = solve(algorithm, problem, config);
        times.push((thread_cpu_seconds() - start).max(0.0));
        outcome.get_or_insert(result);
    }
    let outcome = outcome.expect("at least one repeat");

    let (mse, support_recovered, failed) = match outcome {
        Ok(est) => {
            let mse = squared_error(truth, &est)?;
            if mse.is_finite() {
                let top = linalg::top_k_by_magnitude(&est.taps, truth.sparsity());
                (mse, top == truth.support(), false)
            } else {
                (truth.energy(), false, true)
            }
        }
        Err(_) => (truth.energy(), false, true),
    };

    Ok(TrialRecord {
        experiment: kind,
        algorithm,
        channel_length: config.channel_length,
        training_length: config.training_length,
        sparsity: cell.sparsity,
        snr_db: cell.snr_db,
        trial_index,
        seed,
        mse,
        support_recovered,
        cpu_seconds: median(times),
        failed,
    })
}

/// One algorithm on one Monte-Carlo draw, regenerating the problem.
pub fn run_trial(
    kind: ExperimentKind,
    config: &ExperimentConfig,
    cell: Cell,
    algorithm: Algorithm,
    trial_index: usize,
) -> Result<TrialRecord> {
    let (problem, seed) = build_problem(config, cell, trial_index)?;
    evaluate(kind, config, cell, trial_index, seed, &problem, algorithm)
}

/// Groups records by (algorithm, cell) in order of first appearance.
pub fn aggregate(records: &[TrialRecord]) -> Vec<Aggregate> {
    let mut groups: Vec<(Algorithm, usize, u64, Vec<&TrialRecord>)> = Vec::new();
    for r in records {
        let key = (r.algorithm, r.sparsity, r.snr_db.to_bits());
        match groups.iter_mut().find(|g| (g.0, g.1, g.2) == key) {
            Some(g) => g.3.push(r),
            None => groups.push((key.0, key.1, key.2, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(algorithm, sparsity, snr_bits, rs)| {
            let n = rs.len() as f64;
            let mean_mse = rs.iter().map(|r| r.mse).sum::<f64>() / n;
            let var = if rs.len() > 1 {
                rs.iter().map(|r| (r.mse - mean_mse).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            Aggregate {
                algorithm,
                sparsity,
                snr_db: f64::from_bits(snr_bits),
                trials: rs.len(),
                mean_mse,
                mse_std_error: (var / n).sqrt(),
                mean_cpu_seconds: rs.iter().map(|r| r.cpu_seconds).sum::<f64>() / n,
                success_rate: rs.iter().filter(|r| r.support_recovered).count() as f64 / n,
                failures: rs.iter().filter(|r| r.failed).count(),
            }
        })
        .collect()
}

/// Runs every (cell, trial) of `kind`, all configured algorithms per draw.
pub fn run_sweep(config: &ExperimentConfig, kind: ExperimentKind) -> Result<SweepResult> {
    config.validate()?;
    let cells = config.cells(kind);
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.trials).map(move |t| (c, t)))
        .collect();

    let run_job = |&(c, t): &(usize, usize)| -> Result<Vec<(usize, TrialRecord)>> {
        let cell = cells[c];
        let (problem, seed) = build_problem(config, cell, t)?;
        config
            .algorithms
            .iter()
            .map(|&alg| evaluate(kind, config, cell, t, seed, &problem, alg).map(|r| (c, r)))
            .collect()
    };

    #[cfg(feature = "parallel")]
    let batches: Vec<_> = jobs.par_iter().map(run_job).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let batches: Vec<_> = jobs.iter().map(run_job).collect::<Result<_>>()?;

    let position = |a: Algorithm| config.algorithms.iter().position(|&b| b == a).unwrap_or(usize::MAX);
    let mut keyed: Vec<(usize, TrialRecord)> = batches.into_iter().flatten().collect();
    keyed.sort_by_key(|(c, r)| (position(r.algorithm), *c, r.trial_index));
    let records: Vec<TrialRecord> = keyed.into_iter().map(|(_, r)| r).collect();

    Ok(SweepResult {
        kind,
        config: config.clone(),
        aggregates: aggregate(&records),
        records,
    })
}

/// MSE against sparsity at the fixed SNR.
pub fn sweep_sparsity(config: &ExperimentConfig) -> Result<SweepResult> {
    run_sweep(config, ExperimentKind::Sparsity)
}

/// MSE against SNR at the fixed sparsity.
pub fn sweep_snr(config: &ExperimentConfig) -> Result<SweepResult> {
    run_sweep(config, ExperimentKind::Snr)
}

/// Solver CPU time against sparsity at the fixed SNR.
pub fn timing_benchmark(config: &ExperimentConfig) -> Result<SweepResult> {
    run_sweep(config, ExperimentKind::Timing)
}
