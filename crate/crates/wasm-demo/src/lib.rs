//! Browser bindings for the `chanest` estimators.
//!
//! Each export has a plain Rust counterpart (`*_native`) returning
//! [`chanest::Result`] so it can be tested off the browser.

use chanest::bench::{self, Algorithm, Cell, ExperimentConfig, ExperimentKind};
use chanest::sl0::msl0_solve_traced;
use wasm_bindgen::prelude::*;

/// Problem shape shared by all demo operations.
fn demo_config(channel_length: usize, training_length: usize, seed: u32) -> ExperimentConfig {
    ExperimentConfig {
        channel_length,
        training_length,
        base_seed: u64::from(seed),
        ..ExperimentConfig::default()
    }
}

fn js_err(e: chanest::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Planted and estimated tap magnitudes of one problem.
#[wasm_bindgen]
pub struct Recovery {
    truth: Vec<f64>,
    estimate: Vec<f64>,
    mse: f64,
    iterations: usize,
}

#[wasm_bindgen]
impl Recovery {
    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn estimate(&self) -> Vec<f64> {
        self.estimate.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn mse(&self) -> f64 {
        self.mse
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

pub fn recover_native(
    algorithm: &str,
    channel_length: usize,
    training_length: usize,
    sparsity: usize,
    snr_db: f64,
    seed: u32,
) -> chanest::Result<Recovery> {
    let algorithm: Algorithm = algorithm.parse()?;
    let cfg = demo_config(channel_length, training_length, seed);
    let cell = Cell { sparsity, snr_db };
    let (problem, _) = bench::build_problem(&cfg, cell, 0)?;
    let truth = problem.truth.clone().expect("generated problems carry the channel");
    let est = bench::solve(algorithm, &problem, &cfg)?;
    Ok(Recovery {
        truth: truth.taps().iter().map(|c| c.norm()).collect(),
        estimate: est.taps.iter().map(|c| c.norm()).collect(),
        mse: bench::squared_error(&truth, &est)?,
        iterations: est.iterations,
    })
}

/// Draws one problem and solves it with `algorithm` (`ls`, `oracle`, `omp`,
/// `cosamp`, `lasso` or `msl0`).
#[wasm_bindgen]
pub fn recover(
    algorithm: &str,
    channel_length: usize,
    training_length: usize,
    sparsity: usize,
    snr_db: f64,
    seed: u32,
) -> Result<Recovery, JsError> {
    recover_native(algorithm, channel_length, training_length, sparsity, snr_db, seed).map_err(js_err)
}

/// Per-level state of the smoothed-l0 continuation.
#[wasm_bindgen]
pub struct SigmaTrace {
    sigma: Vec<f64>,
    smoothed_l0: Vec<f64>,
    residual: Vec<f64>,
    true_sparsity: usize,
}

#[wasm_bindgen]
impl SigmaTrace {
    #[wasm_bindgen(getter)]
    pub fn sigma(&self) -> Vec<f64> {
        self.sigma.clone()
    }

    #[wasm_bindgen(getter, js_name = smoothedL0)]
    pub fn smoothed_l0(&self) -> Vec<f64> {
        self.smoothed_l0.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn residual(&self) -> Vec<f64> {
        self.residual.clone()
    }

    #[wasm_bindgen(getter, js_name = trueSparsity)]
    pub fn true_sparsity(&self) -> usize {
        self.true_sparsity
    }
}

pub fn sigma_trace_native(
    channel_length: usize,
    training_length: usize,
    sparsity: usize,
    snr_db: f64,
    seed: u32,
) -> chanest::Result<SigmaTrace> {
    let cfg = demo_config(channel_length, training_length, seed);
    let (problem, _) = bench::build_problem(&cfg, Cell { sparsity, snr_db }, 0)?;
    let (_, levels) = msl0_solve_traced(&problem, &cfg.msl0.params_for(&problem))?;
    Ok(SigmaTrace {
        sigma: levels.iter().map(|l| l.sigma).collect(),
        smoothed_l0: levels.iter().map(|l| l.smoothed_l0).collect(),
        residual: levels.iter().map(|l| l.residual_norm).collect(),
        true_sparsity: sparsity,
    })
}

#[wasm_bindgen(js_name = sigmaTrace)]
pub fn sigma_trace(
    channel_length: usize,
    training_length: usize,
    sparsity: usize,
    snr_db: f64,
    seed: u32,
) -> Result<SigmaTrace, JsError> {
    sigma_trace_native(channel_length, training_length, sparsity, snr_db, seed).map_err(js_err)
}

/// Mean MSE per algorithm over an SNR grid.
#[wasm_bindgen]
pub struct SnrSweep {
    snr_db: Vec<f64>,
    labels: Vec<String>,
    // Row-major: one row of snr_db.len() values per algorithm.
    mse: Vec<f64>,
}

#[wasm_bindgen]
impl SnrSweep {
    #[wasm_bindgen(getter, js_name = snrDb)]
    pub fn snr_db(&self) -> Vec<f64> {
        self.snr_db.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn algorithms(&self) -> Vec<String> {
        self.labels.clone()
    }

    /// Mean MSE curve of the `index`-th algorithm.
    pub fn curve(&self, index: usize) -> Vec<f64> {
        let n = self.snr_db.len();
        self.mse
            .get(index * n..(index + 1) * n)
            .map(<[f64]>::to_vec)
            .unwrap_or_default()
    }
}

pub fn snr_sweep_native(
    channel_length: usize,
    training_length: usize,
    sparsity: usize,
    trials: usize,
    seed: u32,
) -> chanest::Result<SnrSweep> {
    let cfg = ExperimentConfig {
        snr_values_db: (0..=30).step_by(5).map(f64::from).collect(),
        fixed_sparsity: sparsity,
        trials,
        algorithms: vec![
            Algorithm::Oracle,
            Algorithm::Omp,
            Algorithm::Cosamp,
            Algorithm::Lasso,
            Algorithm::Msl0,
        ],
        ..demo_config(channel_length, training_length, seed)
    };
    let result = bench::run_sweep(&cfg, ExperimentKind::Snr)?;
    Ok(SnrSweep {
        snr_db: cfg.snr_values_db.clone(),
        labels: cfg.algorithms.iter().map(|a| a.label().to_string()).collect(),
        mse: cfg.algorithms.iter().flat_map(|&a| result.mse_curve(a)).collect(),
    })
}

/// Small Monte-Carlo MSE-vs-SNR sweep (0 to 30 dB in 5 dB steps).
#[wasm_bindgen(js_name = snrSweep)]
pub fn snr_sweep(
    channel_length: usize,
    training_length: usize,
    sparsity: usize,
    trials: usize,
    seed: u32,
) -> Result<SnrSweep, JsError> {
    snr_sweep_native(channel_length, training_length, sparsity, trials, seed).map_err(js_err)
}
