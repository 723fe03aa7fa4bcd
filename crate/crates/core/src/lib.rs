//! Compressive estimation of sparse multipath channels.
//!
//! The crate is organised around the measurement model `y = X h + z`, where
//! `X` is an `N x L` complex Toeplitz training matrix and `h` a length-`L`
//! channel with only `T` nonzero taps:
//!
//! * [`channel`] plants random sparse channels, builds training matrices and
//!   synthesises noisy observations.
//! * [`sl0`] is the noise-aware smoothed-l0 (MSL0) solver.
//! * [`baselines`] holds the comparison estimators: minimum-norm least
//!   squares, the support oracle, OMP, CoSaMP, LASSO and a brute-force l0
//!   search for tiny problems.
//! * [`bench`] runs paired Monte-Carlo sweeps over sparsity and SNR.
//! * [`config`] and [`report`] read experiment configurations and write the
//!   per-trial CSV consumed by plotting tools.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bench;
pub mod channel;
pub mod config;
mod cpu_time;
mod error;
pub mod linalg;
pub mod report;
pub mod sl0;

pub use num_complex::Complex64;

pub use crate::cpu_time::thread_cpu_seconds;
pub use crate::error::{Error, Result};

/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<Complex64>;

/// Output of any estimator: the recovered taps plus bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub taps: CVector,
    pub iterations: usize,
    /// Last smoothing width reached; zero for solvers without one.
    pub sigma_final: f64,
    pub cpu_seconds: f64,
    pub solver_name: &'static str,
}

impl Estimate {
    pub(crate) fn new(taps: CVector, solver_name: &'static str) -> Self {
        Self {
            taps,
            iterations: 0,
            sigma_final: 0.0,
            cpu_seconds: 0.0,
            solver_name,
        }
    }

    /// Indices of nonzero taps, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.taps
            .iter()
            .enumerate()
            .filter(|(_, t)| **t != Complex64::new(0.0, 0.0))
            .map(|(i, _)| i)
            .collect()
    }
}
