//! Sparse multipath channels, Toeplitz training matrices and the noisy
//! measurement model `y = X h + z`.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::linalg::{self, RowProjector};
use crate::{CMatrix, CVector, Complex64, Error, Result};

/// Per-component tap standard deviation giving unit expected tap power.
pub const DEFAULT_TAP_STD: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Planted ground-truth channel: `L` complex taps, `T` of them nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseChannel {
    taps: CVector,
    support: Vec<usize>,
}

impl SparseChannel {
    /// Builds a channel from explicit taps; the support is read off the
    /// nonzero entries.
    pub fn from_taps(taps: CVector) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::invalid("channel length must be at least 1"));
        }
        let support = taps
            .iter()
            .enumerate()
            .filter(|(_, t)| t.norm_sqr() != 0.0)
            .map(|(i, _)| i)
            .collect();
        Ok(Self { taps, support })
    }

    pub fn taps(&self) -> &CVector {
        &self.taps
    }

    /// Ascending indices of the dominant taps.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    /// Number of taps with `|h_i| != 0`.
    pub fn l0_norm(&self) -> usize {
        self.taps.iter().filter(|t| t.norm_sqr() != 0.0).count()
    }

    pub fn energy(&self) -> f64 {
        self.taps.norm_squared()
    }
}

/// `N x L` complex measurement operator.
///
/// Generated matrices are Toeplitz, `entries[i][j] = g[i - j + L - 1]`, built
/// from a generator sequence of length `N + L - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingMatrix {
    entries: CMatrix,
    generator: Option<Vec<Complex64>>,
}

impl TrainingMatrix {
    /// Wraps an arbitrary matrix (external data, unit tests).
    pub fn from_matrix(entries: CMatrix) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::invalid("training matrix must have nonzero dimensions"));
        }
        Ok(Self {
            entries,
            generator: None,
        })
    }

    /// Builds the Toeplitz matrix `entries[i][j] = generator[i + cols - 1 - j]`.
    pub fn toeplitz(rows: usize, cols: usize, generator: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("training matrix must have nonzero dimensions"));
        }
        if generator.len() != rows + cols - 1 {
            return Err(Error::invalid(format!(
                "generator length {} != rows + cols - 1 = {}",
                generator.len(),
                rows + cols - 1
            )));
        }
        let entries = CMatrix::from_fn(rows, cols, |i, j| generator[i + cols - 1 - j]);
        Ok(Self {
            entries,
            generator: Some(generator),
        })
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn generator(&self) -> Option<&[Complex64]> {
        self.generator.as_deref()
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_toeplitz(&self) -> bool {
        let m = &self.entries;
        (0..m.nrows().saturating_sub(1))
            .all(|i| (0..m.ncols().saturating_sub(1)).all(|j| m[(i, j)] == m[(i + 1, j + 1)]))
    }

    /// Eigenvalue ratio of `X X^H`; zero means rank deficient.
    pub fn row_gram_ratio(&self) -> f64 {
        linalg::eigen_ratio(&(&self.entries * self.entries.adjoint()))
    }

    pub fn projector(&self) -> Result<RowProjector> {
        RowProjector::new(&self.entries)
    }
}

/// Noise level of one measurement, both as SNR and as `E|z_i|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: f64,
    /// Total complex variance per measurement (`E|z_i|^2`); each of the real
    /// and imaginary parts carries half of it.
    pub noise_variance: f64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            snr_db: f64::INFINITY,
            noise_variance: 0.0,
        }
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_variance.sqrt()
    }

    /// Variance implied by `snr_db` for a given mean signal power.
    pub fn from_snr(snr_db: f64, signal_power: f64) -> Self {
        let noise_variance = if snr_db == f64::INFINITY {
            0.0
        } else {
            signal_power / 10f64.powf(snr_db / 10.0)
        };
        Self { snr_db, noise_variance }
    }
}

/// One instance of `y = X h + z`.
#[derive(Clone, Debug)]
pub struct EstimationProblem {
    pub matrix: TrainingMatrix,
    pub observation: CVector,
    pub noise: NoiseSpec,
    pub truth: Option<SparseChannel>,
}

impl EstimationProblem {
    /// Problem from external data (no ground truth).
    pub fn new(matrix: TrainingMatrix, observation: CVector, noise: NoiseSpec) -> Result<Self> {
        if observation.len() != matrix.rows() {
            return Err(Error::invalid(format!(
                "observation length {} != matrix rows {}",
                observation.len(),
                matrix.rows()
            )));
        }
        Ok(Self {
            matrix,
            observation,
            noise,
            truth: None,
        })
    }

    pub fn x(&self) -> &CMatrix {
        self.matrix.entries()
    }

    pub fn y(&self) -> &CVector {
        &self.observation
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }
}

fn complex_normal(rng: &mut ChaCha8Rng, std: f64) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(std * re, std * im)
}

/// Draws a channel with `sparsity` taps at uniformly random distinct delays;
/// each tap has independent `N(0, tap_std^2)` real and imaginary parts.
pub fn generate_channel(length: usize, sparsity: usize, tap_std: f64, seed: u64) -> Result<SparseChannel> {
    if length == 0 {
        return Err(Error::invalid("channel length must be at least 1"));
    }
    if sparsity > length {
        return Err(Error::invalid(format!(
            "sparsity {sparsity} exceeds channel length {length}"
        )));
    }
    if !(tap_std > 0.0 && tap_std.is_finite()) {
        return Err(Error::invalid(format!("tap_std must be positive, got {tap_std}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut support = index::sample(&mut rng, length, sparsity).into_vec();
    support.sort_unstable();
    let dist = Normal::new(0.0, tap_std).expect("validated std");
    let mut taps = linalg::zeros(length);
    for &i in &support {
        // A zero draw has probability zero, but the support invariant must hold.
        loop {
            let t = Complex64::new(dist.sample(&mut rng), dist.sample(&mut rng));
            if t.norm_sqr() > 0.0 {
                taps[i] = t;
                break;
            }
        }
    }
    Ok(SparseChannel { taps, support })
}

/// Random `rows x cols` Toeplitz training matrix with unit-norm columns.
///
/// Generator entries are circular complex Gaussian. Their magnitudes repeat
/// with period `rows` (phases stay independent), so every length-`rows`
/// window carries the same energy; one common scale then makes all columns
/// unit norm without breaking the Toeplitz structure.
pub fn generate_training(rows: usize, cols: usize, seed: u64) -> Result<TrainingMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("training matrix must have nonzero dimensions"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = rows + cols - 1;
    let mut generator: Vec<Complex64> = Vec::with_capacity(len);
    for k in 0..len {
        let g = complex_normal(&mut rng, 1.0);
        if k < rows {
            generator.push(g);
        } else {
            let phase = g.arg();
            generator.push(Complex64::from_polar(generator[k - rows].norm(), phase));
        }
    }
    let window_energy: f64 = generator[..rows].iter().map(|g| g.norm_sqr()).sum();
    let scale = 1.0 / window_energy.sqrt();
    for g in &mut generator {
        *g *= scale;
    }
    TrainingMatrix::toeplitz(rows, cols, generator)
}

/// Forms `y = X h + z` with `z` circular complex Gaussian at the variance
/// implied by `snr_db` relative to the empirical power `||X h||^2 / N`.
/// `snr_db = +inf` gives a noiseless observation.
pub fn synthesize_measurement(
    matrix: &TrainingMatrix,
    channel: &SparseChannel,
    snr_db: f64,
    seed: u64,
) -> Result<EstimationProblem> {
    if matrix.cols() != channel.len() {
        return Err(Error::invalid(format!(
            "matrix has {} columns but channel has {} taps",
            matrix.cols(),
            channel.len()
        )));
    }
    if snr_db.is_nan() {
        return Err(Error::invalid("snr_db is NaN"));
    }
    let clean = matrix.entries() * channel.taps();
    let signal_power = clean.norm_squared() / matrix.rows() as f64;
    let noise = if snr_db == f64::INFINITY {
        NoiseSpec::noiseless()
    } else {
        if signal_power == 0.0 {
            return Err(Error::invalid("finite SNR requested for a zero-power signal"));
        }
        NoiseSpec::from_snr(snr_db, signal_power)
    };
    let observation = if noise.noise_variance > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let component_std = (noise.noise_variance / 2.0).sqrt();
        clean.map(|c| c + complex_normal(&mut rng, component_std))
    } else {
        clean
    };
    Ok(EstimationProblem {
        matrix: matrix.clone(),
        observation,
        noise,
        truth: Some(channel.clone()),
    })
}
