use chanest::channel::{
    generate_channel, generate_training, synthesize_measurement, EstimationProblem, NoiseSpec, TrainingMatrix,
};
use chanest::sl0::{
    ascent_direction, correlation_constraint_satisfied, feasible_projection, msl0_solve, msl0_solve_traced,
    smoothness_measure, Msl0Params,
};
use chanest::{CMatrix, CVector, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_cvec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CVector {
    CVector::from_fn(n, |_, _| {
        Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
    })
}

fn random_cmat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn j_sigma_by_hand(h: &CVector, sigma: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..h.len() {
        let m2 = h[i].re * h[i].re + h[i].im * h[i].im;
        total += (-m2 / (2.0 * sigma * sigma)).exp();
    }
    total
}

#[test]
fn direction_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let step = 1e-6;
    for _ in 0..100 {
        let sigma = rng.random_range(0.3..2.0);
        let h = random_cvec(&mut rng, 8, 1.5);
        let d = ascent_direction(&h, sigma).unwrap();
        for i in 0..8 {
            for imag in [false, true] {
                let delta = if imag {
                    Complex64::new(0.0, step)
                } else {
                    Complex64::new(step, 0.0)
                };
                let mut plus = h.clone();
                plus[i] += delta;
                let mut minus = h.clone();
                minus[i] -= delta;
                let fd = (j_sigma_by_hand(&plus, sigma) - j_sigma_by_hand(&minus, sigma)) / (2.0 * step);
                // d = -sigma^2 * grad J
                let analytic = -(if imag { d[i].im } else { d[i].re }) / (sigma * sigma);
                let scale = analytic.abs().max(1e-3);
                assert!((fd - analytic).abs() / scale < 1e-5, "fd {fd} vs analytic {analytic}");
            }
        }
    }
}

#[test]
fn measure_matches_direct_summation_on_planted_channel() {
    let mut seed = 0;
    let h = loop {
        let h = generate_channel(80, 4, 1.0, seed).unwrap();
        if h.support().iter().all(|&i| h.taps()[i].norm() >= 0.1) {
            break h;
        }
        seed += 1;
    };
    let j = smoothness_measure(h.taps(), 1e-3).unwrap();
    assert!((80.0 - j - 4.0).abs() < 1e-6);
    assert!((j - j_sigma_by_hand(h.taps(), 1e-3)).abs() < 1e-12);
}

#[test]
fn smoothed_count_tracks_l0_for_well_separated_taps() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let sigma: f64 = rng.random_range(1e-3..1.0);
        let len = rng.random_range(1..60);
        let mut h = CVector::from_element(len, Complex64::new(0.0, 0.0));
        let mut nnz = 0;
        for i in 0..len {
            if rng.random_bool(0.3) {
                let mag = sigma * rng.random_range(10.01..100.0);
                h[i] = Complex64::from_polar(mag, rng.random_range(0.0..std::f64::consts::TAU));
                nnz += 1;
            }
        }
        let count = len as f64 - smoothness_measure(&h, sigma).unwrap();
        assert!((count - nnz as f64).abs() < len as f64 * (-50f64).exp());
    }
}

#[test]
fn projection_is_idempotent_and_feasible() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for s in 0..50 {
        let x = generate_training(16, 32, s).unwrap();
        let y = random_cvec(&mut rng, 16, 1.0);
        let p = EstimationProblem::new(x, y.clone(), NoiseSpec::noiseless()).unwrap();
        let h = random_cvec(&mut rng, 32, 2.0);
        let once = feasible_projection(&h, &p, 1e-10).unwrap();
        let twice = feasible_projection(&once, &p, 1e-10).unwrap();
        assert!((&twice - &once).norm() <= 1e-12 * once.norm().max(1.0));
        assert!((p.x() * &once - &y).norm() <= 1e-10 * y.norm());
        // Correction lies in the row space: orthogonal to the null space.
        let correction = &once - &h;
        let svd = p.x().clone().svd(false, true);
        let v_t = svd.v_t.unwrap();
        let row_part = v_t.adjoint() * (&v_t * &correction);
        assert!((&row_part - &correction).norm() <= 1e-10 * correction.norm());
    }
}

#[test]
fn feasible_point_is_unchanged() {
    let x = generate_training(10, 20, 3).unwrap();
    let h = generate_channel(20, 3, 1.0, 4).unwrap();
    let p = synthesize_measurement(&x, &h, f64::INFINITY, 0).unwrap();
    let projected = feasible_projection(h.taps(), &p, 1e-10).unwrap();
    assert!((&projected - h.taps()).norm() < 1e-13);
}

#[test]
fn projection_is_nearest_feasible_point() {
    // Independent route: particular solution plus null-space coordinates from
    // an SVD, then the closest point by orthogonal decomposition.
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..10 {
        let x = random_cmat(&mut rng, 3, 5);
        let y = random_cvec(&mut rng, 3, 1.0);
        let h = random_cvec(&mut rng, 5, 1.0);
        let p = EstimationProblem::new(
            TrainingMatrix::from_matrix(x.clone()).unwrap(),
            y.clone(),
            NoiseSpec::noiseless(),
        )
        .unwrap();
        let projected = feasible_projection(&h, &p, 1e-10).unwrap();

        let svd = x.clone().svd(true, true);
        let particular = svd.solve(&y, 1e-14).unwrap();
        let full = nalgebra::linalg::SVD::new(
            {
                let mut padded = CMatrix::zeros(5, 5);
                padded.rows_mut(0, 3).copy_from(&x);
                padded
            },
            false,
            true,
        );
        let v_t = full.v_t.unwrap();
        // Rows of V^H with zero singular value span the null space.
        let null_rows: Vec<usize> = (0..5).filter(|&k| full.singular_values[k] < 1e-10).collect();
        assert_eq!(null_rows.len(), 2);
        let mut oracle = particular.clone();
        for &k in &null_rows {
            let basis = v_t.row(k).adjoint();
            let coef = basis.dotc(&(&h - &particular));
            oracle += basis * coef;
        }
        assert!(
            (&oracle - &projected).norm() < 1e-10,
            "{}",
            (&oracle - &projected).norm()
        );
    }
}

#[test]
fn rank_deficient_training_is_rejected() {
    let row = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.5, 0.5),
    ];
    let x = CMatrix::from_fn(2, 3, |_, j| row[j]);
    let p = EstimationProblem::new(
        TrainingMatrix::from_matrix(x).unwrap(),
        CVector::zeros(2),
        NoiseSpec::noiseless(),
    )
    .unwrap();
    assert!(matches!(
        feasible_projection(&CVector::zeros(3), &p, 1e-10),
        Err(chanest::Error::NumericalRank { .. })
    ));
    assert!(msl0_solve(&p, &Msl0Params::default()).is_err());
}

#[test]
fn noiseless_iterates_stay_feasible() {
    for s in 0..10 {
        let x = generate_training(16, 32, s).unwrap();
        let h = generate_channel(32, 3, 1.0, s + 50).unwrap();
        let p = synthesize_measurement(&x, &h, f64::INFINITY, 0).unwrap();
        let (_, trace) = msl0_solve_traced(&p, &Msl0Params::default()).unwrap();
        assert!(!trace.is_empty());
        for t in &trace {
            assert!(t.residual_norm <= 1e-8 * p.y().norm());
        }
    }
}

#[test]
fn noiseless_recovery_small_problem() {
    let mut ok = 0;
    let trials = 40;
    for s in 0..trials {
        let x = generate_training(16, 32, 1000 + s).unwrap();
        let h = generate_channel(32, 2, chanest::channel::DEFAULT_TAP_STD, 2000 + s).unwrap();
        let p = synthesize_measurement(&x, &h, f64::INFINITY, 0).unwrap();
        let est = msl0_solve(&p, &Msl0Params::default()).unwrap();
        if (&est.taps - h.taps()).norm() / h.taps().norm() <= 1e-4 {
            ok += 1;
        }
    }
    assert!(ok as f64 >= 0.95 * trials as f64, "{ok}/{trials}");
}

#[test]
fn noiseless_recovery_at_logarithmic_sampling() {
    let len = 60usize;
    let log_l = (len as f64).ln().ceil() as usize;
    for t in 1..=5 {
        let rows = 2 * t * log_l;
        let mut ok = 0;
        for s in 0..100u64 {
            let x = generate_training(rows, len, 7 * s + t as u64).unwrap();
            let h = generate_channel(len, t, chanest::channel::DEFAULT_TAP_STD, 9 * s + 1).unwrap();
            let p = synthesize_measurement(&x, &h, f64::INFINITY, 0).unwrap();
            let est = msl0_solve(&p, &Msl0Params::default()).unwrap();
            if (&est.taps - h.taps()).norm() / h.taps().norm() <= 1e-3 {
                ok += 1;
            }
        }
        assert!(ok >= 90, "T={t} N={rows}: {ok}/100");
    }
}

#[test]
fn correlation_check_matches_entrywise_maximum() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let x = random_cmat(&mut rng, 5, 8);
    let y = random_cvec(&mut rng, 5, 1.0);
    let h = random_cvec(&mut rng, 8, 0.5);
    let p = EstimationProblem::new(
        TrainingMatrix::from_matrix(x.clone()).unwrap(),
        y.clone(),
        NoiseSpec::noiseless(),
    )
    .unwrap();
    let mut max = 0.0f64;
    for j in 0..8 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..5 {
            let mut r = y[i];
            for k in 0..8 {
                r -= x[(i, k)] * h[k];
            }
            acc += x[(i, j)].conj() * r;
        }
        max = max.max(acc.norm());
    }
    assert!(correlation_constraint_satisfied(&h, &p, max * (1.0 + 1e-12)));
    assert!(!correlation_constraint_satisfied(&h, &p, max * (1.0 - 1e-9)));
}
