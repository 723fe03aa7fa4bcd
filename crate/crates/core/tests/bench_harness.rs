use chanest::bench::{
    aggregate, build_problem, run_sweep, run_trial, sweep_snr, sweep_sparsity, timing_benchmark, Algorithm, Cell,
    ExperimentConfig, ExperimentKind,
};

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        channel_length: 30,
        training_length: 20,
        sparsity_values: vec![2, 4],
        snr_values_db: vec![0.0, 20.0],
        trials: 6,
        base_seed: 11,
        ..ExperimentConfig::default()
    }
}

#[test]
fn sweep_produces_one_record_per_algorithm_cell_trial() {
    let cfg = small_config();
    let result = sweep_sparsity(&cfg).unwrap();
    assert_eq!(
        result.records.len(),
        cfg.algorithms.len() * cfg.sparsity_values.len() * cfg.trials
    );
    assert_eq!(
        result.aggregates.len(),
        cfg.algorithms.len() * cfg.sparsity_values.len()
    );
    let result = sweep_snr(&cfg).unwrap();
    assert_eq!(
        result.records.len(),
        cfg.algorithms.len() * cfg.snr_values_db.len() * cfg.trials
    );
}

#[test]
fn sweeps_match_sequential_trials() {
    let cfg = small_config();
    let result = sweep_sparsity(&cfg).unwrap();
    for r in &result.records {
        let cell = Cell {
            sparsity: r.sparsity,
            snr_db: r.snr_db,
        };
        let again = run_trial(ExperimentKind::Sparsity, &cfg, cell, r.algorithm, r.trial_index).unwrap();
        assert_eq!(again.seed, r.seed);
        assert_eq!(again.mse.to_bits(), r.mse.to_bits());
        assert_eq!(again.support_recovered, r.support_recovered);
    }
}

#[test]
fn algorithms_share_each_trial_problem() {
    let cfg = small_config();
    let result = sweep_sparsity(&cfg).unwrap();
    for trial in 0..cfg.trials {
        let seeds: Vec<u64> = result
            .records
            .iter()
            .filter(|r| r.trial_index == trial && r.sparsity == 4)
            .map(|r| r.seed)
            .collect();
        assert_eq!(seeds.len(), cfg.algorithms.len());
        assert!(seeds.iter().all(|&s| s == seeds[0]));
    }
}

#[test]
fn trials_draw_distinct_problems() {
    let cfg = small_config();
    let cell = Cell {
        sparsity: 4,
        snr_db: 10.0,
    };
    let (a, sa) = build_problem(&cfg, cell, 0).unwrap();
    let (b, sb) = build_problem(&cfg, cell, 1).unwrap();
    assert_ne!(sa, sb);
    assert_ne!(a.y(), b.y());
}

#[test]
fn aggregates_are_arithmetic_means() {
    let cfg = small_config();
    let result = sweep_sparsity(&cfg).unwrap();
    for agg in &result.aggregates {
        let group: Vec<_> = result
            .records
            .iter()
            .filter(|r| r.algorithm == agg.algorithm && r.sparsity == agg.sparsity)
            .collect();
        let mean = group.iter().map(|r| r.mse).sum::<f64>() / group.len() as f64;
        assert_eq!(agg.trials, group.len());
        assert!((agg.mean_mse - mean).abs() <= 1e-15 * mean.max(1e-300));
        let success = group.iter().filter(|r| r.support_recovered).count() as f64 / group.len() as f64;
        assert!((agg.success_rate - success).abs() < 1e-15);
    }
    assert_eq!(aggregate(&result.records).len(), result.aggregates.len());
}

#[test]
fn noiseless_cells_are_solved_exactly() {
    let cfg = ExperimentConfig {
        channel_length: 40,
        training_length: 24,
        snr_values_db: vec![f64::INFINITY],
        fixed_sparsity: 3,
        trials: 10,
        ..ExperimentConfig::default()
    };
    let result = run_sweep(&cfg, ExperimentKind::Snr).unwrap();
    let cell = Cell {
        sparsity: 3,
        snr_db: f64::INFINITY,
    };
    assert!(result.aggregate(Algorithm::Oracle, cell).unwrap().mean_mse <= 1e-20);
    for alg in [Algorithm::Msl0, Algorithm::Omp, Algorithm::Cosamp] {
        let agg = result.aggregate(alg, cell).unwrap();
        assert!(agg.mean_mse <= 1e-6, "{alg}: {}", agg.mean_mse);
        assert_eq!(agg.failures, 0);
    }
}

#[test]
fn timing_records_positive_cpu_time() {
    let cfg = ExperimentConfig {
        trials: 2,
        sparsity_values: vec![4],
        algorithms: vec![Algorithm::Msl0, Algorithm::Lasso],
        timing_repeats: 3,
        ..ExperimentConfig::default()
    };
    let result = timing_benchmark(&cfg).unwrap();
    assert_eq!(result.records.len(), 4);
    assert!(result
        .records
        .iter()
        .all(|r| r.cpu_seconds > 0.0 && r.cpu_seconds.is_finite()));
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = small_config();
    cfg.trials = 0;
    assert!(sweep_sparsity(&cfg).is_err());
    let mut cfg = small_config();
    cfg.training_length = 0;
    assert!(sweep_sparsity(&cfg).is_err());
}
