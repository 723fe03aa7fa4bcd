use chanest::bench::{Algorithm, ExperimentKind, TrialRecord};
use chanest::report::{mask_cpu_seconds, read_records, write_csv_atomic, write_records};
use proptest::prelude::*;

fn any_real() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>(),
        Just(f64::INFINITY),
        Just(f64::NEG_INFINITY),
        Just(0.0),
        1e-300f64..1e300
    ]
}

prop_compose! {
    fn any_record()(
        alg in 0usize..6,
        kind in 0usize..3,
        l in 1usize..500,
        n in 1usize..500,
        t in 0usize..50,
        snr in any_real(),
        trial in any::<u32>(),
        seed in any::<u64>(),
        mse in any_real(),
        ok in any::<bool>(),
        cpu in 0.0f64..10.0,
        failed in any::<bool>(),
    ) -> TrialRecord {
        TrialRecord {
            experiment: [ExperimentKind::Sparsity, ExperimentKind::Snr, ExperimentKind::Timing][kind],
            algorithm: Algorithm::ALL[alg],
            channel_length: l,
            training_length: n,
            sparsity: t,
            snr_db: snr,
            trial_index: trial as usize,
            seed,
            mse,
            support_recovered: ok,
            cpu_seconds: cpu,
            failed,
        }
    }
}

fn same(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a.to_bits() == b.to_bits()
}

proptest! {
    #[test]
    fn csv_round_trips(records in proptest::collection::vec(any_record(), 0..20)) {
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = read_records(&text).unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (a, b) in records.iter().zip(&back) {
            prop_assert_eq!(a.algorithm, b.algorithm);
            prop_assert_eq!(a.experiment, b.experiment);
            prop_assert_eq!((a.channel_length, a.training_length, a.sparsity), (b.channel_length, b.training_length, b.sparsity));
            prop_assert_eq!((a.trial_index, a.seed, a.support_recovered, a.failed), (b.trial_index, b.seed, b.support_recovered, b.failed));
            prop_assert!(same(a.snr_db, b.snr_db));
            prop_assert!(same(a.mse, b.mse));
            prop_assert!(same(a.cpu_seconds, b.cpu_seconds));
        }
        prop_assert_eq!(mask_cpu_seconds(&text).lines().count(), text.lines().count());
    }
}

#[test]
fn atomic_write_replaces_file_and_leaves_no_temp() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    std::fs::write(&path, "stale").unwrap();
    write_csv_atomic(&path, &[]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.trim_end(), chanest::report::CSV_HEADER);
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);
}

#[test]
fn atomic_write_into_missing_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    assert!(write_csv_atomic(&path, &[]).is_err());
    assert!(!path.exists());
}
