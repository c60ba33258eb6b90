use dialign::diachrone::{monotonic_trend, shift_series, train_incremental, train_sequential, TrainingMode, Trend};
use dialign::embed::{evaluate_pairs, Architecture, TrainConfig, WordPairList};
use dialign::synth::{planted_drift_corpus, stationary_periods};

fn config(seed: u64) -> TrainConfig {
    TrainConfig {
        dim: 30,
        window: 5,
        min_count: 1,
        epochs: 5,
        subsample: 0.0,
        architecture: Architecture::Sgns,
        seed,
        ..TrainConfig::default()
    }
}

fn pairs() -> WordPairList {
    WordPairList::from_reader("alpha0 alpha1\nalpha2 alpha3\nbeta0 beta1\nbeta2 beta3\nalpha0 beta0\n".as_bytes()).unwrap()
}

#[test]
fn planted_drift_recovered() {
    let mut hits = 0;
    for seed in 0..10 {
        let d = planted_drift_corpus(5, 1500, seed);
        let models = train_incremental(&d.periods, &config(seed)).unwrap();
        let s = shift_series(&models, &d.source, &[&d.target_a, &d.target_b], TrainingMode::Incremental).unwrap();
        let (a, b) = (monotonic_trend(&s[0].values).unwrap(), monotonic_trend(&s[1].values).unwrap());
        if a == Trend::Decreasing && b == Trend::Increasing {
            hits += 1;
        }
    }
    assert!(hits >= 9, "{hits}/10");
}

#[test]
fn stationary_incremental_is_flat() {
    let periods = stationary_periods(4, 30_000, 20, 3);
    let models = train_incremental(&periods, &config(1)).unwrap();
    let list = pairs();
    for p in &list.pairs {
        let s = shift_series(&models, &p.source, &[&p.target], TrainingMode::Incremental).unwrap();
        let v: Vec<f64> = s[0].values.iter().flatten().copied().collect();
        let spread = v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= 0.15, "{} {}: {v:?}", p.source, p.target);
    }
}

#[test]
fn stationary_sequential_means_agree() {
    let periods = stationary_periods(4, 30_000, 20, 5);
    let models = train_sequential(&periods, &config(2)).unwrap();
    let means: Vec<f64> = models.iter().map(|m| evaluate_pairs(m, &pairs()).unwrap().mean).collect();
    let spread = means.iter().cloned().fold(f64::MIN, f64::max) - means.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread <= 0.1, "{means:?}");
    for w in models.windows(2) {
        assert_ne!(w[0].get("alpha0"), w[1].get("alpha0"));
    }
}

#[test]
fn empty_later_periods_keep_model() {
    let mut periods = stationary_periods(1, 5_000, 10, 1);
    periods.push(Vec::new());
    let models = train_incremental(&periods, &config(4)).unwrap();
    assert_eq!(models[0].vocab(), models[1].vocab());
    for w in models[0].vocab().words() {
        assert_eq!(models[0].get(w), models[1].get(w));
    }
}

#[test]
fn single_period_matches_plain_training() {
    let periods = stationary_periods(1, 5_000, 10, 1);
    let seq = train_sequential(&periods, &config(4)).unwrap();
    let direct = dialign::embed::train(&periods[0], &config(4), None).unwrap();
    assert_eq!(seq[0], direct);
}

#[test]
fn period_errors_carry_index() {
    let mut periods = stationary_periods(1, 2_000, 10, 1);
    periods.push(vec![vec!["lonely".to_string()]]);
    let err = train_sequential(&periods, &config(1)).unwrap_err();
    assert!(matches!(err, dialign::Error::Period { index: 2, .. }), "{err}");
}
