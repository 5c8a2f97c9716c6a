use proptest::prelude::*;
use screenalloc::data::german::{check_canonical, GermanRecord};
use screenalloc::data::{
    build_german_instance, discretize_beta, fit_german, gen_synthetic, load_german, GermanCosts, LogisticConfig,
    Regime, GERMAN_BUDGET,
};
use screenalloc::model::{validate_instance, UtilitySpec};
use std::path::PathBuf;

fn german_path() -> PathBuf {
    std::env::var_os("GERMAN_CREDIT_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/german.data"))
}

fn german() -> Vec<GermanRecord> {
    let path = german_path();
    load_german(&path).unwrap_or_else(|e| panic!("German Credit data needed at {} ({e})", path.display()))
}

fn good_rate(records: &[&GermanRecord]) -> f64 {
    records.iter().filter(|r| r.good).count() as f64 / records.len() as f64
}

#[test]
fn german_counts_and_rates() {
    let recs = german();
    check_canonical(&recs).unwrap();
    let (targeted, other): (Vec<_>, Vec<_>) = recs.iter().partition(|r| !r.owns_residence);
    assert!((good_rate(&targeted) - 0.60).abs() <= 0.01);
    assert!((good_rate(&other) - 0.74).abs() <= 0.01);
}

#[test]
fn german_fit_is_calibrated_in_the_mean() {
    let recs = german();
    let fit = fit_german(&recs, &LogisticConfig::default()).unwrap();
    let mean = fit.probabilities.iter().sum::<f64>() / recs.len() as f64;
    assert!((mean - 0.700).abs() < 1e-3);
    assert!(fit.probabilities.iter().all(|&p| p > 0.0 && p < 1.0));
}

#[test]
fn german_instance() {
    let recs = german();
    let fit = fit_german(&recs, &LogisticConfig::default()).unwrap();
    let inst = build_german_instance(
        &recs,
        &fit.probabilities,
        GermanCosts::default(),
        GERMAN_BUDGET,
        UtilitySpec::LENDING,
    )
    .unwrap();
    assert!(validate_instance(&inst).is_empty());
    let targeted: Vec<_> = recs.iter().filter(|r| !r.owns_residence).collect();
    let expected_mu = UtilitySpec::LENDING
        .utility_from_repay_prob(good_rate(&targeted))
        .unwrap();
    for a in inst.applicants.iter().filter(|a| a.group == 0) {
        assert_eq!(a.mu, expected_mu);
        let post = a.posterior.as_ref().unwrap();
        assert!(post.len() <= 201);
        assert!((post.mean() - a.mu).abs() <= 1e-9);
    }
    assert!((expected_mu - 520.0).abs() <= 12.0);
    assert!(inst
        .applicants
        .iter()
        .filter(|a| a.group == 1)
        .all(|a| a.posterior.is_none()));
}

#[test]
fn synthetic_regimes_are_valid() {
    for r in Regime::ALL {
        let inst = gen_synthetic(&r.config(7), UtilitySpec::LENDING).unwrap();
        assert!(validate_instance(&inst).is_empty(), "{r}");
        assert_eq!(inst.applicants[0].screen_cost, r.config(7).screen_cost);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn discretized_beta_properties(mean in 0.05f64..0.95, count in 1.0f64..60.0, bins in 2usize..150) {
        let d = discretize_beta(mean, count, bins).unwrap();
        prop_assert!(d.probs.iter().all(|&p| p >= 0.0));
        prop_assert!((d.probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!((d.mean() - mean).abs() <= 2.0 / bins as f64);
    }
}
