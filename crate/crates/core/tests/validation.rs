use wiretap_core::config::SolverConfig;
use wiretap_core::fading::RayleighFadingPair;
use wiretap_core::policies::*;
use wiretap_core::rates::full_csi_rate;
use wiretap_core::validation::*;

fn full(model: &RayleighFadingPair, p: f64) -> FullCsiPolicy {
    solve_full_csi(model, &PowerConstraint::new(p).unwrap(), &SolverConfig::default()).unwrap()
}

#[test]
fn zero_policy_has_zero_rate() {
    let est = mc_rate(&SchemePolicy::Zero, &RayleighFadingPair::symmetric(), 5000, 1, 4).unwrap();
    assert_eq!(est.mean, 0.0);
    assert_eq!(est.std_err, 0.0);
    assert_eq!(est.mean_power, 0.0);
}

#[test]
fn monte_carlo_is_reproducible() {
    let model = RayleighFadingPair::new(1.0, 2.0).unwrap();
    let policy = SchemePolicy::FullCsi(full(&model, 1.0));
    let a = mc_rate(&policy, &model, 20_000, 3, 8).unwrap();
    let b = mc_rate(&policy, &model, 20_000, 3, 8).unwrap();
    let c = mc_rate(&policy, &model, 20_000, 4, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.mean, c.mean);
    assert!((a.mean_power - 1.0).abs() < 5.0 * 0.05);
}

#[test]
fn monte_carlo_rejects_tiny_runs() {
    let m = RayleighFadingPair::symmetric();
    assert!(mc_rate(&SchemePolicy::Zero, &m, 10, 1, 1).is_err());
}

#[test]
fn single_bin_is_a_valid_lower_bound() {
    let model = RayleighFadingPair::symmetric();
    let policy = full(&model, 1.0);
    let spec = QuantizationSpec::new(1, 1, 5.0, 5.0).unwrap();
    let r = quantized_achievable_rate(&policy, &spec).unwrap();
    let cap = full_csi_rate(&policy, &SolverConfig::default()).unwrap();
    assert!(r >= 0.0 && r <= cap);
}

#[test]
fn truncation_mass_shrinks_with_bounds() {
    let model = RayleighFadingPair::symmetric();
    let policy = full(&model, 1.0);
    let cfg = SolverConfig::default();
    let mut last = f64::INFINITY;
    for p in [0.5, 0.9, 0.99, 0.9999, 1.0 - 1e-6] {
        let spec = QuantizationSpec::at_quantile(&model, 10, 10, p).unwrap();
        let t = truncation_mass(&policy, &spec, &cfg).unwrap();
        assert!(t >= 0.0 && t < last, "quantile {p}");
        last = t;
    }
}

#[test]
fn median_bounds_lose_a_lot() {
    let model = RayleighFadingPair::symmetric();
    let policy = full(&model, 1.0);
    let spec = QuantizationSpec::at_quantile(&model, 50, 50, 0.5).unwrap();
    let report = achievability_report(&policy, &spec, &SolverConfig::default()).unwrap();
    assert!(report.truncation_mass / report.capacity > 0.1);
    assert!(report.lower_bound_holds(1e-12));
    assert!(report.sandwich_holds(1e-9));
}

#[test]
fn finer_quantization_helps() {
    let model = RayleighFadingPair::new(1.0, 2.0).unwrap();
    let policy = full(&model, 10.0);
    let rate = |q| {
        let spec = QuantizationSpec::at_quantile(&model, q, q, 1.0 - 1e-6).unwrap();
        quantized_achievable_rate(&policy, &spec).unwrap()
    };
    assert!(rate(20) < rate(40));
    assert!(rate(40) < rate(80));
}

#[test]
fn bad_specs() {
    assert!(QuantizationSpec::new(0, 1, 1.0, 1.0).is_err());
    assert!(QuantizationSpec::new(1, 1, -1.0, 1.0).is_err());
}
