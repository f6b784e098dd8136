use proptest::prelude::*;

use wiretap_core::fading::*;
use wiretap_core::numerics::{integrate_1d, Tolerance};

#[test]
fn density_integrates_to_one() {
    for gamma in [0.1, 1.0, 7.5] {
        let total = integrate_1d(|h| pdf(h, gamma).unwrap(), 0.0, 60.0 * gamma, Tolerance::default()).unwrap();
        assert!((total.value - 1.0).abs() < 1e-12, "gamma = {gamma}");
    }
}

#[test]
fn invalid_parameters() {
    assert!(RayleighFadingPair::new(0.0, 1.0).is_err());
    assert!(RayleighFadingPair::new(1.0, -2.0).is_err());
    assert!(RayleighFadingPair::new(f64::NAN, 1.0).is_err());
    assert!(ChannelState::new(-1.0, 0.0).is_err());
    assert!(quantile(1.0, 1.0).is_err());
    assert!(sample(RayleighFadingPair::symmetric(), 1, 0).is_err());
}

#[test]
fn sample_moments() {
    let model = RayleighFadingPair::new(1.0, 2.0).unwrap();
    let draws = sample(model, 11, 200_000).unwrap();
    let n = draws.len() as f64;
    let mean_m = draws.iter().map(|s| s.h_m).sum::<f64>() / n;
    let mean_e = draws.iter().map(|s| s.h_e).sum::<f64>() / n;
    let stronger = draws.iter().filter(|s| s.h_m > s.h_e).count() as f64 / n;
    // Five standard errors.
    assert!((mean_m - 1.0).abs() < 5.0 * 1.0 / n.sqrt());
    assert!((mean_e - 2.0).abs() < 5.0 * 2.0 / n.sqrt());
    let p = model.prob_main_stronger();
    assert!((p - 1.0 / 3.0).abs() < 1e-15);
    assert!((stronger - p).abs() < 5.0 * (p * (1.0 - p) / n).sqrt());
}

#[test]
fn same_seed_same_draws() {
    let m = RayleighFadingPair::symmetric();
    assert_eq!(sample(m, 5, 100).unwrap(), sample(m, 5, 100).unwrap());
    assert_ne!(sample(m, 5, 100).unwrap(), sample(m, 6, 100).unwrap());
    let a: Vec<_> = FadingSampler::new(m, 5, 0).take(10).collect();
    let b: Vec<_> = FadingSampler::new(m, 5, 1).take(10).collect();
    assert_ne!(a, b);
}

proptest! {
    #[test]
    fn quantile_inverts_cdf(p in 1e-12f64..(1.0 - 1e-12), gamma in 0.01f64..100.0) {
        let h = quantile(p, gamma).unwrap();
        prop_assert!((cdf(h, gamma).unwrap() - p).abs() <= 1e-12);
    }

    #[test]
    fn cdf_is_monotone(a in 0.0f64..50.0, b in 0.0f64..50.0, gamma in 0.1f64..10.0) {
        prop_assume!(a <= b);
        prop_assert!(cdf(a, gamma).unwrap() <= cdf(b, gamma).unwrap());
    }
}
