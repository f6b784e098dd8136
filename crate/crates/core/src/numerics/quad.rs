//! Globally adaptive Gauss–Kronrod (10/21) quadrature.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use super::Tolerance;
use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1); odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_958_109_831,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Smallest relative tolerance honoured; tighter requests are raised to it.
pub const ROUNDOFF_REL: f64 = 100.0 * f64::EPSILON;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite { what: "integrand", x, value: y })
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv = [(0.0, 0.0); 10];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
        *slot = (f1, f2);
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for (j, &(f1, f2)) in fv.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, error })
}

/// Adaptive integral of `f` over `[a, b]`.
///
/// Bisects the segment with the largest error estimate until the total
/// estimated error is at most `max(tol.abs, tol.rel·|result|)`, or fails with
/// [`Error::NoConvergence`] (carrying the best estimate) after
/// `tol.max_iter` subdivisions. Relative tolerances below [`ROUNDOFF_REL`]
/// are raised to it. Integrable log-type endpoint singularities are
/// handled by repeated bisection towards the endpoint; the endpoints themselves
/// are never evaluated.
///
/// ```
/// use wiretap_core::numerics::{integrate_1d, Tolerance};
/// let tol = Tolerance::new(1e-12, 1e-14, 500).unwrap();
/// let r = integrate_1d(|t: f64| t.ln(), 0.0, 1.0, tol).unwrap();
/// assert!((r.value + 1.0).abs() < 1e-10);
/// ```
pub fn integrate_1d<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("integrate_1d", format!("need finite a < b, got [{a}, {b}]")));
    }
    let first = kronrod21(&f, a, b)?;
    let mut evaluations = 21;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    // Segments too narrow to split further.
    let mut settled: Vec<Segment> = Vec::new();
    heap.push(first);

    // Each Kronrod estimate carries a 50ε roundoff floor, so relative targets
    // below 100ε could never be met.
    let rel = tol.rel.max(ROUNDOFF_REL);
    let target = |total: f64| tol.abs.max(rel * total.abs());
    let mut iterations = 0;
    while total_err > target(total) {
        if iterations >= tol.max_iter {
            return Err(Error::NoConvergence {
                what: "integrate_1d",
                iterations,
                estimate: total,
                error_bound: total_err,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) <= 4.0 * f64::EPSILON * mid.abs() {
            settled.push(worst);
            continue;
        }
        let left = kronrod21(&f, worst.a, mid)?;
        let right = kronrod21(&f, mid, worst.b)?;
        evaluations += 42;
        iterations += 1;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum in a fixed order so the running-sum rounding does not leak out.
    let mut segments: Vec<Segment> = heap.into_vec();
    segments.extend(settled);
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segments.iter().map(|s| s.value).sum();
    let error = segments.iter().map(|s| s.error).sum();
    Ok(Integral {
        value,
        error,
        evaluations,
        intervals: segments.len(),
    })
}

/// Integrates over consecutive pairs of `points`, summing the pieces. Used for
/// integrands with known kinks (e.g. tabulated policies).
pub fn integrate_breakpoints<F>(f: F, points: &[f64], tol: Tolerance) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    if points.len() < 2 {
        return Err(Error::domain("integrate_breakpoints", "need at least two points"));
    }
    let pieces = (points.len() - 1) as f64;
    let piece_tol = tol.with_abs(tol.abs / pieces);
    let mut acc = Integral {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
        intervals: 0,
    };
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let r = integrate_1d(&f, w[0], w[1], piece_tol)?;
        acc.value += r.value;
        acc.error += r.error;
        acc.evaluations += r.evaluations;
        acc.intervals += r.intervals;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> Tolerance {
        Tolerance::new(1e-12, 1e-15, 1000).unwrap()
    }

    #[test]
    fn kronrod_weights_sum_to_two() {
        let s: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert!((s - 2.0).abs() < 1e-14);
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((g - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_integrand() {
        let r = integrate_1d(|_| 1.0, 0.0, 1.0, tight()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_endpoint_singularity() {
        let r = integrate_1d(|t: f64| t.ln(), 0.0, 1.0, tight()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn reports_best_estimate_on_budget_exhaustion() {
        let tol = Tolerance::new(1e-15, 0.0, 2).unwrap();
        let err = integrate_1d(|t: f64| (1.0 / t).sin() / t.sqrt(), 1e-6, 1.0, tol).unwrap_err();
        match err {
            Error::NoConvergence { estimate, error_bound, .. } => {
                assert!(estimate.is_finite() && error_bound > 0.0)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_interval_and_nan() {
        assert!(integrate_1d(|x| x, 1.0, 1.0, tight()).is_err());
        assert!(matches!(
            integrate_1d(|_| f64::NAN, 0.0, 1.0, tight()),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let f = |t: f64| (-t).exp() * (3.0 * t).cos();
        let a = integrate_1d(f, 0.0, 20.0, tight()).unwrap();
        let b = integrate_1d(f, 0.0, 20.0, tight()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn breakpoints_match_single_pass() {
        let f = |t: f64| (t - 1.0).abs();
        let r = integrate_breakpoints(f, &[0.0, 1.0, 3.0], tight()).unwrap();
        assert!((r.value - 2.5).abs() < 1e-13);
    }
}
