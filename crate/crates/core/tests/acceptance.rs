//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Oracles here are built from the raw quadrature primitive and
//! brute-force search, not from the rate functionals under test.

use std::f64::consts::LN_2;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wiretap_core::config::SolverConfig;
use wiretap_core::fading::{quantile, ChannelState, RayleighFadingPair};
use wiretap_core::numerics::{integrate_1d, integrate_breakpoints, Tolerance};
use wiretap_core::policies::*;
use wiretap_core::rates::*;
use wiretap_core::scheme::Scheme;
use wiretap_core::sweep::run_sweep;
use wiretap_core::validation::*;

type Outcome = Result<String, String>;

fn tol() -> Tolerance {
    Tolerance::new(1e-10, 1e-14, 4000).unwrap()
}

/// ∫_{outer} ∫_{lo(x)}^{hi(x)} f(x, y) dy dx with plain adaptive quadrature.
fn oracle_2d(outer: &[f64], inner: impl Fn(f64) -> (f64, f64), f: impl Fn(f64, f64) -> f64) -> f64 {
    integrate_breakpoints(
        |x| {
            let (c, d) = inner(x);
            if d > c {
                integrate_1d(|y| f(x, y), c, d, tol()).expect("inner oracle integral").value
            } else {
                0.0
            }
        },
        outer,
        tol(),
    )
    .expect("outer oracle integral")
    .value
}

fn density(h: f64, gamma: f64) -> f64 {
    (-h / gamma).exp() / gamma
}

fn spread(lo: f64, hi: f64, scale: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    pts.extend([0.5, 2.0, 6.0].iter().map(|k| lo + k * scale).filter(|&p| p < hi));
    pts.push(hi);
    pts
}

/// Outer breakpoints for a tabulated policy: its nodes inside [lo, hi].
fn node_points(nodes: &[(f64, f64)], lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    pts.extend(nodes.iter().map(|n| n.0).filter(|&h| h > lo && h < hi));
    pts.push(hi);
    pts
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 1 ---------------------------------------------------------------------------

fn onoff_transcription() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let gm = rng.random_range(0.3..3.0);
        let ge = rng.random_range(0.3..3.0);
        let p_bar = 10f64.powf(rng.random_range(-1.0..3.0));
        let tau = gm * rng.random_range(0.0..3.0);
        let model = RayleighFadingPair::new(gm, ge).unwrap();
        let closed = onoff_rate_closed_form(&model, &PowerConstraint::new(p_bar).unwrap(), tau).unwrap();
        let p = p_bar * (tau / gm).exp();
        let top = tau + gm * 1e12f64.ln();
        let quad = oracle_2d(
            &spread(tau, top, gm),
            |h_m| (0.0, h_m),
            |h_m, h_e| ((h_m * p).ln_1p() - (h_e * p).ln_1p()).max(0.0) * density(h_m, gm) * density(h_e, ge),
        );
        worst = worst.max(rel(closed, quad));
    }
    ensure(worst <= 1e-6, format!("20 random tuples, max relative gap {worst:.2e} (limit 1e-6)"))
}

// 2 ---------------------------------------------------------------------------

fn main_csi_two_forms(cfg: &SolverConfig) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (gm, ge, p_bar) in [(1.0, 1.0, 1.0), (1.0, 2.0, 10.0)] {
        let model = RayleighFadingPair::new(gm, ge).unwrap();
        let policy = solve_main_csi(&model, &PowerConstraint::new(p_bar).unwrap(), cfg).unwrap();
        let e1_form = main_csi_rate(&policy, cfg).unwrap();
        let top = quantile(1.0 - 1e-12, gm).unwrap();
        let double = oracle_2d(
            &node_points(&policy.grid, policy.cutoff, top),
            |h_m| (0.0, h_m.min(top)),
            |h_m, h_e| {
                let p = policy.power(h_m);
                ((h_m * p).ln_1p() - (h_e * p).ln_1p()).max(0.0) * density(h_m, gm) * density(h_e, ge)
            },
        );
        let gap = rel(e1_form, double);
        ok &= gap <= 1e-5;
        parts.push(format!("({gm},{ge},{p_bar}) gap {gap:.2e}"));
    }
    ensure(ok, format!("{} (limit 1e-5)", parts.join(", ")))
}

// 3 ---------------------------------------------------------------------------

/// Golden-section refinement after a dense grid scan.
fn brute_force_argmax(f: impl Fn(f64) -> f64, hi: f64) -> f64 {
    const N: usize = 4000;
    let xs: Vec<f64> = (0..=N).map(|k| hi * k as f64 / N as f64).collect();
    let best = (0..=N).max_by(|&a, &b| f(xs[a]).total_cmp(&f(xs[b]))).unwrap();
    let (mut a, mut b) = (xs[best.saturating_sub(1)], xs[(best + 1).min(N)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-15 * b.max(1e-300) {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) >= f(d) {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-300 {
            break;
        }
    }
    0.5 * (a + b)
}

fn full_csi_pointwise() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut positive = 0;
    for _ in 0..200 {
        let (x, y): (f64, f64) = (-rng.random::<f64>().ln(), -rng.random::<f64>().ln());
        let (h_m, h_e) = (x.max(y), x.min(y));
        let lambda = 10f64.powf(rng.random_range(-2.0..0.0));
        let closed = full_csi_power(ChannelState::new(h_m, h_e).unwrap(), lambda).unwrap();
        // log(1 + h_M P) − log(1 + h_E P), written without cancellation.
        let lagrangian = |p: f64| ((h_m - h_e) * p / (1.0 + h_e * p)).ln_1p() - lambda * p;
        let brute = brute_force_argmax(lagrangian, 1.0 / lambda);
        let err = if closed > 0.0 {
            positive += 1;
            rel(closed, brute)
        } else {
            brute * lambda
        };
        worst = worst.max(err);
    }
    ensure(
        worst <= 1e-5,
        format!("200 states ({positive} with P > 0), max relative deviation {worst:.2e} (limit 1e-5)"),
    )
}

// 4 ---------------------------------------------------------------------------

fn high_snr_law(cfg: &SolverConfig) -> Outcome {
    let sym = RayleighFadingPair::symmetric();
    let limit = high_snr_limit(&sym, cfg).unwrap();
    let c = PowerConstraint::new(1e4).unwrap();
    let full = full_csi_rate(&solve_full_csi(&sym, &c, cfg).unwrap(), cfg).unwrap();
    let onoff0 = onoff_rate_closed_form(&sym, &c, 0.0).unwrap();
    let onoff_gap = (onoff0 - full).abs() / full;
    ensure(
        (limit - LN_2).abs() <= 1e-6 && full >= 0.9 * LN_2 && full <= LN_2 && onoff_gap <= 0.05,
        format!(
            "limit - ln2 = {:.1e}; full_csi(1e4) = {full:.6} in [{:.6}, {LN_2:.6}]; onoff(0) gap {onoff_gap:.4}",
            limit - LN_2,
            0.9 * LN_2
        ),
    )
}

// 5 & 7 -----------------------------------------------------------------------

struct GridPoint {
    model: RayleighFadingPair,
    p_bar: f64,
    full: FullCsiPolicy,
    main: MainCsiPolicy,
    constant: ConstantRatePolicy,
    rates: [f64; 6],
}

const GRID: [f64; 5] = [0.1, 1.0, 10.0, 100.0, 1e4];

fn solve_grid(cfg: &SolverConfig) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for (gm, ge) in [(1.0, 1.0), (1.0, 2.0)] {
        let model = RayleighFadingPair::new(gm, ge).unwrap();
        for p_bar in GRID {
            let c = PowerConstraint::new(p_bar).unwrap();
            let full = solve_full_csi(&model, &c, cfg).unwrap();
            let main = solve_main_csi(&model, &c, cfg).unwrap();
            let constant = solve_constant_rate(&model, &c, cfg).unwrap();
            let rates = [
                full_csi_rate(&full, cfg).unwrap(),
                main_csi_rate(&main, cfg).unwrap(),
                optimize_onoff_threshold(&model, &c, cfg).unwrap().rate,
                onoff_rate_closed_form(&model, &c, 0.0).unwrap(),
                receiver_only_rate(&model, &c).unwrap(),
                constant_rate_objective(&constant, cfg).unwrap().rate,
            ];
            out.push(GridPoint { model, p_bar, full, main, constant, rates });
        }
    }
    out
}

fn ordering(grid: &[GridPoint]) -> Outcome {
    const NAMES: [&str; 5] = ["full_csi", "main_csi", "onoff(tau*)", "onoff(0)", "receiver_only"];
    let mut bad = Vec::new();
    for g in grid {
        for k in 0..4 {
            if g.rates[k] < g.rates[k + 1] - 1e-6 {
                bad.push(format!("{} < {} at ({}, {}, {})", NAMES[k], NAMES[k + 1], g.model.gamma_m, g.model.gamma_e, g.p_bar));
            }
        }
        if g.rates[5] > g.rates[1] + 1e-6 {
            bad.push(format!("constant_rate > main_csi at ({}, {}, {})", g.model.gamma_m, g.model.gamma_e, g.p_bar));
        }
    }
    ensure(bad.is_empty(), if bad.is_empty() { format!("{} grid points, slack 1e-6", grid.len()) } else { bad.join("; ") })
}

/// E{P} recomputed from the policy maps themselves.
fn constraint_attainment(grid: &[GridPoint]) -> Outcome {
    let mut worst: f64 = 0.0;
    for g in grid {
        let (gm, ge) = (g.model.gamma_m, g.model.gamma_e);
        let top = quantile(1.0 - 1e-12, gm).unwrap();
        let top_e = quantile(1.0 - 1e-12, ge).unwrap();
        let lambda = g.full.lambda;
        let full = oracle_2d(
            &spread(lambda, top + lambda, gm),
            |h_m| (0.0, (h_m - lambda).min(top_e)),
            |h_m, h_e| g.full.power(h_m, h_e) * density(h_m, gm) * density(h_e, ge),
        );
        let tabulated = |nodes: &[(f64, f64)], start: f64, p: &dyn Fn(f64) -> f64| {
            integrate_breakpoints(|h| p(h) * density(h, gm), &node_points(nodes, start, top), tol())
                .unwrap()
                .value
        };
        let main = tabulated(&g.main.grid, g.main.cutoff, &|h| g.main.power(h));
        let constant = tabulated(&g.constant.grid, g.constant.switch_gain, &|h| g.constant.power(h));
        for realized in [full, main, constant] {
            worst = worst.max((realized / g.p_bar - 1.0).abs());
        }
    }
    ensure(worst <= 1e-4, format!("30 policies, max relative gap {worst:.2e} (limit 1e-4)"))
}

// 6 ---------------------------------------------------------------------------

fn headline(cfg: &SolverConfig) -> Outcome {
    let model = RayleighFadingPair::new(1.0, 2.0).unwrap();
    let zero = (-30..=60)
        .map(|db| receiver_only_rate(&model, &PowerConstraint::from_db(db as f64).unwrap()).unwrap())
        .all(|r| r == 0.0);
    let c = PowerConstraint::new(10.0).unwrap();
    let main = main_csi_rate(&solve_main_csi(&model, &c, cfg).unwrap(), cfg).unwrap();
    ensure(
        zero && main > 0.01,
        format!("receiver_only == 0 on -30..60 dB: {zero}; main_csi(1,2,10) = {main:.6} nats (> 0.01)"),
    )
}

// 8 ---------------------------------------------------------------------------

fn monte_carlo(cfg: &SolverConfig) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (gm, ge, p_bar) in [(1.0, 1.0, 1.0), (1.0, 2.0, 10.0)] {
        let model = RayleighFadingPair::new(gm, ge).unwrap();
        let c = PowerConstraint::new(p_bar).unwrap();
        let full = solve_full_csi(&model, &c, cfg).unwrap();
        let main = solve_main_csi(&model, &c, cfg).unwrap();
        let onoff = optimize_onoff_threshold(&model, &c, cfg).unwrap();
        let constant = solve_constant_rate(&model, &c, cfg).unwrap();
        let cases = [
            ("full_csi", full_csi_rate(&full, cfg).unwrap(), SchemePolicy::FullCsi(full)),
            ("main_csi", main_csi_rate(&main, cfg).unwrap(), SchemePolicy::MainCsi(main)),
            ("onoff", onoff.rate, SchemePolicy::Onoff(onoff.policy)),
            (
                "constant_rate",
                constant_rate_objective(&constant, cfg).unwrap().signed,
                SchemePolicy::ConstantRate(constant),
            ),
            (
                "receiver_only",
                receiver_only_signed(&model, &c).unwrap(),
                SchemePolicy::ReceiverOnly { p_bar },
            ),
        ];
        let mut worst: f64 = 0.0;
        for (name, analytic, policy) in cases {
            let est = mc_rate(&policy, &model, 1_000_000, 42, 16).unwrap();
            let z = (est.mean - analytic).abs() / est.std_err;
            if z > 3.0 {
                ok = false;
                parts.push(format!("{name} at ({gm},{ge},{p_bar}): z = {z:.2}"));
            }
            worst = worst.max(z);
        }
        parts.push(format!("({gm},{ge},{p_bar}) max |z| {worst:.2}"));
    }
    ensure(ok, format!("10^6 samples per scheme; {}", parts.join(", ")))
}

// 9 ---------------------------------------------------------------------------

fn achievability(cfg: &SolverConfig) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (gm, ge) in [(1.0, 1.0), (1.0, 2.0)] {
        let model = RayleighFadingPair::new(gm, ge).unwrap();
        let policy = solve_full_csi(&model, &PowerConstraint::new(1.0).unwrap(), cfg).unwrap();
        let capacity = full_csi_rate(&policy, cfg).unwrap();

        let mut tested = 0;
        for p in [0.5, 0.9, 0.999, 1.0 - 1e-6] {
            for (q1, q2) in [(1, 1), (1, 7), (5, 2), (10, 10), (25, 60), (50, 50), (200, 200), (400, 100)] {
                let spec = QuantizationSpec::at_quantile(&model, q1, q2, p).unwrap();
                let r = quantized_achievable_rate(&policy, &spec).unwrap();
                tested += 1;
                if !(r >= 0.0 && r <= capacity + 1e-9) {
                    ok = false;
                    parts.push(format!("lower bound violated for {spec:?}: {r} > {capacity}"));
                }
            }
        }

        let levels = [25, 50, 100, 200, 400, 800, 1600];
        let rates: Vec<f64> = levels
            .iter()
            .map(|&q| {
                let spec = QuantizationSpec::at_quantile(&model, q, q, 1.0 - 1e-6).unwrap();
                quantized_achievable_rate(&policy, &spec).unwrap()
            })
            .collect();
        let increasing = rates.windows(2).all(|w| w[1] >= w[0]);
        let gap = |r: f64| (capacity - r) / capacity;
        let finest = gap(*rates.last().unwrap());

        // Tail mass against capacity minus the truncated-region integral.
        let spec = QuantizationSpec::at_quantile(&model, 200, 200, 1.0 - 1e-6).unwrap();
        let tail = truncation_mass(&policy, &spec, cfg).unwrap();
        let lambda = policy.lambda;
        let inside = oracle_2d(
            &spread(lambda, spec.m1, gm),
            |h_m| (0.0, (h_m - lambda).min(spec.m2)),
            |h_m, h_e| {
                let p = policy.power(h_m, h_e);
                ((h_m * p).ln_1p() - (h_e * p).ln_1p()) * density(h_m, gm) * density(h_e, ge)
            },
        );
        let tail_consistent = (capacity - inside - tail).abs() <= 1e-7;

        ok &= increasing && finest <= 0.05 && tail <= 1e-3 && tail_consistent;
        parts.push(format!(
            "({gm},{ge}): {tested} specs below capacity, gap {:.3} at 200x200 -> {finest:.3} at 1600x1600, \
             tail mass {tail:.1e} (oracle {:.1e})",
            gap(rates[3]),
            capacity - inside
        ));
    }
    ensure(ok, parts.join("; "))
}

// 10 --------------------------------------------------------------------------

fn determinism(cfg: &SolverConfig) -> Outcome {
    let model = RayleighFadingPair::new(1.0, 2.0).unwrap();
    let grid: Vec<f64> = (-10..=40).step_by(10).map(f64::from).collect();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_sweep(&model, &grid, &Scheme::ALL, cfg, None).unwrap().to_csv(cfg.unit))
    };
    let (a, b, c) = (run(1), run(1), run(3));
    let policy = SchemePolicy::ReceiverOnly { p_bar: 3.0 };
    let mc = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_rate(&policy, &model, 200_000, 9, 16).unwrap())
    };
    let (m1, m2, m3) = (mc(1), mc(1), mc(4));
    let same_mc = m1 == m2 && m1 == m3 && m1.mean.to_bits() == m3.mean.to_bits();
    ensure(
        a == b && a == c && same_mc,
        format!(
            "sweep CSV ({} bytes) identical across runs and thread counts: {}; MC identical: {same_mc}",
            a.len(),
            a == b && a == c
        ),
    )
}

// -----------------------------------------------------------------------------

fn main() {
    let cfg = SolverConfig::default();
    let mut failures = 0;
    let mut report = |id: u32, title: &str, budget: f64, body: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = body();
        let secs = start.elapsed().as_secs_f64();
        let (verdict, detail) = match outcome {
            Ok(d) if secs <= budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over runtime budget")),
            Err(d) => ("FAIL", d),
        };
        if verdict == "FAIL" {
            failures += 1;
        }
        println!("[{verdict}] {id:>2}. {title} ({secs:.1}s / {budget:.0}s): {detail}");
    };

    report(1, "on/off closed form vs 2D quadrature", 30.0, &mut onoff_transcription);
    report(2, "main-CSI E1 reduction vs positive-part double integral", 30.0, &mut || main_csi_two_forms(&cfg));
    report(3, "full-CSI power vs brute-force Lagrangian maximizer", 10.0, &mut full_csi_pointwise);
    report(4, "high-SNR law", 120.0, &mut || high_snr_law(&cfg));
    let start = Instant::now();
    let grid = solve_grid(&cfg);
    let solve_secs = start.elapsed().as_secs_f64();
    report(5, "scheme ordering on the acceptance grid", 300.0 - solve_secs, &mut || ordering(&grid));
    report(6, "stronger eavesdropper on average", 60.0, &mut || headline(&cfg));
    report(7, "power constraint attainment", 300.0 - solve_secs, &mut || constraint_attainment(&grid));
    report(8, "Monte Carlo oracle", 120.0, &mut || monte_carlo(&cfg));
    report(9, "quantized achievability", 120.0, &mut || achievability(&cfg));
    report(10, "determinism", 60.0, &mut || determinism(&cfg));

    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 10 acceptance criteria passed");
}
