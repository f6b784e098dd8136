//! Rate-versus-SNR sweeps and their CSV form.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RateUnit, SolverConfig};
use crate::error::{Error, Result};
use crate::fading::RayleighFadingPair;
use crate::policies::PowerConstraint;
use crate::rates::{high_snr_limit, onoff_rate_closed_form};
use crate::scheme::{evaluate, Scheme, SchemeEvaluation};

/// Significant digits written to CSV.
pub const CSV_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p_bar_db: f64,
    pub p_bar: f64,
    /// One entry per requested scheme, in request order.
    pub evaluations: Vec<SchemeEvaluation>,
    /// On/off rate with threshold 0, present when the on/off scheme is swept.
    pub onoff_tau0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub model: RayleighFadingPair,
    pub schemes: Vec<Scheme>,
    pub high_snr_limit: f64,
    /// Sorted by `p_bar_db`.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// True when every evaluation in every row reports convergence.
    pub fn all_converged(&self) -> bool {
        self.rows
            .iter()
            .flat_map(|r| &r.evaluations)
            .all(|e| e.diagnostics.converged)
    }

    pub fn header(&self) -> Vec<String> {
        let mut cols = vec!["pbar_db".to_string(), "pbar".to_string()];
        cols.extend(self.schemes.iter().map(|s| s.to_string()));
        if self.schemes.contains(&Scheme::Onoff) {
            cols.push("onoff_tau0".into());
            cols.push("onoff_tau".into());
        }
        cols.push("high_snr_limit".into());
        cols.extend(self.schemes.iter().map(|s| format!("{s}_power")));
        if self.schemes.contains(&Scheme::ConstantRate) {
            cols.push("constant_rate_converged".into());
        }
        cols
    }

    /// Renders the sweep as CSV: one row per power level, rates converted to
    /// `unit`, numbers in `%.12g` style, `\n` line endings.
    pub fn to_csv(&self, unit: RateUnit) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        let g = |x: f64| format_g(x, CSV_DIGITS);
        for row in &self.rows {
            let mut cells = vec![g(row.p_bar_db), g(row.p_bar)];
            cells.extend(row.evaluations.iter().map(|e| g(unit.convert(e.rate_nats))));
            if self.schemes.contains(&Scheme::Onoff) {
                cells.push(g(unit.convert(row.onoff_tau0.unwrap_or(f64::NAN))));
                let tau = row
                    .evaluations
                    .iter()
                    .find(|e| e.scheme == Scheme::Onoff)
                    .and_then(|e| e.diagnostics.tau);
                cells.push(g(tau.unwrap_or(f64::NAN)));
            }
            cells.push(g(unit.convert(self.high_snr_limit)));
            cells.extend(row.evaluations.iter().map(|e| g(e.realized_power)));
            if let Some(e) = row.evaluations.iter().find(|e| e.scheme == Scheme::ConstantRate) {
                cells.push(u8::from(e.diagnostics.converged).to_string());
            }
            let _ = write!(out, "{}", cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path, unit: RateUnit) -> Result<()> {
        std::fs::write(path, self.to_csv(unit)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// Evaluates `schemes` at every power level in `p_bar_db` (dB, noise variance
/// 1). Rows are computed in parallel, on at most `jobs` threads when given,
/// and returned sorted by power with duplicates removed.
pub fn run_sweep(
    model: &RayleighFadingPair,
    p_bar_db: &[f64],
    schemes: &[Scheme],
    cfg: &SolverConfig,
    jobs: Option<usize>,
) -> Result<SweepResult> {
    cfg.validate()?;
    if p_bar_db.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    if schemes.is_empty() {
        return Err(Error::Config("no schemes requested".into()));
    }
    if let Some(bad) = p_bar_db.iter().find(|x| !x.is_finite()) {
        return Err(Error::Config(format!("non-finite grid value {bad}")));
    }
    let mut grid = p_bar_db.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut uniq = Vec::with_capacity(schemes.len());
    for s in schemes {
        if !uniq.contains(s) {
            uniq.push(*s);
        }
    }

    let row = |db: f64| -> Result<SweepRow> {
        let c = PowerConstraint::from_db(db)?;
        let evaluations = uniq
            .iter()
            .map(|&s| evaluate(s, model, &c, None, cfg))
            .collect::<Result<Vec<_>>>()?;
        let onoff_tau0 = if uniq.contains(&Scheme::Onoff) {
            Some(onoff_rate_closed_form(model, &c, 0.0)?.max(0.0))
        } else {
            None
        };
        Ok(SweepRow {
            p_bar_db: db,
            p_bar: c.p_bar,
            evaluations,
            onoff_tau0,
        })
    };
    let compute = || grid.par_iter().map(|&db| row(db)).collect::<Result<Vec<_>>>();
    let rows = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(compute)?,
        None => compute()?,
    };
    Ok(SweepResult {
        model: *model,
        schemes: uniq,
        high_snr_limit: high_snr_limit(model, cfg)?,
        rows,
    })
}

/// Formats like C's `%.{digits}g`: shortest of fixed or exponent notation with
/// `digits` significant digits and trailing zeros removed.
///
/// ```
/// use wiretap_core::sweep::format_g;
/// assert_eq!(format_g(0.1, 12), "0.1");
/// assert_eq!(format_g(1e4, 12), "10000");
/// assert_eq!(format_g(std::f64::consts::LN_2, 12), "0.69314718056");
/// assert_eq!(format_g(1.5e-7, 12), "1.5e-07");
/// assert_eq!(format_g(2e15, 12), "2e+15");
/// ```
pub fn format_g(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_g_matches_c_printf_cases() {
        let cases = [
            (1.0, "1"),
            (-2.5, "-2.5"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (9.9999999999999e-5, "0.0001"),
            (1.0 / 3.0, "0.333333333333"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g(x, 12), want, "{x}");
        }
    }

    #[test]
    fn twelve_digits_round_trip() {
        for x in [0.123456789012345, 7.77e-9, 3.0e7 + 0.5] {
            let back: f64 = format_g(x, 12).parse().unwrap();
            assert!((back - x).abs() <= 1e-11 * x.abs());
        }
    }

    #[test]
    fn empty_grid_rejected() {
        let m = RayleighFadingPair::symmetric();
        assert!(run_sweep(&m, &[], &[Scheme::ReceiverOnly], &SolverConfig::default(), None).is_err());
    }

    #[test]
    fn rows_are_sorted_and_unique() {
        let m = RayleighFadingPair::new(2.0, 1.0).unwrap();
        let r = run_sweep(&m, &[10.0, -5.0, 10.0, 0.0], &[Scheme::ReceiverOnly], &SolverConfig::default(), Some(2))
            .unwrap();
        let dbs: Vec<f64> = r.rows.iter().map(|r| r.p_bar_db).collect();
        assert_eq!(dbs, vec![-5.0, 0.0, 10.0]);
    }
}
