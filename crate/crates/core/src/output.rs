//! Artifact serialization: CSV tables and the run manifest.
//!
//! Everything here is a pure value-to-text function; callers decide where
//! bytes go. All numbers use `%.17g`-style formatting (17 significant
//! digits, round-trippable), text is UTF-8 with LF line endings.

use num_complex::Complex64;
use serde::Serialize;
use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::analysis::Histogram;
use crate::simulate::FluxRecord;
use crate::Result;

/// Formats like C's `%.17g`: up to 17 significant digits, scientific
/// notation outside [1e-4, 1e17), trailing zeros stripped. 17 digits make
/// the text round-trip to the identical f64.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..17).contains(&mag) {
        let decimals = (16 - mag).max(0) as usize;
        let s = format!("{x:.decimals$}");
        strip_fraction_zeros(s)
    } else {
        let s = format!("{x:.16e}");
        let (mantissa, exponent) = s.split_once('e').expect("exp format");
        format!("{}e{}", strip_fraction_zeros(mantissa.to_string()), exponent)
    }
}

fn strip_fraction_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

/// `bin_lo,bin_hi,count,density_estimate` rows over all bins.
pub fn histogram_csv(h: &Histogram) -> String {
    let mut out = String::from("bin_lo,bin_hi,count,density_estimate\n");
    for k in 0..h.counts.len() {
        let (lo, hi) = h.bin_edges(k);
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_g17(lo),
            format_g17(hi),
            h.counts[k],
            format_g17(h.density(k))
        );
    }
    out
}

/// `level,t_lo,t_hi,signed_crossings,rate` rows.
pub fn flux_csv(records: &[FluxRecord]) -> String {
    let mut out = String::from("level,t_lo,t_hi,signed_crossings,rate\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_g17(r.level),
            format_g17(r.t_lo),
            format_g17(r.t_hi),
            r.signed_crossings,
            format_g17(r.rate)
        );
    }
    out
}

/// `x,rho` rows for a density sampled on a grid.
pub fn density_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("x,rho\n");
    for &(x, rho) in points {
        let _ = writeln!(out, "{},{}", format_g17(x), format_g17(rho));
    }
    out
}

/// `t,lambda_1,...,lambda_N` trajectory rows. In kill mode later rows hold
/// fewer eigenvalues; missing cells are left empty so the column layout
/// stays fixed.
pub fn paths_csv(paths: &[(f64, Vec<f64>)]) -> String {
    let width = paths.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let mut out = String::from("t");
    for i in 1..=width {
        let _ = write!(out, ",lambda_{i}");
    }
    out.push('\n');
    for (t, lambdas) in paths {
        let _ = write!(out, "{}", format_g17(*t));
        for i in 0..width {
            match lambdas.get(i) {
                Some(&x) => {
                    let _ = write!(out, ",{}", format_g17(x));
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// `t,alive` rows.
pub fn alive_csv(series: &[(f64, usize)]) -> String {
    let mut out = String::from("t,alive\n");
    for &(t, alive) in series {
        let _ = writeln!(out, "{},{alive}", format_g17(t));
    }
    out
}

/// One evolved-transform sample: the field value at `omega` at time `t`.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot {
    pub t: f64,
    pub omega: Complex64,
    pub g: Complex64,
}

/// `t,re_omega,im_omega,re_g,im_g` rows.
pub fn snapshots_csv(rows: &[Snapshot]) -> String {
    let mut out = String::from("t,re_omega,im_omega,re_g,im_g\n");
    for s in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_g17(s.t),
            format_g17(s.omega.re),
            format_g17(s.omega.im),
            format_g17(s.g.re),
            format_g17(s.g.im)
        );
    }
    out
}

/// `t,distance` rows (e.g. sup-distance to the stationary transform).
pub fn distance_csv(series: &[(f64, f64)]) -> String {
    let mut out = String::from("t,distance\n");
    for &(t, d) in series {
        let _ = writeln!(out, "{},{}", format_g17(t), format_g17(d));
    }
    out
}

/// Record of one tool invocation: what ran, with which resolved
/// configuration, and which files it produced. Re-running the same
/// configuration reproduces every listed output byte-identically.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub seed: u64,
    pub version: String,
    /// Unix epoch seconds.
    pub started_at: f64,
    pub duration_seconds: f64,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: unix_now(),
            duration_seconds: 0.0,
            warnings: Vec::new(),
        }
    }

    /// Stamps the duration and renders pretty JSON with a trailing newline.
    pub fn finish(mut self) -> Result<String> {
        self.duration_seconds = unix_now() - self.started_at;
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        Ok(text)
    }
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn g17_canonical_values() {
        assert_eq!(format_g17(0.0), "0");
        assert_eq!(format_g17(-0.0), "-0");
        assert_eq!(format_g17(1.0), "1");
        assert_eq!(format_g17(-2.5), "-2.5");
        assert_eq!(format_g17(0.1), "0.10000000000000001");
        assert_eq!(format_g17(1e17), "1e17");
        assert_eq!(format_g17(1234.5), "1234.5");
        assert_eq!(format_g17(1e-4), "0.0001");
        assert_eq!(format_g17(1e-5), "1.0000000000000001e-5");
        assert_eq!(format_g17(f64::INFINITY), "inf");
        assert_eq!(format_g17(f64::NAN), "nan");
    }

    proptest! {
        #[test]
        fn g17_round_trips_exactly(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back: f64 = format_g17(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn histogram_csv_layout() {
        let mut h = Histogram::new(0.0, 1.0, 2).unwrap();
        h.record(0.25);
        h.record(0.25);
        h.record(5.0);
        let csv = histogram_csv(&h);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "bin_lo,bin_hi,count,density_estimate");
        assert_eq!(lines[1], "0,0.5,2,1.3333333333333333");
        assert_eq!(lines[2], "0.5,1,0,0");
        assert_eq!(lines.len(), 3);
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }

    #[test]
    fn flux_csv_layout() {
        let rec = FluxRecord {
            level: 0.0,
            t_lo: 10.0,
            t_hi: 100.0,
            signed_crossings: -3,
            rate: -3.0 / 90.0,
            restarts_counted: 0,
        };
        let csv = flux_csv(&[rec]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "level,t_lo,t_hi,signed_crossings,rate");
        assert_eq!(lines[1], "0,10,100,-3,-0.033333333333333333");
    }

    #[test]
    fn paths_csv_pads_killed_particles() {
        let csv = paths_csv(&[(0.0, vec![1.0, 2.0]), (1.0, vec![2.0])]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,lambda_1,lambda_2");
        assert_eq!(lines[1], "0,1,2");
        assert_eq!(lines[2], "1,2,");
    }

    #[test]
    fn manifest_lists_outputs_and_serializes() {
        let mut m = RunManifest::new("density", serde_json::json!({"a": 0.5}), 7);
        m.outputs.push("density.csv".into());
        let text = m.finish().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["command"], "density");
        assert_eq!(v["seed"], 7);
        assert_eq!(v["outputs"][0], "density.csv");
        assert!(v["duration_seconds"].as_f64().unwrap() >= 0.0);
        assert!(text.ends_with('\n'));
    }
}
