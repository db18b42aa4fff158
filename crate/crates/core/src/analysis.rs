//! Statistical comparison layer: histograms of simulation samples, L1
//! distances against analytic densities, heavy-tail coefficient fits and
//! edge-exponent fits.
//!
//! Everything here consumes immutable inputs and is thread-safe. Fits
//! return their diagnostics (point counts, log-space residuals) so callers
//! can reject underdetermined windows instead of trusting a point estimate.

use serde::Serialize;

use crate::stieltjes::DensitySpec;
use crate::{Error, Result};

/// Uniform-bin histogram with explicit out-of-range bookkeeping.
///
/// Invariant: `sum(counts) + underflow + overflow == total`, so the density
/// estimate integrates to the in-range sample fraction.
#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
    pub total: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo < hi) || bins == 0 {
            return Err(Error::InvalidInput(format!(
                "bad histogram layout [{lo}, {hi}] with {bins} bins"
            )));
        }
        Ok(Histogram { lo, hi, counts: vec![0; bins], underflow: 0, overflow: 0, total: 0 })
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    /// Lower and upper edge of bin `k`.
    pub fn bin_edges(&self, k: usize) -> (f64, f64) {
        let w = self.bin_width();
        (self.lo + w * k as f64, self.lo + w * (k + 1) as f64)
    }

    pub fn record(&mut self, x: f64) {
        self.total += 1;
        if !x.is_finite() || x < self.lo {
            self.underflow += 1;
        } else if x >= self.hi {
            self.overflow += 1;
        } else {
            let k = ((x - self.lo) / self.bin_width()) as usize;
            // Guard the degenerate float case x == hi - ulp rounding up.
            let k = k.min(self.counts.len() - 1);
            self.counts[k] += 1;
        }
    }

    /// Density estimate in bin `k`, normalized by the total sample count so
    /// that out-of-range mass is not silently renormalized away.
    pub fn density(&self, k: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts[k] as f64 / (self.total as f64 * self.bin_width())
    }

    /// Checks the count bookkeeping invariant.
    pub fn validate(&self) -> Result<()> {
        let sum: u64 = self.counts.iter().sum();
        if sum + self.underflow + self.overflow != self.total {
            return Err(Error::InvalidInput(format!(
                "histogram counts {sum} + under {} + over {} != total {}",
                self.underflow, self.overflow, self.total
            )));
        }
        Ok(())
    }

    /// Adds another histogram with the identical bin layout. Counter
    /// addition commutes, so replica merge order never matters.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if other.lo != self.lo || other.hi != self.hi || other.counts.len() != self.counts.len()
        {
            return Err(Error::InvalidInput("histogram layouts differ".into()));
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        self.total += other.total;
        Ok(())
    }
}

/// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const GAUSS_X: [f64; 5] = [
    -0.906179845938664,
    -0.5384693101056831,
    0.0,
    0.5384693101056831,
    0.906179845938664,
];
const GAUSS_W: [f64; 5] = [
    0.23692688505618908,
    0.47862867049936647,
    0.5688888888888889,
    0.47862867049936647,
    0.23692688505618908,
];

/// Average of `rho` over `[lo, hi]` by 5-point Gauss quadrature. Midpoint
/// sampling is biased at square-root edges; Gauss is not, at these widths.
fn bin_average(rho: &DensitySpec, lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    GAUSS_X
        .iter()
        .zip(&GAUSS_W)
        .map(|(&x, &w)| w * rho.density(mid + half * x))
        .sum::<f64>()
        * 0.5
}

/// L1 distance between a histogram's density estimate and an analytic
/// density: per-bin `|estimate - bin average of rho| * width`, plus the mass
/// of `rho` outside the histogram range (which the estimate cannot see).
pub fn l1_distance(h: &Histogram, rho: &DensitySpec) -> Result<f64> {
    h.validate()?;
    let mut dist = 0.0;
    let mut inside = 0.0;
    let w = h.bin_width();
    for k in 0..h.counts.len() {
        let (lo, hi) = h.bin_edges(k);
        let avg = bin_average(rho, lo, hi);
        inside += avg * w;
        dist += (h.density(k) - avg).abs() * w;
    }
    let outside = (rho.total_mass()? - inside).max(0.0);
    Ok(dist + outside)
}

/// L1 distance between two histograms on the same layout, as densities.
/// Out-of-range mass enters through the density normalization: samples lost
/// to overflow lower the in-range density and are counted as discrepancy.
pub fn l1_histogram(h1: &Histogram, h2: &Histogram) -> Result<f64> {
    if h2.lo != h1.lo || h2.hi != h1.hi || h2.counts.len() != h1.counts.len() {
        return Err(Error::InvalidInput("histogram layouts differ".into()));
    }
    let w = h1.bin_width();
    Ok((0..h1.counts.len()).map(|k| (h1.density(k) - h2.density(k)).abs() * w).sum())
}

/// Result of a log-log least-squares fit `log y = exponent * log x + log c`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LogLogFit {
    pub exponent: f64,
    pub coefficient: f64,
    /// Number of points entering the fit; reject fits with few points.
    pub points: usize,
    /// Root-mean-square residual in log space; reject fits that merely
    /// interpolate noise or curvature.
    pub rms_log_residual: f64,
}

fn fit_loglog(pairs: &[(f64, f64)]) -> Result<LogLogFit> {
    let n = pairs.len();
    if n < 4 {
        return Err(Error::NoSolution(format!("only {n} points in fit window")));
    }
    let nf = n as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let det = nf * sxx - sx * sx;
    if det.abs() < 1e-12 {
        return Err(Error::NoSolution("degenerate abscissas in fit window".into()));
    }
    let slope = (nf * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / nf;
    let rms = (pairs
        .iter()
        .map(|&(x, y)| {
            let r = y - slope * x - intercept;
            r * r
        })
        .sum::<f64>()
        / nf)
        .sqrt();
    Ok(LogLogFit {
        exponent: slope,
        coefficient: intercept.exp(),
        points: n,
        rms_log_residual: rms,
    })
}

/// Window lower cut for [`tail_fit`]: beyond every compact support at the
/// reference parameter values.
pub const TAIL_FIT_CUT: f64 = 5.0;

/// Fits `density ~ coefficient * |x|^exponent` over the histogram bins with
/// `|x| >= TAIL_FIT_CUT`. A `C/x^2` tail comes out as exponent -2,
/// coefficient C. Errors when the window holds too few occupied bins (e.g.
/// compactly supported data).
pub fn tail_fit(h: &Histogram) -> Result<LogLogFit> {
    h.validate()?;
    let mut pairs = Vec::new();
    for k in 0..h.counts.len() {
        let (lo, hi) = h.bin_edges(k);
        let mid = 0.5 * (lo + hi);
        if mid.abs() >= TAIL_FIT_CUT && h.counts[k] > 0 {
            pairs.push((mid.abs().ln(), h.density(k).ln()));
        }
    }
    fit_loglog(&pairs)
}

/// Side of an edge on which [`edge_exponent_fit`] samples the density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// Evaluate at `edge + s` (use for a lower support edge).
    Above,
    /// Evaluate at `edge - s` (use for an upper support edge).
    Below,
}

/// Log-log slope of `rho(edge +- s)` for `s` log-spaced in [1e-6, 1e-2]:
/// the density edge exponent (1/2 generic, 3/2 multicritical).
pub fn edge_exponent_fit(rho: &DensitySpec, edge: f64, side: Side) -> Result<LogLogFit> {
    let n = 25;
    let (s_lo, s_hi) = (1e-6f64, 1e-2f64);
    let mut pairs = Vec::new();
    for k in 0..n {
        let s = s_lo * (s_hi / s_lo).powf(k as f64 / (n - 1) as f64);
        let x = match side {
            Side::Above => edge + s,
            Side::Below => edge - s,
        };
        let d = rho.density(x);
        if d > 0.0 {
            pairs.push((s.ln(), d.ln()));
        }
    }
    if pairs.len() < 10 {
        return Err(Error::NoSolution(format!(
            "density vanishes on the {side:?} side of edge {edge}"
        )));
    }
    fit_loglog(&pairs)
}

/// Tail mass of a density outside `[lo, hi]`, used by mass audits.
pub fn mass_outside(rho: &DensitySpec, lo: f64, hi: f64) -> Result<f64> {
    let mut inside = 0.0;
    let n = 2000;
    let w = (hi - lo) / n as f64;
    for k in 0..n {
        inside += bin_average(rho, lo + w * k as f64, lo + w * (k + 1) as f64) * w;
    }
    Ok((rho.total_mass()? - inside).max(0.0))
}
