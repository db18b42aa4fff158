//! Closed-form roots of real-coefficient cubics, plus the distinguished
//! saddle roots driving the stationary spectral problem.
//!
//! `solve_cubic` uses Cardan's formulas: the trigonometric form when all
//! three roots are real, and the stable one-real-root form (larger cube
//! root first, cofactor from the product identity) otherwise. Each root
//! gets one Newton polish on the original cubic.
//!
//! `zeta_cubic(a, beta)` returns the distinguished root of
//! `P'(z) = 4 z^3 - 4 a z - beta`: the upper-half-plane root for
//! `a < a* = (3/4) beta^(2/3)` and the smallest real root for `a >= a*`.
//! `xi_quartic(g, beta)` returns the smallest real root of
//! `P_g'(z) = z (24 g^2 z^4 + 8 g z^2 + 1/2 - 4 beta g)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::model::{critical_a, critical_g};
use crate::{Error, Result};

/// Root multiplicity structure of a real cubic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CubicClass {
    /// Three distinct real roots.
    ThreeReal,
    /// One real root and a complex-conjugate pair.
    OneRealPair,
    /// A real double root plus a distinct simple real root.
    DoubleReal,
    /// A real triple root.
    TripleReal,
}

/// Roots of a real cubic, ordered with real roots ascending and any
/// complex-conjugate pair last (upper-half-plane member first).
#[derive(Debug, Clone, Copy)]
pub struct CubicRoots {
    pub roots: [Complex64; 3],
    pub class: CubicClass,
    /// Discriminant of the depressed monic cubic; negative iff a
    /// complex-conjugate pair is present.
    pub discriminant: f64,
}

/// Relative threshold below which two roots count as merged.
fn merge_tol(r: f64) -> f64 {
    1e-7 * (1.0 + r.abs())
}

/// Solves `c3 x^3 + c2 x^2 + c1 x + c0 = 0` with real coefficients.
pub fn solve_cubic(c3: f64, c2: f64, c1: f64, c0: f64) -> Result<CubicRoots> {
    if !(c3.is_finite() && c2.is_finite() && c1.is_finite() && c0.is_finite()) {
        return Err(Error::InvalidInput("cubic coefficients must be finite".into()));
    }
    if c3 == 0.0 {
        return Err(Error::InvalidInput("leading cubic coefficient is zero".into()));
    }
    let b = c2 / c3;
    let c = c1 / c3;
    let d = c0 / c3;
    // Depressed form t^3 + p t + q via x = t - b/3.
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = -4.0 * p * p * p - 27.0 * q * q;

    let mut roots = if disc > 0.0 {
        // Three distinct real roots: trigonometric form.
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
        let theta = arg.clamp(-1.0, 1.0).acos() / 3.0;
        let mut ts = [0.0f64; 3];
        for (k, t) in ts.iter_mut().enumerate() {
            *t = m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
        }
        [
            Complex64::new(ts[0] - shift, 0.0),
            Complex64::new(ts[1] - shift, 0.0),
            Complex64::new(ts[2] - shift, 0.0),
        ]
    } else if p == 0.0 && q == 0.0 {
        [Complex64::new(-shift, 0.0); 3]
    } else {
        // One real root; pick the cube root that avoids cancellation and
        // recover the cofactor from u v = -p/3.
        let s = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        let w = -q / 2.0 - s.copysign(q);
        let u = w.cbrt();
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let t1 = u + v;
        let re = -t1 / 2.0;
        let im = 3.0f64.sqrt() / 2.0 * (u - v).abs();
        [
            Complex64::new(t1 - shift, 0.0),
            Complex64::new(re - shift, im),
            Complex64::new(re - shift, -im),
        ]
    };

    // One Newton polish per root on the original cubic.
    for r in roots.iter_mut() {
        let z = *r;
        let f = ((Complex64::new(c3, 0.0) * z + c2) * z + c1) * z + c0;
        let df = (Complex64::new(3.0 * c3, 0.0) * z + 2.0 * c2) * z + c1;
        if df.norm() > 1e-300 {
            let step = f / df;
            if step.norm() < 1.0 + z.norm() {
                *r = z - step;
            }
        }
    }

    // Merge near-coincident values and classify.
    let pair_im = roots[1].im;
    let class = if pair_im.abs() > merge_tol(roots[1].re) {
        CubicClass::OneRealPair
    } else {
        // All roots effectively real: sort ascending, then inspect gaps.
        for r in roots.iter_mut() {
            *r = Complex64::new(r.re, 0.0);
        }
        roots.sort_by(|x, y| x.re.total_cmp(&y.re));
        let close01 = (roots[0].re - roots[1].re).abs() < merge_tol(roots[1].re);
        let close12 = (roots[1].re - roots[2].re).abs() < merge_tol(roots[1].re);
        match (close01, close12) {
            (true, true) => CubicClass::TripleReal,
            (false, false) => CubicClass::ThreeReal,
            _ => CubicClass::DoubleReal,
        }
    };

    Ok(CubicRoots { roots, class, discriminant: disc })
}

/// Distinguished root of `P'(z) = 4 z^3 - 4 a z - beta`.
///
/// Below the critical tilt the root is complex with positive imaginary
/// part, given by the Cardan pair `zeta = j u + j^2 v` with
/// `u = (beta^(1/3)/2) cbrt(1 + s)`, `v = (beta^(1/3)/2) cbrt(1 - s)`,
/// `s = sqrt(1 - (a/a*)^3)` and `j = exp(2 i pi / 3)`; the signed cube
/// root keeps `u v = a/3` for negative tilts. At and above the critical
/// tilt the root is real: `-beta^(1/3)/2` exactly at `a*`, else the
/// smallest real root of `P'`.
pub fn zeta_cubic(a: f64, beta: f64) -> Result<Complex64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("tilt a must be finite".into()));
    }
    let astar = critical_a(beta);
    let cbrt_beta = beta.cbrt();
    if (a - astar).abs() < 1e-12 {
        return Ok(Complex64::new(-cbrt_beta / 2.0, 0.0));
    }
    if a < astar {
        let ratio = a / astar;
        let s = (1.0 - ratio * ratio * ratio).max(0.0).sqrt();
        let u = cbrt_beta / 2.0 * (1.0 + s).cbrt();
        let v = cbrt_beta / 2.0 * (1.0 - s).cbrt();
        // j u + j^2 v with j = -1/2 + i sqrt(3)/2.
        return Ok(Complex64::new(-(u + v) / 2.0, 3.0f64.sqrt() / 2.0 * (u - v)));
    }
    let sol = solve_cubic(4.0, 0.0, -4.0 * a, -beta)?;
    let zeta = sol
        .roots
        .iter()
        .filter(|r| r.im == 0.0)
        .map(|r| r.re)
        .fold(f64::INFINITY, f64::min);
    Ok(Complex64::new(zeta, 0.0))
}

/// Smallest real root `xi = -sqrt(X_+)` of the quartic saddle polynomial,
/// with `X_+ = -(1/(6g)) (1 + sqrt(1 + 24 beta g)/2)`.
///
/// Defined for `g_c <= g < 0`; outside that window the stationary quartic
/// problem has no real saddle of this kind.
pub fn xi_quartic(g: f64, beta: f64) -> Result<f64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    if !g.is_finite() || g >= 0.0 {
        return Err(Error::InvalidInput(format!(
            "xi_quartic requires a destabilizing coupling g < 0, got {g}"
        )));
    }
    let gc = critical_g(beta);
    let disc = 1.0 + 24.0 * beta * g;
    if disc < -1e-12 {
        return Err(Error::NoSolution(format!(
            "g = {g} below the critical coupling {gc}: no stationary saddle"
        )));
    }
    let s = disc.max(0.0).sqrt();
    let x_plus = -(1.0 + s / 2.0) / (6.0 * g);
    Ok(-x_plus.sqrt())
}
