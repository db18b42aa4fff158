//! Potential families and their Langevin drifts.
//!
//! Cubic family: `V_a(x) = x^3/3 - a x`, drift `a - x^2`. The well around
//! `+sqrt(a)` is separated from the downhill region `x -> -inf` by the
//! barrier at `-sqrt(a)`, so the potential is non-confining for every `a`.
//!
//! Quartic family: `U_g(x) = x^2/2 + g x^4`, drift `-(x/2 + 2 g x^3)`.
//! For `g < 0` both ends `x -> +-inf` are downhill.
//!
//! The coupling at which the stationary spectral problem changes nature is
//! `a* = (3/4) beta^(2/3)` for the cubic family and `g_c = -1/(24 beta)`
//! for the quartic one.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Potential family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Cubic,
    Quartic,
}

/// A potential family instance together with the Dyson index `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Model {
    /// `V_a(x) = x^3/3 - a x`.
    Cubic { a: f64, beta: f64 },
    /// `U_g(x) = x^2/2 + g x^4`.
    Quartic { g: f64, beta: f64 },
}

/// Critical cubic tilt `a* = (3/4) beta^(2/3)`.
pub fn critical_a(beta: f64) -> f64 {
    0.75 * beta.powf(2.0 / 3.0)
}

/// Critical quartic coupling `g_c = -1/(24 beta)`.
pub fn critical_g(beta: f64) -> f64 {
    -1.0 / (24.0 * beta)
}

impl Model {
    /// Validates `beta > 0` and finite parameters.
    pub fn validate(&self) -> Result<()> {
        let (p, beta) = match *self {
            Model::Cubic { a, beta } => (a, beta),
            Model::Quartic { g, beta } => (g, beta),
        };
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
        }
        if !p.is_finite() {
            return Err(Error::InvalidInput("coupling must be finite".into()));
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        match self {
            Model::Cubic { .. } => Family::Cubic,
            Model::Quartic { .. } => Family::Quartic,
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            Model::Cubic { beta, .. } | Model::Quartic { beta, .. } => beta,
        }
    }

    /// Potential value at `x`.
    pub fn potential(&self, x: f64) -> f64 {
        match *self {
            Model::Cubic { a, .. } => x * x * x / 3.0 - a * x,
            Model::Quartic { g, .. } => 0.5 * x * x + g * x.powi(4),
        }
    }

    /// Deterministic one-particle drift of the eigenvalue/matrix Langevin
    /// equation: `a - x^2` (cubic), `-(x/2 + 2 g x^3)` (quartic).
    pub fn drift(&self, x: f64) -> f64 {
        match *self {
            Model::Cubic { a, .. } => a - x * x,
            Model::Quartic { g, .. } => -(0.5 * x + 2.0 * g * x * x * x),
        }
    }

    /// Exact time-`t` solution of the drift ODE `dx/dt = drift(x)` started
    /// at `x0`. Trajectories that blow down (cubic) or blow up (quartic)
    /// within `t` return the signed infinity they diverge to, so callers can
    /// substitute their own escape handling; the Euler step `x0 + drift * t`
    /// is useless at large `|x0|` where the drift is stiff.
    pub fn drift_flow(&self, x0: f64, t: f64) -> f64 {
        match *self {
            Model::Cubic { a, .. } => cubic_flow(a, x0, t),
            Model::Quartic { g, .. } => quartic_flow(g, x0, t),
        }
    }

    /// Critical coupling of the family at this `beta`.
    pub fn critical_coupling(&self) -> f64 {
        match *self {
            Model::Cubic { beta, .. } => critical_a(beta),
            Model::Quartic { beta, .. } => critical_g(beta),
        }
    }

    /// Distance to criticality with the convention that positive values are
    /// on the fully stationary side (`a >= a*`, `g >= g_c`).
    pub fn supercriticality(&self) -> f64 {
        match *self {
            Model::Cubic { a, beta } => a - critical_a(beta),
            Model::Quartic { g, beta } => g - critical_g(beta),
        }
    }
}

/// Flow of `dx/dt = a - x^2`. The equation is a Riccati equation, so the
/// time-`t` map is a Mobius transform of `x0`; orbits started below the
/// barrier `-sqrt(a)` reach `-inf` at a finite time and return `-inf` from
/// then on.
fn cubic_flow(a: f64, x0: f64, t: f64) -> f64 {
    if a > 0.0 {
        let s = a.sqrt();
        if x0 == -s {
            return -s;
        }
        if x0 < -s {
            let t_escape = (s / -x0).atanh() / s;
            if t >= t_escape {
                return f64::NEG_INFINITY;
            }
        }
        let th = (s * t).tanh();
        if th == 1.0 {
            return s;
        }
        s * (x0 + s * th) / (s + x0 * th)
    } else if a == 0.0 {
        if x0 < 0.0 && t >= -1.0 / x0 {
            return f64::NEG_INFINITY;
        }
        x0 / (1.0 + x0 * t)
    } else {
        let m = (-a).sqrt();
        let theta = (x0 / m).atan();
        if m * t >= theta + std::f64::consts::FRAC_PI_2 {
            return f64::NEG_INFINITY;
        }
        m * (theta - m * t).tan()
    }
}

/// Flow of `dx/dt = -(x/2 + 2 g x^3)`. In `u = 1/x^2` the equation is
/// linear, `du/dt = u + 4g`; the sign of `x` never changes. For `g < 0`
/// orbits beyond the barrier `1/(2 sqrt(-g))` diverge in finite time.
fn quartic_flow(g: f64, x0: f64, t: f64) -> f64 {
    if x0 == 0.0 {
        return 0.0;
    }
    let u0 = 1.0 / (x0 * x0);
    let c = u0 + 4.0 * g;
    if g < 0.0 && c <= 0.0 {
        if c == 0.0 {
            return x0;
        }
        let t_escape = (4.0 * g / c).ln();
        if t >= t_escape {
            return if x0 > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
    }
    let u = c * t.exp() - 4.0 * g;
    if u <= 0.0 {
        // Rounding right at the escape time.
        return if x0 > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    x0.signum() / u.sqrt()
}
