//! Built-in acceptance suite: eleven numbered end-to-end checks covering
//! the closed-form constants, the stationary solutions, the transform
//! machinery, the characteristics evolution, and the particle simulations.
//!
//! Each check produces a [`CriterionReport`] with the measured worst value,
//! its tolerance, and a machine-readable pass flag; failures never abort
//! the remaining checks. `Scale::Quick` shortens the simulation protocols
//! (shorter runs, same physics); `Scale::Full` runs the reference
//! protocols the tolerances were calibrated against.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{edge_exponent_fit, l1_distance, l1_histogram, Side};
use crate::dynamics::evolve_series;
use crate::equilibrium::{
    stationary, stationary_cubic, stationary_quartic, Regime, StationarySolution,
};
use crate::model::{critical_a, critical_g, Model};
use crate::simulate::{run, Engine, Mode, RunOutput, SimConfig};
use crate::stieltjes::stieltjes_quadrature;
use crate::Result;

/// Protocol size for the simulation-backed criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// Shortened runs (about half a minute total).
    Quick,
    /// Reference protocols (a few minutes total).
    Full,
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    /// What `value` measures, including the pass convention.
    pub metric: &'static str,
    /// Worst measured value across the criterion's cases.
    pub value: f64,
    /// `value < tolerance` is necessary for `pass`; criteria with side
    /// conditions (flux level-independence, monotonicity) record those in
    /// `details` and fold them into `pass`.
    pub tolerance: f64,
    pub pass: bool,
    pub details: Vec<String>,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:>2} {:<24} value {:.3e} tolerance {:.0e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.value,
            self.tolerance,
        )
    }
}

/// Worst-case tracker with per-case detail lines.
struct Gauge {
    worst: f64,
    details: Vec<String>,
}

impl Gauge {
    fn new() -> Self {
        Gauge { worst: 0.0, details: Vec::new() }
    }

    fn record(&mut self, label: String, err: f64) {
        self.worst = self.worst.max(err);
        self.details.push(format!("{label}: {err:.3e}"));
    }

    fn note(&mut self, line: String) {
        self.details.push(line);
    }
}

fn rng_for(seed: u64, criterion: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(criterion);
    rng
}

/// The parameter grid shared by the stationary-solution criteria: all
/// cubic tilts around the critical point and both quartic couplings, at
/// three Dyson indices.
fn stationary_grid() -> Vec<Model> {
    let mut models = Vec::new();
    for &beta in &[1.0, 2.0, 4.0] {
        for &a in &[-1.0, 0.0, 0.75, 1.5] {
            models.push(Model::Cubic { a, beta });
        }
        for &frac in &[1.0, 0.5] {
            models.push(Model::Quartic { g: critical_g(beta) * frac, beta });
        }
    }
    models
}

fn model_label(model: &Model) -> String {
    match *model {
        Model::Cubic { a, beta } => format!("cubic a={a} beta={beta}"),
        Model::Quartic { g, beta } => format!("quartic g={g:.6} beta={beta}"),
    }
}

fn report(
    id: usize,
    name: &'static str,
    metric: &'static str,
    tolerance: f64,
    outcome: Result<(Gauge, bool)>,
) -> CriterionReport {
    match outcome {
        Ok((gauge, side_conditions)) => CriterionReport {
            id,
            name,
            metric,
            value: gauge.worst,
            tolerance,
            pass: gauge.worst < tolerance && side_conditions,
            details: gauge.details,
        },
        Err(e) => CriterionReport {
            id,
            name,
            metric,
            value: f64::NAN,
            tolerance,
            pass: false,
            details: vec![format!("criterion aborted: {e}")],
        },
    }
}

/// Runs the whole suite. `seed` drives both the random spot-check points
/// and the simulations; verdicts are calibrated to be seed-stable.
pub fn run_all(scale: Scale, seed: u64) -> Vec<CriterionReport> {
    let mut out = Vec::with_capacity(11);
    out.push(report(
        1,
        "critical-constants",
        "max |computed - closed form| over the critical constants",
        1e-12,
        constants_criterion(),
    ));
    out.push(report(
        2,
        "stationary-identity",
        "max quadratic-identity residual over the parameter grid, 100 random upper-half-plane points each",
        1e-10,
        identity_criterion(seed),
    ));
    out.push(report(
        3,
        "normalization",
        "max |total mass - 1| / tolerance(regime); 1e-6 compact, 1e-4 heavy-tailed",
        1.0,
        normalization_criterion(),
    ));
    out.push(report(
        4,
        "stieltjes-round-trip",
        "max quadrature-vs-closed-form relative error / tolerance(regime); 1e-5 compact, 1e-3 heavy-tailed; 20 points each",
        1.0,
        round_trip_criterion(seed),
    ));
    out.push(report(
        5,
        "edge-exponents",
        "max |fitted edge exponent - expected| (1/2 square-root edges, 3/2 critical edges)",
        0.02,
        edge_criterion(),
    ));
    out.push(report(
        6,
        "heavy-tails",
        "max relative error of x^2 rho(x) at x = +-1e3 against the tail coefficient",
        0.01,
        tail_criterion(),
    ));
    match protocol_runs(scale, seed) {
        Ok(runs) => {
            out.push(report(
                7,
                "simulation-vs-density",
                "max L1(histogram, stationary density) over the four reference runs; also requires cutoff-doubling stability < 0.01",
                0.1,
                simulation_criterion(&runs),
            ));
            out.push(report(
                8,
                "stationary-flux",
                "max normalized flux error (rate accuracy and level independence / 0.15, supercritical leak / 0.05)",
                1.0,
                flux_criterion(&runs),
            ));
        }
        Err(e) => {
            let msg = format!("criterion aborted: {e}");
            for (id, name, tol) in
                [(7, "simulation-vs-density", 0.1), (8, "stationary-flux", 1.0)]
            {
                out.push(CriterionReport {
                    id,
                    name,
                    metric: "reference simulations failed to run",
                    value: f64::NAN,
                    tolerance: tol,
                    pass: false,
                    details: vec![msg.clone()],
                });
            }
        }
    }
    out.push(report(
        9,
        "pde-convergence",
        "sup distance to the stationary transform at t=50 from a point-mass start; also requires a non-increasing distance series after t=5",
        1e-3,
        pde_criterion(scale),
    ));
    out.push(report(
        10,
        "engine-cross-validation",
        "L1 distance between matrix-chain and eigenvalue-chain histograms on a matched protocol",
        0.1,
        engines_criterion(scale, seed),
    ));
    out.push(report(
        11,
        "kill-mode-mass",
        "|a - (3/4) alpha^(1/3)| for the terminal surviving mass fraction alpha",
        0.1,
        kill_criterion(scale, seed),
    ));
    out
}

/// Criterion 1: the closed-form critical constants, exactly.
fn constants_criterion() -> Result<(Gauge, bool)> {
    let mut g = Gauge::new();
    g.record("a* at beta=1".into(), (critical_a(1.0) - 0.75).abs());
    let sol = stationary_cubic(0.75, 1.0)?;
    let zeta = sol.zeta.expect("cubic solutions carry zeta");
    g.record("zeta at a*, beta=1".into(), (zeta - Complex64::new(-0.5, 0.0)).norm());
    g.record("J at a*, beta=1".into(), (sol.j - Complex64::new(-0.75, 0.0)).norm());
    let (lo, hi) = sol.support_edges();
    g.record("lower support edge at a*".into(), (lo + 0.5).abs());
    g.record("upper support edge at a*".into(), (hi - 1.5).abs());
    g.record("g_c at beta=2".into(), (critical_g(2.0) + 1.0 / 48.0).abs());
    let solq = stationary_quartic(critical_g(2.0), 2.0)?;
    let (qlo, qhi) = solq.support_edges();
    let edge = 2.0 * 2.0f64.sqrt();
    g.record("lower quartic edge at g_c, beta=2".into(), (qlo + edge).abs());
    g.record("upper quartic edge at g_c, beta=2".into(), (qhi - edge).abs());
    Ok((g, true))
}

/// Criterion 2: the stationary transform satisfies its quadratic identity
/// pointwise in the upper half-plane.
fn identity_criterion(seed: u64) -> Result<(Gauge, bool)> {
    let mut rng = rng_for(seed, 2);
    let mut g = Gauge::new();
    for model in stationary_grid() {
        let sol = stationary(&model)?;
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.01..3.0));
            let gz = sol.transform(z);
            let beta = model.beta();
            let res = match model {
                Model::Cubic { a, .. } => beta / 4.0 * gz * gz + (z * z - a) * gz + z - sol.j,
                Model::Quartic { g: cpl, .. } => {
                    beta / 4.0 * gz * gz + (2.0 * cpl * z * z * z + z / 2.0) * gz
                        + 2.0 * cpl * z * z
                        - sol.j
                }
            };
            worst = worst.max(res.norm());
        }
        g.record(model_label(&model), worst);
    }
    Ok((g, true))
}

fn mass_tolerance(sol: &StationarySolution) -> f64 {
    if sol.regime == Regime::Subcritical {
        1e-4
    } else {
        1e-6
    }
}

/// Criterion 3: every stationary density integrates to one.
fn normalization_criterion() -> Result<(Gauge, bool)> {
    let mut g = Gauge::new();
    for model in stationary_grid() {
        let sol = stationary(&model)?;
        let err = (sol.density_spec().total_mass()? - 1.0).abs();
        g.record(model_label(&model), err / mass_tolerance(&sol));
    }
    Ok((g, true))
}

/// Criterion 4: integrating the density reproduces the closed-form
/// transform.
fn round_trip_criterion(seed: u64) -> Result<(Gauge, bool)> {
    let mut rng = rng_for(seed, 4);
    let mut g = Gauge::new();
    let models = [
        Model::Cubic { a: 0.75, beta: 1.0 },
        Model::Cubic { a: 1.5, beta: 1.0 },
        Model::Quartic { g: critical_g(2.0), beta: 2.0 },
        Model::Cubic { a: 0.0, beta: 1.0 },
        Model::Cubic { a: -1.0, beta: 1.0 },
    ];
    for model in models {
        let sol = stationary(&model)?;
        let spec = sol.density_spec();
        let tol = if sol.regime == Regime::Subcritical { 1e-3 } else { 1e-5 };
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..2.5));
            let quad = stieltjes_quadrature(&spec, z)?;
            let closed = sol.transform(z);
            worst = worst.max((quad - closed).norm() / closed.norm());
        }
        g.record(model_label(&model), worst / tol);
    }
    Ok((g, true))
}

/// Criterion 5: density edge exponents; square root at plain edges, 3/2 at
/// critical edges.
fn edge_criterion() -> Result<(Gauge, bool)> {
    let mut g = Gauge::new();
    let check = |label: &str,
                     sol: &StationarySolution,
                     edge: f64,
                     side: Side,
                     expected: f64,
                     g: &mut Gauge|
     -> Result<()> {
        let fit = edge_exponent_fit(&sol.density_spec(), edge, side)?;
        g.record(format!("{label} (expect {expected})"), (fit.exponent - expected).abs());
        Ok(())
    };
    let sup = stationary_cubic(1.5, 1.0)?;
    let (lo, hi) = sup.support_edges();
    check("cubic a=1.5 lower edge", &sup, lo, Side::Above, 0.5, &mut g)?;
    check("cubic a=1.5 upper edge", &sup, hi, Side::Below, 0.5, &mut g)?;
    let supq = stationary_quartic(critical_g(1.0) * 0.5, 1.0)?;
    let (qlo, qhi) = supq.support_edges();
    check("quartic g=g_c/2 lower edge", &supq, qlo, Side::Above, 0.5, &mut g)?;
    check("quartic g=g_c/2 upper edge", &supq, qhi, Side::Below, 0.5, &mut g)?;
    let crit = stationary_cubic(0.75, 1.0)?;
    let (clo, _) = crit.support_edges();
    check("cubic a=a* lower edge", &crit, clo, Side::Above, 1.5, &mut g)?;
    let critq = stationary_quartic(critical_g(1.0), 1.0)?;
    let (tlo, thi) = critq.support_edges();
    check("quartic g=g_c lower edge", &critq, tlo, Side::Above, 1.5, &mut g)?;
    check("quartic g=g_c upper edge", &critq, thi, Side::Below, 1.5, &mut g)?;
    Ok((g, true))
}

/// Criterion 6: the heavy-tailed density satisfies
/// `x^2 rho(x) -> Im J / pi` far out on both sides.
fn tail_criterion() -> Result<(Gauge, bool)> {
    let sol = stationary_cubic(0.0, 1.0)?;
    let target = sol.j.im / PI;
    let mut g = Gauge::new();
    g.note(format!("tail coefficient Im J / pi = {target:.7}"));
    for &x in &[1e3, -1e3] {
        let got = x * x * sol.density(x);
        g.record(format!("x = {x}"), (got - target).abs() / target);
    }
    Ok((g, true))
}

/// The four reference simulations shared by criteria 7 and 8, plus the
/// cutoff-doubled rerun of the heavy-tailed one.
struct ProtocolRuns {
    cubic: Vec<(f64, RunOutput)>,
    quartic: RunOutput,
    cubic0_wide: RunOutput,
}

fn protocol_runs(scale: Scale, seed: u64) -> Result<ProtocolRuns> {
    let (t_end, burn_in) = match scale {
        Scale::Full => (100.0, 10.0),
        Scale::Quick => (30.0, 5.0),
    };
    let configure = |model: Model| {
        let mut cfg = SimConfig::new(model);
        cfg.t_end = t_end;
        cfg.burn_in = burn_in;
        cfg.seed = seed;
        cfg
    };
    let mut cubic = Vec::new();
    for &a in &[0.0, 0.75, 1.5] {
        cubic.push((a, run(&configure(Model::Cubic { a, beta: 1.0 }))?));
    }
    let quartic = run(&configure(Model::Quartic { g: -1.0 / 24.0, beta: 1.0 }))?;
    let mut wide = configure(Model::Cubic { a: 0.0, beta: 1.0 });
    wide.cutoff *= 2.0;
    let cubic0_wide = run(&wide)?;
    Ok(ProtocolRuns { cubic, quartic, cubic0_wide })
}

/// Criterion 7: simulated spectra match the stationary densities, and the
/// match is stable under doubling the restart cutoff.
fn simulation_criterion(runs: &ProtocolRuns) -> Result<(Gauge, bool)> {
    let mut g = Gauge::new();
    let mut l1_cubic0 = f64::NAN;
    for (a, out) in &runs.cubic {
        let sol = stationary_cubic(*a, 1.0)?;
        let l1 = l1_distance(&out.histogram, &sol.density_spec())?;
        if *a == 0.0 {
            l1_cubic0 = l1;
        }
        g.record(format!("cubic a={a}"), l1);
    }
    let solq = stationary_quartic(-1.0 / 24.0, 1.0)?;
    g.record("quartic g=-1/24".into(), l1_distance(&runs.quartic.histogram, &solq.density_spec())?);
    let sol0 = stationary_cubic(0.0, 1.0)?;
    let l1_wide = l1_distance(&runs.cubic0_wide.histogram, &sol0.density_spec())?;
    let delta = (l1_wide - l1_cubic0).abs();
    let stable = delta < 0.01;
    g.note(format!(
        "cutoff doubled to 2e3 at a=0: L1 {l1_wide:.4}, change {delta:.4} (require < 0.01): {}",
        if stable { "ok" } else { "unstable" }
    ));
    Ok((g, stable))
}

/// Criterion 8: the crossing rate matches `(N/pi) Im J`, is independent of
/// the level, and vanishes in the fully stationary regime.
fn flux_criterion(runs: &ProtocolRuns) -> Result<(Gauge, bool)> {
    let sol0 = stationary_cubic(0.0, 1.0)?;
    let mut g = Gauge::new();
    let (_, sub) = &runs.cubic[0];
    let reference = sub.state.alive as f64 / PI * sol0.j.im;
    g.note(format!("reference escape rate (N/pi) Im J = {reference:.4}"));
    let rate0 = sub
        .flux
        .iter()
        .find(|f| f.level == 0.0)
        .ok_or_else(|| crate::Error::InvalidInput("no level-0 flux record".into()))?
        .rate;
    g.note(format!("measured rate at level 0: {rate0:.4}"));
    g.record("a=0 rate accuracy / 0.15".into(), ((rate0 - reference) / reference).abs() / 0.15);
    for f in &sub.flux {
        if f.level != 0.0 {
            g.record(
                format!("a=0 level {} vs level 0 / 0.15", f.level),
                ((f.rate - rate0) / rate0).abs() / 0.15,
            );
        }
    }
    let (_, sup) = &runs.cubic[2];
    let leak = sup.flux.iter().find(|f| f.level == 0.0).map(|f| f.rate).unwrap_or(0.0);
    g.record(
        "a=1.5 |rate| vs 5% of reference".into(),
        leak.abs() / (0.05 * reference),
    );
    Ok((g, true))
}

/// Criterion 9: characteristics evolution from a point mass converges to
/// the stationary transform, monotonically once the transient has passed.
fn pde_criterion(scale: Scale) -> Result<(Gauge, bool)> {
    let sol = stationary_cubic(0.0, 1.0)?;
    let targets: Vec<Complex64> =
        (0..10).map(|k| Complex64::new(-2.7 + 0.6 * k as f64, 1.0)).collect();
    let step = match scale {
        Scale::Full => 1.0,
        Scale::Quick => 2.5,
    };
    let times: Vec<f64> = (0..).map(|k| k as f64 * step).take_while(|&t| t <= 50.0).collect();
    let g0 = |w: Complex64| 1.0 / w;
    let fields = evolve_series(&g0, 0.0, 1.0, &targets, &times, 1e-3);
    let mut g = Gauge::new();
    let mut series = Vec::with_capacity(times.len());
    let mut missing = 0usize;
    for field in &fields {
        let mut d = 0.0f64;
        for (k, v) in field.values.iter().enumerate() {
            match v {
                Some(v) => d = d.max((v - sol.transform(targets[k])).norm()),
                None => missing += 1,
            }
        }
        series.push((field.time, d));
    }
    for &(t, d) in &series {
        if t == 0.0 || (t / 10.0).fract() == 0.0 {
            g.note(format!("distance at t={t}: {d:.3e}"));
        }
    }
    let mut monotone = true;
    for w in series.windows(2) {
        if w[0].0 >= 5.0 && w[1].1 > w[0].1 + 1e-9 {
            monotone = false;
            g.note(format!(
                "distance increased between t={} and t={}: {:.3e} -> {:.3e}",
                w[0].0, w[1].0, w[0].1, w[1].1
            ));
        }
    }
    if missing > 0 {
        g.note(format!("{missing} target evaluations failed"));
    }
    g.record("sup distance at t=50".into(), series.last().expect("nonempty").1);
    Ok((g, monotone && missing == 0))
}

/// Criterion 10: the matrix chain and the eigenvalue chain sample the same
/// spectrum. Coarser bins than the density criteria: with matched but
/// independent noise, finer binning only measures Monte Carlo noise twice.
fn engines_criterion(scale: Scale, seed: u64) -> Result<(Gauge, bool)> {
    let t_end = match scale {
        Scale::Full => 50.0,
        Scale::Quick => 30.0,
    };
    let mut cfg = SimConfig::new(Model::Cubic { a: 0.0, beta: 1.0 });
    cfg.n = 20;
    cfg.t_end = t_end;
    cfg.seed = seed;
    cfg.bins = 80;
    let eigen = run(&cfg)?;
    cfg.engine = Engine::Matrix;
    let matrix = run(&cfg)?;
    let mut g = Gauge::new();
    let sol = stationary_cubic(0.0, 1.0)?;
    g.note(format!(
        "eigenvalue chain: L1 to stationary {:.4}, {} explosions",
        l1_distance(&eigen.histogram, &sol.density_spec())?,
        eigen.state.explosions
    ));
    g.note(format!(
        "matrix chain: L1 to stationary {:.4}, {} explosions",
        l1_distance(&matrix.histogram, &sol.density_spec())?,
        matrix.state.explosions
    ));
    g.record("L1 between engine histograms".into(), l1_histogram(&eigen.histogram, &matrix.histogram)?);
    Ok((g, true))
}

/// Criterion 11: absorbing runs lose mass until the surviving fraction
/// stalls; the stated test relates the plateau mass to the coupling
/// through a cube root.
///
/// The relation tested here does not reduce to the critical coupling
/// `a* = (3/4) beta^(2/3)` at full mass alpha = 1, while the two-thirds
/// variant `a = (3/4) (alpha beta)^(2/3)` does, and a surviving mass of
/// exactly `(4a/3)^(3/2)` makes the tested value 0.11 at a = 1/2. The
/// measured plateau lands on the two-thirds relation (reported in the
/// details); the cube-root form is computed as stated and is expected to
/// fail by that same small margin.
fn kill_criterion(scale: Scale, seed: u64) -> Result<(Gauge, bool)> {
    let t_end = match scale {
        Scale::Full => 100.0,
        Scale::Quick => 30.0,
    };
    let a = 0.5;
    let mut cfg = SimConfig::new(Model::Cubic { a, beta: 1.0 });
    cfg.n = 100;
    cfg.t_end = t_end;
    cfg.seed = seed;
    cfg.mode = Mode::Kill;
    let out = run(&cfg)?;
    let alpha = out.state.alive as f64 / cfg.n as f64;
    let mut g = Gauge::new();
    g.note(format!("surviving {} of {} particles, alpha = {alpha}", out.state.alive, cfg.n));
    if let Some(w) = out
        .alive_series
        .windows(2)
        .filter(|w| w[1].1 < w[0].1)
        .last()
    {
        g.note(format!("last absorption at t = {:.1}", w[1].0));
    }
    g.note(format!(
        "two-thirds relation |a - (3/4) alpha^(2/3)| = {:.4} (critical-coupling scaling)",
        (a - 0.75 * alpha.powf(2.0 / 3.0)).abs()
    ));
    g.record(
        "|a - (3/4) alpha^(1/3)| as stated".into(),
        (a - 0.75 * alpha.powf(1.0 / 3.0)).abs(),
    );
    Ok((g, true))
}
