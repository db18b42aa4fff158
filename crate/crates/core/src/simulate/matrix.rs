//! Matrix-valued Langevin engine and the symmetric eigensolver behind it.
//!
//! The matrix chain `H += drift(H) dt + dB / sqrt(N)` with symmetric
//! Gaussian increments induces the eigenvalue SDE integrated by the sibling
//! engine; running both and comparing spectra cross-validates them. Real
//! symmetric matrices realize beta = 1 only.
//!
//! The integrator keeps `H = Q D Q^T` in spectral form and splits each step
//! into the exact drift flow followed by an Euler noise kick: the drift is
//! a function of `H` alone, so its flow fixes the eigenvectors and moves
//! each eigenvalue by the scalar flow map. One step is then
//! `M = flow_dt(D) + Q^T dB Q / sqrt(N)`, which is nearly diagonal; Jacobi
//! converges in a couple of sweeps and `Q` accumulates the rotations. The
//! exact flow matters near the restart cutoff, where `drift * dt` spans
//! several orders of magnitude and a plain Euler drift step would teleport
//! re-entering eigenvalues across the whole descent.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{
    flux_records, seeded_rng, signed_crossings_between, Family, Mode, RunOutput, SimConfig,
    SimState,
};
use crate::analysis::Histogram;
use crate::{Error, Result};

/// Increment of symmetric Brownian motion over `dt`: diagonal entries
/// N(0, dt), off-diagonal N(0, dt/2), upper triangle drawn in row-major
/// index order and mirrored. Returned row-major.
pub fn hermitian_bm_increment<R: Rng>(n: usize, dt: f64, rng: &mut R) -> Vec<f64> {
    let mut w = vec![0.0; n * n];
    let diag = dt.sqrt();
    let off = (dt / 2.0).sqrt();
    for i in 0..n {
        for j in i..n {
            let g: f64 = rng.sample(StandardNormal);
            let v = if i == j { diag * g } else { off * g };
            w[i * n + j] = v;
            w[j * n + i] = v;
        }
    }
    w
}

fn max_abs(m: &[f64]) -> f64 {
    m.iter().fold(0.0, |acc, &x| acc.max(x.abs()))
}

fn max_offdiag(m: &[f64], n: usize) -> f64 {
    let mut off: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            off = off.max(m[i * n + j].abs());
        }
    }
    off
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major).
///
/// Returns eigenvalues ascending and the orthogonal matrix whose column k
/// (row-major `q[i*n + k]`) is the k-th eigenvector, so
/// `A = Q diag(vals) Q^T` with max-norm residual below `1e-10 * ||A||max`.
/// Sweeps rotate every off-diagonal pair; convergence is quadratic once
/// the matrix is nearly diagonal.
pub fn sym_eigen(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != n * n {
        return Err(Error::InvalidInput(format!(
            "matrix buffer holds {} entries, expected {}",
            a.len(),
            n * n
        )));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (x, y) = (a[i * n + j], a[j * n + i]);
            if !x.is_finite() || (x - y).abs() > 1e-12 * max_abs(a).max(1.0) {
                return Err(Error::InvalidInput("matrix is not symmetric".into()));
            }
        }
    }
    let mut m = a.to_vec();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    let amax = max_abs(a);
    // Residual ||A - Q L Q^T||max is within a factor n of the largest
    // remaining off-diagonal entry, so this threshold leaves headroom
    // under the 1e-10 contract.
    let tol = 1e-13 * amax;
    let mut converged = amax == 0.0;
    for _sweep in 0..100 {
        if max_offdiag(&m, n) <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apq = m[p * n + r];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let (app, aqq) = (m[p * n + p], m[r * n + r]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k * n + p], m[k * n + r]);
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + r] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p * n + k], m[r * n + k]);
                    m[p * n + k] = c * mpk - s * mqk;
                    m[r * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (qkp, qkq) = (q[k * n + p], q[k * n + r]);
                    q[k * n + p] = c * qkp - s * qkq;
                    q[k * n + r] = s * qkp + c * qkq;
                }
            }
        }
    }
    if !converged && max_offdiag(&m, n) > tol {
        return Err(Error::NoConvergence(
            "Jacobi sweeps did not reduce the off-diagonal".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).expect("finite"));
    let vals: Vec<f64> = order.iter().map(|&k| m[k * n + k]).collect();
    let mut qs = vec![0.0; n * n];
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            qs[i * n + col] = q[i * n + k];
        }
    }
    Ok((vals, qs))
}

/// `out = Q^T w Q`, all row-major n x n.
fn rotate_to_eigenbasis(w: &[f64], q: &[f64], n: usize) -> Vec<f64> {
    let mut tmp = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += w[i * n + k] * q[k * n + j];
            }
            tmp[i * n + j] = s;
        }
    }
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += q[k * n + i] * tmp[k * n + j];
            }
            out[i * n + j] = s;
        }
    }
    out
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn run_matrix_langevin(cfg: &SimConfig) -> Result<RunOutput> {
    run_matrix_langevin_seeded(cfg, 0)
}

pub(super) fn run_matrix_langevin_seeded(cfg: &SimConfig, stream: u64) -> Result<RunOutput> {
    cfg.validate()?;
    if cfg.model.beta() != 1.0 {
        return Err(Error::InvalidInput(
            "matrix engine models real symmetric matrices (beta = 1)".into(),
        ));
    }
    if cfg.mode == Mode::Kill {
        return Err(Error::InvalidInput(
            "kill mode removes eigenvalues and has no matrix realization".into(),
        ));
    }
    let n = cfg.n;
    let mut rng = seeded_rng(cfg.seed, stream);
    // Spectral form of H = 0.
    let mut d = vec![0.0; n];
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    let mut histogram = Histogram::new(cfg.bin_lo, cfg.bin_hi, cfg.bins)?;
    let mut crossings = vec![0i64; cfg.flux_levels.len()];
    let mut explosions = 0u64;
    let mut restarts_counted = 0u64;
    let mut paths = Vec::new();
    let mut time = 0.0;
    let sqrt_n = (n as f64).sqrt();
    let steps = (cfg.t_end / cfg.dt).round() as u64;
    let mut before: Vec<f64> = d.clone();
    for step in 0..steps {
        let w = hermitian_bm_increment(n, cfg.dt, &mut rng);
        let g = rotate_to_eigenbasis(&w, &q, n);
        let mut m = g;
        let scale = cfg.noise_scale / sqrt_n;
        for v in m.iter_mut() {
            *v *= scale;
        }
        for i in 0..n {
            let mut x = cfg.model.drift_flow(d[i], cfg.dt);
            if !x.is_finite() {
                // Escaped within the step; park beyond the cutoff so the
                // explosion protocol below picks it up.
                x = 2.0 * cfg.cutoff * x.signum();
            }
            m[i * n + i] += x;
        }
        let (vals, r) = sym_eigen(&m, n)?;
        q = matmul(&q, &r, n);
        d = vals;
        time += cfg.dt;
        let counted = time > cfg.burn_in;
        // Explosion protocol on the spectrum; eigenvectors keep their
        // columns, so H is reconstructed implicitly with the replaced
        // eigenvalues.
        let mut teleported = false;
        for i in 0..n {
            let x = d[i];
            let exploded = match cfg.model.family() {
                Family::Cubic => x < -cfg.cutoff,
                Family::Quartic => x.abs() > cfg.cutoff,
            };
            if !exploded {
                continue;
            }
            explosions += 1;
            teleported = true;
            match cfg.model.family() {
                Family::Cubic => {
                    d[i] = cfg.cutoff;
                    if counted {
                        restarts_counted += 1;
                        for c in crossings.iter_mut() {
                            *c += 1;
                        }
                    }
                }
                Family::Quartic => {
                    let u: f64 = rng.gen_range(0.0..1.0);
                    d[i] = u * 1e-12 * cfg.cutoff;
                }
            }
        }
        if teleported {
            // Keep (eigenvalue, eigenvector) pairs together while restoring
            // ascending order.
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("finite"));
            let ds: Vec<f64> = order.iter().map(|&k| d[k]).collect();
            let mut qsorted = vec![0.0; n * n];
            for (col, &k) in order.iter().enumerate() {
                for i in 0..n {
                    qsorted[i * n + col] = q[i * n + k];
                }
            }
            d = ds;
            q = qsorted;
        }
        if counted {
            for (c, &level) in crossings.iter_mut().zip(&cfg.flux_levels) {
                *c += signed_crossings_between(&before, &d, level);
            }
            for &x in &d {
                histogram.record(x);
            }
        }
        before.clone_from(&d);
        if cfg.path_stride > 0 && step % cfg.path_stride as u64 == 0 {
            paths.push((time, d.clone()));
        }
    }
    let state = SimState {
        lambdas: d,
        time,
        explosions,
        crossings,
        restarts_counted,
        alive: n,
        rng,
        forced_sorts: 0,
        steps_taken: steps,
    };
    let mut warnings = Vec::new();
    super::finish_warnings(cfg, &state, &mut warnings);
    Ok(RunOutput {
        flux: flux_records(cfg, &state),
        histogram,
        state,
        paths,
        alive_series: vec![(0.0, n), (time, n)],
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::Engine;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bm_increment_is_symmetric_with_the_right_variances() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dt = 0.01;
        let n = 2;
        let draws = 100_000;
        let mut sum_d = 0.0;
        let mut sum_d2 = 0.0;
        let mut sum_o2 = 0.0;
        for _ in 0..draws {
            let w = hermitian_bm_increment(n, dt, &mut rng);
            assert_eq!(w[1], w[2]);
            sum_d += w[0];
            sum_d2 += w[0] * w[0];
            sum_o2 += w[1] * w[1];
        }
        let m = draws as f64;
        assert!((sum_d / m).abs() < 3.0 * (dt / m).sqrt());
        assert!((sum_d2 / m - dt).abs() < 0.03 * dt, "diag var {}", sum_d2 / m);
        assert!((sum_o2 / m - dt / 2.0).abs() < 0.03 * dt, "off var {}", sum_o2 / m);
    }

    #[test]
    fn jacobi_handles_diagonal_and_two_by_two_cases() {
        let (vals, q) = sym_eigen(&[3.0, 0.0, 0.0, -1.0], 2).unwrap();
        assert_eq!(vals, vec![-1.0, 3.0]);
        assert_eq!(q, vec![0.0, 1.0, 1.0, 0.0]);

        let (vals, q) = sym_eigen(&[0.0, 1.0, 1.0, 0.0], 2).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let r = 0.5f64.sqrt();
        // Columns are eigenvectors up to sign; the one for -1 alternates.
        assert!((q[0].abs() - r).abs() < 1e-14);
        assert!(q[0] * q[2] < 0.0);
    }

    #[test]
    fn jacobi_residual_and_orthogonality_on_a_random_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 20;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.sample(StandardNormal);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let (vals, q) = sym_eigen(&a, n).unwrap();
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let amax = max_abs(&a);
        // Residual A - Q diag Q^T in max norm.
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += q[i * n + k] * vals[k] * q[j * n + k];
                }
                worst = worst.max((a[i * n + j] - s).abs());
            }
        }
        assert!(worst <= 1e-10 * amax, "residual {worst}");
        let mut ortho = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += q[k * n + i] * q[k * n + j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((s - target).abs());
            }
        }
        assert!(ortho < 1e-12, "orthogonality defect {ortho}");
    }

    #[test]
    fn jacobi_rejects_asymmetric_input() {
        assert!(sym_eigen(&[0.0, 1.0, 2.0, 0.0], 2).is_err());
        assert!(sym_eigen(&[0.0, 1.0, 1.0], 2).is_err());
    }

    #[test]
    fn zero_noise_matrix_flow_reaches_the_stable_well() {
        let mut cfg = SimConfig::new(crate::model::Model::Cubic { a: 1.0, beta: 1.0 });
        cfg.n = 3;
        cfg.noise_scale = 0.0;
        cfg.t_end = 10.0;
        cfg.burn_in = 1.0;
        let out = run_matrix_langevin(&cfg).unwrap();
        for &x in &out.state.lambdas {
            assert!((x - 1.0).abs() < 1e-6, "eigenvalue {x}");
        }
        assert_eq!(out.state.explosions, 0);
    }

    #[test]
    fn matrix_runs_are_reproducible_and_book_kept() {
        let mut cfg = SimConfig::new(crate::model::Model::Cubic { a: 1.0, beta: 1.0 });
        cfg.n = 5;
        cfg.t_end = 2.0;
        cfg.burn_in = 0.5;
        cfg.seed = 21;
        let a = run_matrix_langevin(&cfg).unwrap();
        let b = run_matrix_langevin(&cfg).unwrap();
        assert_eq!(a.state.lambdas, b.state.lambdas);
        assert_eq!(a.histogram.counts, b.histogram.counts);
        a.histogram.validate().unwrap();
        // One step of slack: accumulated time can land on either side of
        // the burn-in boundary.
        let sampled_steps = ((cfg.t_end - cfg.burn_in) / cfg.dt).round() as i64;
        let expected = sampled_steps * cfg.n as i64;
        assert!((a.histogram.total as i64 - expected).abs() <= cfg.n as i64);
    }

    #[test]
    fn matrix_engine_requires_beta_one_and_restart() {
        let mut cfg = SimConfig::new(crate::model::Model::Cubic { a: 0.0, beta: 2.0 });
        cfg.engine = Engine::Matrix;
        assert!(run_matrix_langevin(&cfg).is_err());
        let mut cfg = SimConfig::new(crate::model::Model::Cubic { a: 0.0, beta: 1.0 });
        cfg.mode = Mode::Kill;
        assert!(run_matrix_langevin(&cfg).is_err());
    }
}
