//! Chordal stochastic Loewner evolution: driving processes, pointwise maps
//! with swallowing detection, trace extraction by backward slit composition,
//! the coefficient SDE hierarchy and its hypoelliptic generator.
//!
//! Reproducibility contract: every stochastic object is a pure function of
//! `(seed, paths, dt)`. Ensemble members draw from independent ChaCha
//! streams keyed by the path index and are reduced in path order, so results
//! are identical for any thread count.

use crate::coeffpoly::{Chart, CoeffPolynomial};
use crate::error::{CoreError, Result};
use crate::scalar::{C64, Coeff};
use crate::series::TruncatedLaurentInf;
use crate::witt::LinearCoeffOperator;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Driving function of a chordal flow.
#[derive(Clone)]
pub struct Driving {
    pub kind: DrivingKind,
    pub horizon: f64,
}

#[derive(Clone)]
pub enum DrivingKind {
    Deterministic(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Brownian { kappa: f64, seed: u64, dt: f64 },
}

impl Driving {
    pub fn deterministic<F>(u: F, horizon: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { kind: DrivingKind::Deterministic(Arc::new(u)), horizon }
    }

    pub fn constant(c: f64, horizon: f64) -> Self {
        Self::deterministic(move |_| c, horizon)
    }

    pub fn brownian(kappa: f64, seed: u64, dt: f64, horizon: f64) -> Self {
        assert!(kappa > 0.0 && dt > 0.0);
        Self { kind: DrivingKind::Brownian { kappa, seed, dt }, horizon }
    }

    pub fn kappa(&self) -> Option<f64> {
        match &self.kind {
            DrivingKind::Brownian { kappa, .. } => Some(*kappa),
            DrivingKind::Deterministic(_) => None,
        }
    }

    /// Sample `W` on the uniform grid `t_k = k dt`, `k = 0..=n_steps`.
    /// Stream 0 of the seed is used; ensembles use streams `1 + path`.
    pub fn sample_grid(&self, n_steps: usize, dt: f64) -> Vec<f64> {
        match &self.kind {
            DrivingKind::Deterministic(u) => {
                (0..=n_steps).map(|k| u(k as f64 * dt)).collect()
            }
            DrivingKind::Brownian { kappa, seed, .. } => {
                let mut rng = ChaCha12Rng::seed_from_u64(*seed);
                rng.set_stream(0);
                brownian_grid(&mut rng, *kappa, n_steps, dt)
            }
        }
    }
}

fn brownian_grid(rng: &mut ChaCha12Rng, kappa: f64, n_steps: usize, dt: f64) -> Vec<f64> {
    let scale = (kappa * dt).sqrt();
    let mut w = Vec::with_capacity(n_steps + 1);
    let mut acc = 0.0;
    w.push(0.0);
    for _ in 0..n_steps {
        let g: f64 = StandardNormal.sample(rng);
        acc += scale * g;
        w.push(acc);
    }
    w
}

// ---------------------------------------------------------------------------
// Pointwise chordal map
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChordalOptions {
    pub swallow_tol: f64,
    pub step_floor: f64,
    /// Substeps per driving step away from the singularity.
    pub substeps: usize,
}

impl Default for ChordalOptions {
    fn default() -> Self {
        Self { swallow_tol: 1e-6, step_floor: 1e-12, substeps: 4 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChordalPoint {
    pub z: [f64; 2],
    pub g: [f64; 2],
    /// Swallowing time, set at most once.
    pub tau: Option<f64>,
}

/// Solve `∂g/∂t = 2/(g - W_t)`, `g_0 = z`, to time `t_end <= horizon`,
/// recording the swallowing time when `|g - W|` reaches the tolerance.
/// The driving is sampled on its own grid and interpolated linearly in
/// between; integration is classical RK4 with step halving near the
/// singularity.
pub fn chordal_map(
    z: C64,
    driving: &Driving,
    t_end: f64,
    opts: &ChordalOptions,
) -> Result<ChordalPoint> {
    let dt = match &driving.kind {
        DrivingKind::Brownian { dt, .. } => *dt,
        DrivingKind::Deterministic(_) => (t_end / 1024.0).max(1e-6),
    };
    let n_steps = (t_end / dt).ceil() as usize;
    let w = driving.sample_grid(n_steps, dt);
    let point = evolve_chordal_point(z, &w, dt, t_end, opts)?;
    Ok(point)
}

fn evolve_chordal_point(
    z: C64,
    w: &[f64],
    dt: f64,
    t_end: f64,
    opts: &ChordalOptions,
) -> Result<ChordalPoint> {
    let w_at = |t: f64| -> f64 {
        let s = (t / dt).min((w.len() - 1) as f64);
        let k = (s.floor() as usize).min(w.len() - 2);
        let frac = s - k as f64;
        w[k] * (1.0 - frac) + w[k + 1] * frac
    };
    let mut g = z;
    let mut t = 0.0;
    let mut tau = None;
    let base_h = dt / opts.substeps as f64;
    'outer: while t < t_end {
        let dist = (g - C64::new(w_at(t), 0.0)).norm();
        if dist < opts.swallow_tol {
            tau = Some(t);
            break;
        }
        // Keep the step small relative to the distance to the singularity:
        // |dg/dt| = 2/dist, so h << dist^2 controls the relative motion.
        let mut h = base_h.min(0.05 * dist * dist).max(opts.step_floor);
        if t + h > t_end {
            h = t_end - t;
        }
        let rhs = |tt: f64, gg: C64| -> Option<C64> {
            let d = gg - C64::new(w_at(tt), 0.0);
            if d.norm() < opts.step_floor {
                None
            } else {
                Some(C64::new(2.0, 0.0) / d)
            }
        };
        let step = |t0: f64, g0: C64, h: f64| -> Option<C64> {
            let k1 = rhs(t0, g0)?;
            let k2 = rhs(t0 + h / 2.0, g0 + k1 * (h / 2.0))?;
            let k3 = rhs(t0 + h / 2.0, g0 + k2 * (h / 2.0))?;
            let k4 = rhs(t0 + h, g0 + k3 * h)?;
            Some(g0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
        };
        loop {
            match step(t, g, h) {
                Some(g_new)
                    if (g_new - C64::new(w_at(t + h), 0.0)).norm() > 0.5 * dist
                        || (g_new - C64::new(w_at(t + h), 0.0)).norm() >= opts.swallow_tol =>
                {
                    g = g_new;
                    t += h;
                    break;
                }
                _ => {
                    // Too close: halve towards the swallowing time.
                    h /= 2.0;
                    if h < opts.step_floor {
                        let d = (g - C64::new(w_at(t), 0.0)).norm();
                        if d < 10.0 * opts.swallow_tol {
                            tau = Some(t);
                            break 'outer;
                        }
                        return Err(CoreError::SwallowTolUnreachable { t, dist: d });
                    }
                }
            }
        }
    }
    if tau.is_none() {
        let dist = (g - C64::new(w_at(t_end), 0.0)).norm();
        if dist < opts.swallow_tol {
            tau = Some(t_end);
        }
    }
    Ok(ChordalPoint { z: [z.re, z.im], g: [g.re, g.im], tau })
}

/// Closed form for the undriven flow: `g_t(z) = sqrt(z^2 + 4t)` on the branch
/// continuous from `g_0 = z` (upper half-plane values for interior points,
/// sign-matched real values on the axis).
pub fn closed_form_chordal(z: C64, t: f64) -> C64 {
    let w = z * z + C64::new(4.0 * t, 0.0);
    let r = w.sqrt();
    if z.im > 0.0 {
        if r.im >= 0.0 {
            r
        } else {
            -r
        }
    } else if z.re >= 0.0 {
        if r.re >= 0.0 {
            r
        } else {
            -r
        }
    } else if r.re <= 0.0 {
        r
    } else {
        -r
    }
}

// ---------------------------------------------------------------------------
// Trace extraction
// ---------------------------------------------------------------------------

/// Square root in the closed upper half-plane.
fn sqrt_upper(w: C64) -> C64 {
    let r = w.sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

/// Trace points by backward composition of per-step vertical-slit maps with
/// piecewise-constant driving:
/// `γ(t_n) = φ_1 ∘ ... ∘ φ_n (W_{t_n})` with
/// `φ_k(y) = U_k + sqrt((y - U_k)^2 - 4 dt)`, `U_k = W_{t_{k-1}}`.
pub fn sle_trace(driving: &Driving, t_end: f64, n_steps: usize) -> Vec<(f64, C64)> {
    let dt = t_end / n_steps as f64;
    let w = driving.sample_grid(n_steps, dt);
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push((0.0, C64::new(w[0], 0.0)));
    for n in 1..=n_steps {
        let mut y = C64::new(w[n], 0.0);
        for k in (1..=n).rev() {
            let u = C64::new(w[k - 1], 0.0);
            y = u + sqrt_upper((y - u) * (y - u) - C64::new(4.0 * dt, 0.0));
        }
        out.push((n as f64 * dt, y));
    }
    out
}

// ---------------------------------------------------------------------------
// Coefficient hierarchy
// ---------------------------------------------------------------------------

/// One realized path of the coefficient hierarchy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlePath {
    pub kappa: f64,
    pub seed: u64,
    pub dt: f64,
    /// Sample times `k dt`.
    pub ts: Vec<f64>,
    /// Driving samples at `ts`.
    pub w: Vec<f64>,
    /// `b[k][j]` is `b_j` at time `ts[k]`, for `j = 0..=n`.
    pub b: Vec<Vec<f64>>,
}

/// Reciprocal-expansion drift polynomials: `p[k] = p_{k+1}(b_0..b_{k-1})`
/// as evaluatable closures over the state vector.
fn eval_p(p_out: &mut [f64], b: &[f64]) {
    // p_1 = 1; p_k = -Σ_{i=0}^{k-2} b_i p_{k-1-i}.
    p_out[0] = 1.0;
    for k in 2..=p_out.len() {
        let mut acc = 0.0;
        for i in 0..=(k - 2) {
            acc += b[i] * p_out[k - 2 - i];
        }
        p_out[k - 1] = -acc;
    }
}

/// Euler–Maruyama integration of the hierarchy
/// `db_0 = -sqrt(κ) dB`, `db_n = 2 p_n dt`; `b_0` is exact at grid points and
/// `b_1(t) = 2t` is computed in closed form (the Euler sum for the constant
/// drift `p_1 = 1` telescopes, so this keeps it exact in floating point).
pub fn coeff_hierarchy(
    kappa: f64,
    seed: u64,
    n_coeffs: usize,
    t_end: f64,
    dt: f64,
    stream: u64,
) -> SlePath {
    let n_steps = (t_end / dt).round().max(1.0) as usize;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let w = brownian_grid(&mut rng, kappa, n_steps, dt);

    let mut b = vec![0.0f64; n_coeffs + 1];
    let mut p = vec![0.0f64; n_coeffs.max(1)];
    let mut ts = Vec::with_capacity(n_steps + 1);
    let mut bs = Vec::with_capacity(n_steps + 1);
    ts.push(0.0);
    bs.push(b.clone());
    for k in 1..=n_steps {
        eval_p(&mut p, &b);
        for (j, pj) in p.iter().enumerate().take(n_coeffs) {
            // drift of b_{j+1}
            if j == 0 {
                continue;
            }
            b[j + 1] += 2.0 * pj * dt;
        }
        let t = k as f64 * dt;
        b[0] = -w[k];
        if n_coeffs >= 1 {
            b[1] = 2.0 * t;
        }
        ts.push(t);
        bs.push(b.clone());
    }
    SlePath { kappa, seed, dt, ts, w, b: bs }
}

/// The truncated map `z + b_0 + b_1/z + ...` at one hierarchy sample.
pub fn hierarchy_map(path: &SlePath, step: usize) -> TruncatedLaurentInf<C64> {
    let b = &path.b[step];
    TruncatedLaurentInf::new(
        C64::new(1.0, 0.0),
        b.iter().map(|&x| C64::new(x, 0.0)).collect(),
    )
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

/// Boxed observable of the coefficient state vector.
pub type Observable = Box<dyn Fn(&[f64]) -> f64 + Sync>;

/// Parameters of a hierarchy ensemble run.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleConfig {
    pub kappa: f64,
    pub seed: u64,
    pub n_coeffs: usize,
    pub t_end: f64,
    pub dt: f64,
    pub paths: usize,
    pub checkpoints: usize,
}

/// Checkpointed per-observable statistics of a hierarchy ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub kappa: f64,
    pub seed: u64,
    pub paths: usize,
    pub dt: f64,
    pub checkpoint_times: Vec<f64>,
    /// `mean[i][o]`: mean of observable `o` at checkpoint `i`.
    pub mean: Vec<Vec<f64>>,
    /// Standard errors, same layout.
    pub se: Vec<Vec<f64>>,
}

/// Run `paths` independent hierarchy paths and evaluate the observables on
/// the state vector at each checkpoint. Path `i` uses ChaCha stream `1 + i`
/// of the master seed; reduction is in path order regardless of threading.
pub fn hierarchy_ensemble<O>(cfg: &EnsembleConfig, observables: &[O]) -> EnsembleStats
where
    O: Fn(&[f64]) -> f64 + Sync,
{
    let EnsembleConfig { kappa, seed, n_coeffs, t_end, dt, paths, checkpoints } = *cfg;
    let n_steps = (t_end / dt).round().max(1.0) as usize;
    let cp_steps: Vec<usize> = (1..=checkpoints)
        .map(|i| (i * n_steps / checkpoints).max(1))
        .collect();
    let n_obs = observables.len();

    let per_path: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|path_idx| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(1 + path_idx as u64);
            let scale = (kappa * dt).sqrt();
            let mut b = vec![0.0f64; n_coeffs + 1];
            let mut p = vec![0.0f64; n_coeffs.max(1)];
            let mut w_acc = 0.0f64;
            let mut values = Vec::with_capacity(checkpoints * n_obs);
            let mut next_cp = 0;
            for k in 1..=n_steps {
                eval_p(&mut p, &b);
                for j in 1..n_coeffs {
                    b[j + 1] += 2.0 * p[j] * dt;
                }
                let g: f64 = StandardNormal.sample(&mut rng);
                w_acc += scale * g;
                b[0] = -w_acc;
                if n_coeffs >= 1 {
                    b[1] = 2.0 * (k as f64 * dt);
                }
                while next_cp < checkpoints && cp_steps[next_cp] == k {
                    for obs in observables {
                        values.push(obs(&b));
                    }
                    next_cp += 1;
                }
            }
            values
        })
        .collect();

    reduce_ensemble(kappa, seed, paths, dt, &cp_steps, n_obs, per_path)
}

fn reduce_ensemble(
    kappa: f64,
    seed: u64,
    paths: usize,
    dt: f64,
    cp_steps: &[usize],
    n_obs: usize,
    per_path: Vec<Vec<f64>>,
) -> EnsembleStats {
    let checkpoints = cp_steps.len();
    let mut sum = vec![vec![0.0f64; n_obs]; checkpoints];
    let mut sumsq = vec![vec![0.0f64; n_obs]; checkpoints];
    for values in &per_path {
        for i in 0..checkpoints {
            for o in 0..n_obs {
                let v = values[i * n_obs + o];
                sum[i][o] += v;
                sumsq[i][o] += v * v;
            }
        }
    }
    let n = paths as f64;
    let mut mean = vec![vec![0.0f64; n_obs]; checkpoints];
    let mut se = vec![vec![0.0f64; n_obs]; checkpoints];
    for i in 0..checkpoints {
        for o in 0..n_obs {
            mean[i][o] = sum[i][o] / n;
            let var = (sumsq[i][o] / n - mean[i][o] * mean[i][o]).max(0.0);
            se[i][o] = (var / n).sqrt();
        }
    }
    EnsembleStats {
        kappa,
        seed,
        paths,
        dt,
        checkpoint_times: cp_steps.iter().map(|&s| s as f64 * dt).collect(),
        mean,
        se,
    }
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

/// Drift polynomials `p_1..p_n` over any coefficient ring, via the series
/// reciprocal of the generic map at infinity.
pub fn drift_polynomials<T: Coeff>(n: usize) -> Vec<CoeffPolynomial<T>> {
    let coeffs: Vec<CoeffPolynomial<T>> =
        (0..=n).map(|k| CoeffPolynomial::var(Chart::Infinity, k as u16)).collect();
    let generic = TruncatedLaurentInf::new(CoeffPolynomial::one(), coeffs);
    generic.reciprocal_coeffs().expect("normalized generic map")
        .into_iter()
        .take(n)
        .collect()
}

/// The lifted generator `A_∞ = (κ/2) ∂_0^2 + 2 Σ_k p_k ∂_k` on the infinity
/// chart, truncated at index `n`. Equals `(κ/2)(L_-1^∞)^2 - 2 L_-2^∞` for the
/// fields of [`l_minus_one`] and [`l_minus_two`].
pub fn sle_generator<T: Coeff>(kappa: T, n: u16) -> LinearCoeffOperator<T> {
    let mut terms = vec![(
        CoeffPolynomial::constant(kappa.div_int(2)),
        vec![0u16, 0u16],
    )];
    let p = drift_polynomials::<T>(n as usize);
    for k in 1..=n {
        terms.push((p[k as usize - 1].scale(&T::from_int(2)), vec![k]));
    }
    LinearCoeffOperator::new(Chart::Infinity, n, terms)
}

/// `L_-1^∞ = -∂/∂b_0`.
pub fn l_minus_one<T: Coeff>(n: u16) -> LinearCoeffOperator<T> {
    LinearCoeffOperator::new(
        Chart::Infinity,
        n,
        vec![(CoeffPolynomial::constant(-T::one()), vec![0u16])],
    )
}

/// `L_-2^∞ = -Σ_k p_k ∂/∂b_k`.
pub fn l_minus_two<T: Coeff>(n: u16) -> LinearCoeffOperator<T> {
    let p = drift_polynomials::<T>(n as usize);
    let terms = (1..=n)
        .map(|k| (p[k as usize - 1].scale(&-T::one()), vec![k]))
        .collect();
    LinearCoeffOperator::new(Chart::Infinity, n, terms)
}
