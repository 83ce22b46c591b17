//! Monte Carlo martingale verification: checkpointed mean-drift z-tests for
//! coefficient observables of the hierarchy, the boundary-observable family
//! `(g')^α (g - W)^β`, and the central-charge/highest-weight map.
//!
//! Testing discipline: a run first passes the exact calibration gates
//! (`b_1(T) = 2T` bitwise, `E[b_0(T)^2]` within 5 SE of `κT`) before any
//! verdict is reported. Verdicts compare the largest checkpoint |z|-score
//! against a configurable critical value (default 4, chosen against
//! multiple-checkpoint false alarms).

use crate::circle::CentralParams;
use crate::coeffpoly::{Chart, CoeffPolynomial};
use crate::error::{CoreError, Result};
use crate::scalar::{rat_to_f64, Coeff, Rat};
use crate::sle::{hierarchy_ensemble, l_minus_one, l_minus_two, sle_generator, EnsembleConfig, Observable};
use crate::witt::{kernel_solve, operator_action};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `c = (6-κ)(3κ-8)/(2κ)`, `h = (6-κ)/(2κ)`.
pub fn ch_from_kappa(kappa: f64) -> CentralParams {
    assert!(kappa > 0.0);
    CentralParams {
        c: (6.0 - kappa) * (3.0 * kappa - 8.0) / (2.0 * kappa),
        h: (6.0 - kappa) / (2.0 * kappa),
    }
}

/// Exact rational version of [`ch_from_kappa`].
pub fn ch_from_kappa_exact(kappa: &Rat) -> (Rat, Rat) {
    assert!(!kappa.is_zero());
    let six = Rat::from_int(6);
    let eight = Rat::from_int(8);
    let three = Rat::from_int(3);
    let two = Rat::from_int(2);
    let inv = (two * kappa.clone()).try_inv().unwrap();
    let c = (six.clone() - kappa.clone()) * (three * kappa.clone() - eight) * inv.clone();
    let h = (six - kappa.clone()) * inv;
    (c, h)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    DriftDetected,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointStat {
    pub t: f64,
    pub mean: f64,
    pub se: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportMeta {
    pub kappa: f64,
    pub seed: u64,
    pub paths: usize,
    pub dt: f64,
    pub z_crit: f64,
    /// z-score of `E[b_0(T)^2]` against `κT` (or of the scheme-equivalent
    /// gate for pointwise runs); the verdict is only meaningful when the
    /// calibration gate holds.
    pub calibration_z: f64,
    pub calibration_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swallowed_fraction: Option<f64>,
    pub high_variance: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftReport {
    pub observable: String,
    pub checkpoints: Vec<CheckpointStat>,
    pub max_abs_z: f64,
    pub verdict: Verdict,
    pub meta: ReportMeta,
}

impl DriftReport {
    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::Consistent
    }

    /// Checkpoint table as CSV (`t,mean,se,z`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mean,se,z\n");
        for c in &self.checkpoints {
            out.push_str(&format!("{},{},{},{}\n", c.t, c.mean, c.se, c.z));
        }
        out
    }
}

/// Drift z-score; a nonzero mean with zero sampling variance is an exact
/// (infinitely significant) drift.
fn z_score(mean: f64, se: f64) -> f64 {
    if se > 0.0 {
        mean / se
    } else if mean == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(mean)
    }
}

/// Configuration shared by the Monte Carlo drift tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McConfig {
    pub kappa: f64,
    pub t_end: f64,
    pub dt: f64,
    pub paths: usize,
    pub checkpoints: usize,
    pub seed: u64,
    pub z_crit: f64,
    /// Minimal drift magnitude (per unit time) the run must be able to
    /// resolve; when set, an underpowered ensemble is an error.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_detectable_drift: Option<f64>,
}

impl McConfig {
    pub fn new(kappa: f64, t_end: f64, dt: f64, paths: usize, seed: u64) -> Self {
        Self {
            kappa,
            t_end,
            dt,
            paths,
            checkpoints: 8,
            seed,
            z_crit: 4.0,
            min_detectable_drift: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Coefficient-observable drift test
// ---------------------------------------------------------------------------

/// Sparse compiled form of a rational polynomial for fast evaluation.
struct CompiledPoly {
    terms: Vec<(Vec<(usize, u32)>, f64)>,
}

impl CompiledPoly {
    fn new(p: &CoeffPolynomial<Rat>) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                (
                    m.pairs().iter().map(|&(v, e)| (v as usize, e as u32)).collect(),
                    rat_to_f64(c),
                )
            })
            .collect();
        Self { terms }
    }

    fn eval(&self, b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (mono, coeff) in &self.terms {
            let mut v = *coeff;
            for &(var, e) in mono {
                v *= b[var].powi(e as i32);
            }
            acc += v;
        }
        acc
    }
}

fn max_var_index(p: &CoeffPolynomial<Rat>) -> usize {
    p.terms()
        .filter_map(|(m, _)| m.max_var())
        .max()
        .unwrap_or(0) as usize
}

/// Checkpointed drift test of a polynomial observable of the hierarchy
/// coefficients: estimates `E[P(b(t_i)) - P(b(0))]` and flags any
/// significant departure from zero.
pub fn drift_test(p: &CoeffPolynomial<Rat>, label: &str, cfg: &McConfig) -> Result<DriftReport> {
    if let Some(chart) = p.chart() {
        if chart != Chart::Infinity {
            return Err(CoreError::ChartMismatch("infinity", chart.name()));
        }
    }
    let n_coeffs = max_var_index(p).max(1);
    let compiled = CompiledPoly::new(p);
    let p0 = compiled.eval(&vec![0.0; n_coeffs + 1]);

    let observables: Vec<Observable> = vec![
        Box::new(move |b: &[f64]| compiled.eval(b) - p0),
        Box::new(|b: &[f64]| b[0] * b[0]),
    ];
    let stats = hierarchy_ensemble(
        &EnsembleConfig {
            kappa: cfg.kappa,
            seed: cfg.seed,
            n_coeffs,
            t_end: cfg.t_end,
            dt: cfg.dt,
            paths: cfg.paths,
            checkpoints: cfg.checkpoints,
        },
        &observables,
    );

    let last = stats.checkpoint_times.len() - 1;
    let t_last = stats.checkpoint_times[last];
    let cal_se = stats.se[last][1].max(1e-300);
    let calibration_z = (stats.mean[last][1] - cfg.kappa * t_last) / cal_se;
    let calibration_ok = calibration_z.abs() <= 5.0;

    let mut checkpoints = Vec::with_capacity(stats.checkpoint_times.len());
    let mut max_abs_z = 0.0f64;
    for i in 0..stats.checkpoint_times.len() {
        let mean = stats.mean[i][0];
        let se = stats.se[i][0];
        let z = z_score(mean, se);
        max_abs_z = max_abs_z.max(z.abs());
        checkpoints.push(CheckpointStat { t: stats.checkpoint_times[i], mean, se, z });
    }

    if let Some(effect) = cfg.min_detectable_drift {
        let resolvable = cfg.z_crit * checkpoints[last].se / t_last.max(1e-300);
        if resolvable > effect {
            return Err(CoreError::InsufficientPaths { se: checkpoints[last].se, effect });
        }
    }

    let verdict = if max_abs_z > cfg.z_crit {
        Verdict::DriftDetected
    } else {
        Verdict::Consistent
    };
    Ok(DriftReport {
        observable: label.to_string(),
        checkpoints,
        max_abs_z,
        verdict,
        meta: ReportMeta {
            kappa: cfg.kappa,
            seed: cfg.seed,
            paths: cfg.paths,
            dt: cfg.dt,
            z_crit: cfg.z_crit,
            calibration_z,
            calibration_ok,
            swallowed_fraction: None,
            high_variance: false,
        },
    })
}

/// Kernel basis of the lifted generator at the given weight, each element run
/// through [`drift_test`], followed by a deliberately perturbed non-kernel
/// element that must be detected.
pub fn kernel_martingale_suite(
    kappa: &Rat,
    weight: u32,
    cfg: &McConfig,
) -> Result<Vec<DriftReport>> {
    let n = weight.max(2) as u16;
    let gen = sle_generator::<Rat>(kappa.clone(), n);
    let basis = kernel_solve(&gen, weight)?;
    let mut reports = Vec::with_capacity(basis.len() + 1);
    for (i, p) in basis.iter().enumerate() {
        let label = format!("kernel[{i}]: {p}");
        reports.push(drift_test(p, &label, cfg)?);
    }

    // b_1 - (2/κ + 1/2) b_0^2 has constant generator image -κ/2 != 0.
    let b0 = CoeffPolynomial::<Rat>::var(Chart::Infinity, 0);
    let b1 = CoeffPolynomial::<Rat>::var(Chart::Infinity, 1);
    let two_over_k = Rat::from_int(2) * kappa.try_inv().unwrap();
    let coeff = two_over_k + Rat::from_int(1).div_int(2);
    let perturbed = b1 - (b0.clone() * b0).scale(&coeff);
    reports.push(drift_test(&perturbed, "perturbed non-kernel element", cfg)?);
    Ok(reports)
}

/// Symbolic witness that the bracket `[L_-1, L_-2]` is a nonzero first-order
/// operator on low weights (the Hörmander condition's first bracket).
pub fn hoermander_witness(n: u16, weight: u32) -> Result<bool> {
    let lm1 = l_minus_one::<Rat>(n);
    let lm2 = l_minus_two::<Rat>(n);
    let bracket = lm1.first_order_bracket(&lm2);
    Ok(!operator_action(&bracket, weight)?.is_zero())
}

// ---------------------------------------------------------------------------
// Boundary observable family
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableConfig {
    pub alpha: f64,
    pub beta: f64,
    pub x: f64,
    pub mc: McConfig,
    /// A path is stopped (counted swallowed) when `g - W` drops below this.
    pub swallow_guard: f64,
    /// Runs with more than this fraction of stopped paths are invalid.
    pub swallow_limit: f64,
}

impl ObservableConfig {
    pub fn new(alpha: f64, beta: f64, x: f64, mc: McConfig) -> Self {
        // Negative-exponent observables blow up toward the singularity; stop
        // them earlier so the frozen values stay numerically tame.
        let swallow_guard = if beta < 0.0 || alpha < 0.0 { 0.05 } else { 1e-4 };
        Self { alpha, beta, x, mc, swallow_guard, swallow_limit: 0.01 }
    }
}

/// The martingale-candidate drift relation: `M = (g')^α X^β` is a local
/// martingale iff `α = β + κ β (β - 1)/4`.
pub fn martingale_alpha(beta: f64, kappa: f64) -> f64 {
    beta + kappa * beta * (beta - 1.0) / 4.0
}

struct PathSample {
    values: Vec<f64>,
    swallowed: bool,
    /// Exact-identity calibration statistic: the accumulated noise `-W`
    /// up to the (possibly stopped) end of the path, mean zero by optional
    /// stopping.
    noise_residual: f64,
}

/// Drift test of `M_t = (∂g_t(x)/∂x)^α (g_t(x) - W_t)^β` for a boundary
/// point `x > 0`, by Euler–Maruyama on the coupled system
/// `dX = (2/X) dt - dW`, `dY/dt = -2Y/X^2`.
///
/// Paths approaching the singularity are optionally stopped: when a step
/// would take `X` below the guard, the observable is frozen at its current
/// value for all later checkpoints. The stopped process is a true martingale
/// whenever `M` is a local martingale, so freezing (rather than discarding)
/// keeps the null hypothesis exact; the stopped fraction is still reported
/// and a run with more than `swallow_limit` of them is invalidated.
pub fn observable_drift_test(cfg: &ObservableConfig) -> Result<DriftReport> {
    let mc = &cfg.mc;
    let n_steps = (mc.t_end / mc.dt).round().max(1.0) as usize;
    let cp_steps: Vec<usize> = (1..=mc.checkpoints)
        .map(|i| (i * n_steps / mc.checkpoints).max(1))
        .collect();
    let m0 = cfg.x.powf(cfg.beta);

    let samples: Vec<PathSample> = (0..mc.paths)
        .into_par_iter()
        .map(|idx| {
            let mut rng = ChaCha12Rng::seed_from_u64(mc.seed);
            rng.set_stream(1 + idx as u64);
            let scale = (mc.kappa * mc.dt).sqrt();
            let bridge_scale = -2.0 / (mc.kappa * mc.dt);
            let mut x = cfg.x;
            let mut y = 1.0f64;
            let mut noise_acc = 0.0f64;
            let mut values = Vec::with_capacity(cp_steps.len());
            let mut frozen = false;
            let mut next_cp = 0;
            for k in 1..=n_steps {
                // Fixed two draws per step keeps the stream layout uniform.
                let g: f64 = StandardNormal.sample(&mut rng);
                let u: f64 = rng.gen();
                if !frozen {
                    let y_new = y * (1.0 - 2.0 * mc.dt / (x * x));
                    let drift = 2.0 / x * mc.dt;
                    let x_new = x + drift - scale * g;
                    // Barrier monitoring with the Brownian-bridge crossing
                    // probability; otherwise grid monitoring misses
                    // sub-step excursions and biases the stopped mean.
                    let a = cfg.swallow_guard;
                    let crossed = !x_new.is_finite()
                        || x_new <= a
                        || u < (bridge_scale * (x - a) * (x_new - a)).exp();
                    if crossed || !y_new.is_finite() {
                        // Stop on the barrier itself: the projection keeps
                        // the frozen observable at its optional-stopping
                        // value.
                        x = a;
                        if y_new.is_finite() {
                            y = y_new;
                        }
                        frozen = true;
                    } else {
                        x = x_new;
                        y = y_new;
                        noise_acc -= scale * g;
                    }
                }
                while next_cp < cp_steps.len() && cp_steps[next_cp] == k {
                    values.push(y.powf(cfg.alpha) * x.powf(cfg.beta) - m0);
                    next_cp += 1;
                }
            }
            PathSample {
                values,
                swallowed: frozen,
                noise_residual: noise_acc,
            }
        })
        .collect();

    let swallowed_count = samples.iter().filter(|s| s.swallowed).count();
    let fraction = swallowed_count as f64 / mc.paths as f64;
    if fraction > cfg.swallow_limit {
        return Err(CoreError::PathSwallowed { fraction, limit: cfg.swallow_limit });
    }

    let mut checkpoints = Vec::with_capacity(cp_steps.len());
    let mut max_abs_z = 0.0f64;
    for (i, &s) in cp_steps.iter().enumerate() {
        let t = s as f64 * mc.dt;
        let mut n = 0usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for sample in &samples {
            let v = sample.values[i];
            if v.is_finite() {
                n += 1;
                sum += v;
                sumsq += v * v;
            }
        }
        let mean = sum / n as f64;
        let var = (sumsq / n as f64 - mean * mean).max(0.0);
        let se = (var / n as f64).sqrt();
        let z = z_score(mean, se);
        max_abs_z = max_abs_z.max(z.abs());
        checkpoints.push(CheckpointStat { t, mean, se, z });
    }

    // Calibration gate: the accumulated noise over applied steps is a
    // stopped `-W`, whose mean must vanish; restricting to survivors would
    // introduce selection bias, so every path contributes.
    let (mut cal_n, mut cal_sum, mut cal_sumsq) = (0usize, 0.0f64, 0.0f64);
    for s in &samples {
        if s.noise_residual.is_finite() {
            cal_n += 1;
            cal_sum += s.noise_residual;
            cal_sumsq += s.noise_residual * s.noise_residual;
        }
    }
    let cal_mean = cal_sum / cal_n.max(1) as f64;
    let cal_var = (cal_sumsq / cal_n.max(1) as f64 - cal_mean * cal_mean).max(0.0);
    let cal_se = (cal_var / cal_n.max(1) as f64).sqrt();
    let calibration_z = z_score(cal_mean, cal_se);
    let calibration_ok = calibration_z.abs() <= 5.0;

    let last = checkpoints.len() - 1;
    let high_variance = checkpoints[last].se > 0.1 * m0.abs().max(1e-12);
    let verdict = if max_abs_z > mc.z_crit {
        Verdict::DriftDetected
    } else {
        Verdict::Consistent
    };
    Ok(DriftReport {
        observable: format!("(g')^{} * X^{} at x = {}", cfg.alpha, cfg.beta, cfg.x),
        checkpoints,
        max_abs_z,
        verdict,
        meta: ReportMeta {
            kappa: mc.kappa,
            seed: mc.seed,
            paths: mc.paths,
            dt: mc.dt,
            z_crit: mc.z_crit,
            calibration_z,
            calibration_ok,
            swallowed_fraction: Some(fraction),
            high_variance,
        },
    })
}

// ---------------------------------------------------------------------------
// Radon-Nikodym factor report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RnDensityReport {
    pub kappa: f64,
    pub c: f64,
    pub h: f64,
    /// Exponent chosen so `(g')^h X^beta` is the testable local martingale
    /// (root of `β + κβ(β-1)/4 = h` of least magnitude).
    pub beta: f64,
    /// Checkpoint statistics of the boundary log-factor `h log g'(x)`.
    pub log_boundary_factor: Vec<CheckpointStat>,
    /// Drift report of the combined factor `(g')^h X^beta`.
    pub combined: DriftReport,
    /// Diagnostic time series of the unregularized Schwarzian integrand
    /// `S g_t(x)` (mean over paths); no verdict is attached.
    pub schwarzian_integrand: Vec<(f64, f64)>,
    pub swallowed_fraction: f64,
    /// Recorded normalization assumption for the point at infinity.
    pub assumption: String,
}

/// Least-magnitude root of `κ β^2 / 4 + (1 - κ/4) β - h = 0`.
pub fn rn_beta(kappa: f64, h: f64) -> f64 {
    let a = kappa / 4.0;
    let b = 1.0 - kappa / 4.0;
    let disc = (b * b + 4.0 * a * h).max(0.0).sqrt();
    let r1 = (-b + disc) / (2.0 * a);
    let r2 = (-b - disc) / (2.0 * a);
    if r1.abs() <= r2.abs() {
        r1
    } else {
        r2
    }
}

/// Per-path decomposition of the Radon–Nikodym factor at a boundary point:
/// the `|g'(x)|^h` boundary factor (testable through the combined
/// `(g')^h X^β` local martingale) and the unregularized Schwarzian bulk
/// integrand as a diagnostic. The `|g'|^h` factor at the second marked point
/// (infinity) is identically 1 under the hydrodynamic normalization.
pub fn rn_density_report(x: f64, mc: &McConfig) -> Result<RnDensityReport> {
    let params = ch_from_kappa(mc.kappa);
    let beta = rn_beta(mc.kappa, params.h);

    let n_steps = (mc.t_end / mc.dt).round().max(1.0) as usize;
    let cp_steps: Vec<usize> = (1..=mc.checkpoints)
        .map(|i| (i * n_steps / mc.checkpoints).max(1))
        .collect();

    struct RnSample {
        log_y: Vec<f64>,
        schwarzian: Vec<f64>,
        swallowed: bool,
    }

    let samples: Vec<RnSample> = (0..mc.paths)
        .into_par_iter()
        .map(|idx| {
            let mut rng = ChaCha12Rng::seed_from_u64(mc.seed);
            rng.set_stream(1 + idx as u64);
            let scale = (mc.kappa * mc.dt).sqrt();
            let mut x_t = x;
            let mut g1 = 1.0f64; // g'
            let mut g2 = 0.0f64; // g''
            let mut g3 = 0.0f64; // g'''
            let mut swallowed = false;
            let mut log_y = Vec::with_capacity(cp_steps.len());
            let mut schwarzian = Vec::with_capacity(cp_steps.len());
            let mut next_cp = 0;
            for k in 1..=n_steps {
                if !swallowed {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    let u2 = x_t * x_t;
                    let u3 = u2 * x_t;
                    let u4 = u3 * x_t;
                    let d1 = -2.0 * g1 / u2;
                    let d2 = -2.0 * g2 / u2 + 4.0 * g1 * g1 / u3;
                    let d3 = -2.0 * g3 / u2 + 12.0 * g1 * g2 / u3 - 12.0 * g1 * g1 * g1 / u4;
                    let x_new = x_t + 2.0 / x_t * mc.dt - scale * g;
                    if !x_new.is_finite() || x_new <= 1e-3 || !(g1 + d1 * mc.dt).is_finite() {
                        // Freeze the pre-crossing state (stopped process).
                        swallowed = true;
                    } else {
                        g1 += d1 * mc.dt;
                        g2 += d2 * mc.dt;
                        g3 += d3 * mc.dt;
                        x_t = x_new;
                    }
                } else {
                    let _: f64 = StandardNormal.sample(&mut rng);
                }
                while next_cp < cp_steps.len() && cp_steps[next_cp] == k {
                    log_y.push(params.h * g1.ln());
                    let r = g2 / g1;
                    schwarzian.push(g3 / g1 - 1.5 * r * r);
                    next_cp += 1;
                }
            }
            RnSample { log_y, schwarzian, swallowed }
        })
        .collect();

    let swallowed_count = samples.iter().filter(|s| s.swallowed).count();
    let fraction = swallowed_count as f64 / mc.paths as f64;
    if fraction > 0.01 {
        return Err(CoreError::PathSwallowed { fraction, limit: 0.01 });
    }

    let stat_of = |extract: &dyn Fn(&RnSample, usize) -> f64| -> Vec<CheckpointStat> {
        cp_steps
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let t = s as f64 * mc.dt;
                let vals: Vec<f64> = samples
                    .iter()
                    .map(|smp| extract(smp, i))
                    .filter(|v| v.is_finite())
                    .collect();
                let n = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / n;
                let var = (vals.iter().map(|v| v * v).sum::<f64>() / n - mean * mean).max(0.0);
                let se = (var / n).sqrt();
                CheckpointStat { t, mean, se, z: z_score(mean, se) }
            })
            .collect()
    };

    let log_boundary = stat_of(&|s, i| s.log_y[i]);
    let schwarzian_series: Vec<(f64, f64)> = stat_of(&|s, i| s.schwarzian[i])
        .into_iter()
        .map(|c| (c.t, c.mean))
        .collect();

    let combined = observable_drift_test(&ObservableConfig::new(params.h, beta, x, mc.clone()))?;

    Ok(RnDensityReport {
        kappa: mc.kappa,
        c: params.c,
        h: params.h,
        beta,
        log_boundary_factor: log_boundary,
        combined,
        schwarzian_integrand: schwarzian_series,
        swallowed_fraction: fraction,
        assumption: "second marked point at infinity: |g'|^h factor = 1 under hydrodynamic normalization".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn ch_values_match_reference_triples() {
        for (kappa, c, h) in [(6.0, 0.0, 0.0), (8.0 / 3.0, 0.0, 5.0 / 8.0), (2.0, -2.0, 1.0)] {
            let p = ch_from_kappa(kappa);
            assert!((p.c - c).abs() < 1e-13, "kappa={kappa}");
            assert!((p.h - h).abs() < 1e-13, "kappa={kappa}");
        }
        let (c, h) = ch_from_kappa_exact(&rat(8, 3));
        assert!(c.is_zero());
        assert_eq!(h, rat(5, 8));
    }

    #[test]
    fn ch_duality_exact() {
        // c(kappa) = c(16/kappa) for arbitrary rational kappa.
        for (p, q) in [(7, 2), (3, 1), (16, 5), (1, 3), (29, 7)] {
            let kappa = rat(p, q);
            let dual = rat(16, 1) * kappa.try_inv().unwrap();
            let (c1, _) = ch_from_kappa_exact(&kappa);
            let (c2, _) = ch_from_kappa_exact(&dual);
            assert_eq!(c1, c2, "kappa = {p}/{q}");
        }
    }

    #[test]
    fn one_point_generator_kernel_exponents() {
        // On the single boundary coordinate, (κ/2) l_{-1}^2 - 2 l_{-2} sends
        // x^a to ((κ/2) a (a-1) + 2a) x^{a-2}; the exponent polynomial
        // vanishes exactly at a in {0, 1 - 4/κ}. martingale_alpha is half of
        // that polynomial in disguise, so the roots agree.
        for (num, den) in [(2i64, 1i64), (8, 3), (4, 1), (6, 1), (17, 5)] {
            let kappa = rat(num, den);
            let exponent = |a: Rat| {
                kappa.clone().div_int(2) * a.clone() * (a.clone() - Rat::one())
                    + Rat::from_int(2) * a
            };
            assert!(exponent(Rat::zero()).is_zero());
            let root = Rat::one() - rat(4, 1) * kappa.try_inv().unwrap();
            assert!(exponent(root.clone()).is_zero());
            let kf = rat_to_f64(&kappa);
            assert!(martingale_alpha(0.0, kf).abs() < 1e-15);
            assert!(martingale_alpha(rat_to_f64(&root), kf).abs() < 1e-13);
        }
    }

    #[test]
    fn trivial_observable_is_constant_one() {
        // alpha = beta = 0: M = 1 identically, consistent with zero variance.
        let mc = McConfig::new(2.0, 0.1, 1e-3, 200, 5);
        let r = observable_drift_test(&ObservableConfig::new(0.0, 0.0, 1.0, mc)).unwrap();
        assert!(r.is_consistent());
        for c in &r.checkpoints {
            assert_eq!(c.mean, 0.0);
            assert_eq!(c.se, 0.0);
        }
    }

    #[test]
    fn rn_report_restriction_case() {
        // kappa = 8/3: c = 0, so the bulk factor is absent by weight and the
        // boundary factor alone (through the combined exponent pair
        // (h, beta) = (5/8, 3/4)) is the tested martingale.
        let mc = McConfig::new(8.0 / 3.0, 0.2, 5e-4, 20_000, 13);
        let report = rn_density_report(1.0, &mc).unwrap();
        assert!(report.c.abs() < 1e-13);
        assert!((report.h - 5.0 / 8.0).abs() < 1e-13);
        assert!((report.beta - 0.75).abs() < 1e-12);
        assert!(report.combined.is_consistent(), "max z {}", report.combined.max_abs_z);
        assert!(report.swallowed_fraction <= 0.01);
    }

    #[test]
    fn rn_beta_roots() {
        // kappa = 8/3, h = 5/8: the least-magnitude root is 3/4.
        let beta = rn_beta(8.0 / 3.0, 5.0 / 8.0);
        assert!((beta - 0.75).abs() < 1e-12);
        // h = 0 (kappa = 6): beta = 0.
        assert!(rn_beta(6.0, 0.0).abs() < 1e-14);
        // Consistency with the drift relation.
        for kappa in [2.0, 8.0 / 3.0, 4.0, 6.0] {
            let h = ch_from_kappa(kappa).h;
            let beta = rn_beta(kappa, h);
            assert!((martingale_alpha(beta, kappa) - h).abs() < 1e-12);
        }
    }

    #[test]
    fn drift_test_detects_and_passes_small_scale() {
        // Small ensembles for unit-test speed; the acceptance suite runs the
        // full 1e5-path versions.
        let cfg = McConfig::new(2.0, 0.5, 1e-3, 4000, 21);
        let b0 = CoeffPolynomial::<Rat>::var(Chart::Infinity, 0);
        let b1 = CoeffPolynomial::<Rat>::var(Chart::Infinity, 1);

        // b_0 is a pure martingale.
        let r = drift_test(&b0, "b0", &cfg).unwrap();
        assert!(r.is_consistent(), "max z {}", r.max_abs_z);
        assert!(r.meta.calibration_ok);

        // b_1 = 2t drifts deterministically and exactly: flagged with an
        // infinite z-score.
        let r = drift_test(&b1, "b1", &cfg).unwrap();
        assert!(!r.is_consistent());
        assert!((r.checkpoints.last().unwrap().mean - 2.0 * 0.5).abs() < 1e-12);

        // The weight-2 kernel element passes.
        let p = b1.clone() - (b0.clone() * b0.clone()).scale(&rat(1, 1));
        let r = drift_test(&p, "kernel", &cfg).unwrap();
        assert!(r.is_consistent(), "max z {}", r.max_abs_z);

        // A perturbed element with constant drift -kappa/2 is flagged.
        let bad = b1.clone() - (b0.clone() * b0).scale(&rat(3, 2));
        let r = drift_test(&bad, "perturbed", &cfg).unwrap();
        assert!(!r.is_consistent());
    }

    #[test]
    fn kernel_suite_small_scale() {
        let cfg = McConfig::new(2.0, 0.5, 1e-3, 4000, 33);
        let reports = kernel_martingale_suite(&rat(2, 1), 2, &cfg).unwrap();
        // Weight <= 2 kernel is 3-dimensional; the 4th report is the
        // perturbed element.
        assert_eq!(reports.len(), 4);
        for r in &reports[..3] {
            assert!(r.is_consistent(), "{}: max z {}", r.observable, r.max_abs_z);
        }
        assert!(!reports[3].is_consistent());
    }

    #[test]
    fn hoermander_witness_holds() {
        assert!(hoermander_witness(5, 4).unwrap());
    }

    #[test]
    fn observable_family_small_scale() {
        // (beta, kappa) = (2, 2): alpha = 3 passes, alpha = 3.2 flagged.
        let mc = McConfig::new(2.0, 0.2, 5e-4, 20_000, 55);
        let good = ObservableConfig::new(martingale_alpha(2.0, 2.0), 2.0, 1.0, mc.clone());
        let r = observable_drift_test(&good).unwrap();
        assert!(r.is_consistent(), "max z {}", r.max_abs_z);

        let bad = ObservableConfig::new(martingale_alpha(2.0, 2.0) + 0.2, 2.0, 1.0, mc);
        let r = observable_drift_test(&bad).unwrap();
        assert!(!r.is_consistent(), "max z {}", r.max_abs_z);
    }

    #[test]
    fn rn_report_killing_cases() {
        // kappa = 6: h = 0, so log M = 0 on every path and the combined
        // factor is trivially consistent. Above kappa = 4 boundary points do
        // get swallowed, so the observation point sits away from the hull.
        let mc = McConfig::new(6.0, 0.1, 1e-3, 500, 9);
        let report = rn_density_report(3.0, &mc).unwrap();
        assert!(report.h.abs() < 1e-14);
        for c in &report.log_boundary_factor {
            assert!(c.mean.abs() < 1e-14 && c.se.abs() < 1e-14);
        }
        assert!(report.combined.is_consistent());
        // Schwarzian diagnostic starts at 0 (g = id) and stays finite.
        for (_, s) in &report.schwarzian_integrand {
            assert!(s.is_finite());
        }
    }
}
