//! Fourier-side analysis on the circle: Hilbert transform, almost-complex
//! structure, the two-parameter cocycle, Kähler metric coefficients and the
//! Polyakov–Alvarez boundary functional.
//!
//! Vector fields are real trigonometric polynomials
//! `v(t) = a_0 + Σ_k (a_k cos kt + b_k sin kt)` acting as `v(t) d/dt`.
//! The Hilbert transform and the complex structure are applied through their
//! exact Fourier multipliers; no principal-value quadrature anywhere.

use crate::error::{CoreError, Result};
use crate::scalar::C64;
use crate::series::TruncatedTaylor;
use serde::{Deserialize, Serialize};

/// Real trigonometric polynomial on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierField {
    /// Cosine coefficients `a_0..a_M`.
    pub a: Vec<f64>,
    /// Sine coefficients `b_1..b_M` (`b[k]` multiplies `sin((k+1) t)`).
    pub b: Vec<f64>,
}

/// Central charge and highest weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralParams {
    pub c: f64,
    pub h: f64,
}

impl FourierField {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Self {
        assert!(!a.is_empty(), "need at least the mean coefficient a_0");
        Self { a, b }
    }

    pub fn zero(modes: usize) -> Self {
        Self { a: vec![0.0; modes + 1], b: vec![0.0; modes] }
    }

    pub fn cosine(k: usize, amp: f64, modes: usize) -> Self {
        let mut f = Self::zero(modes.max(k));
        f.a[k] = amp;
        f
    }

    pub fn sine(k: usize, amp: f64, modes: usize) -> Self {
        assert!(k >= 1);
        let mut f = Self::zero(modes.max(k));
        f.b[k - 1] = amp;
        f
    }

    /// Highest stored mode.
    pub fn modes(&self) -> usize {
        (self.a.len() - 1).max(self.b.len())
    }

    pub fn a_coeff(&self, k: usize) -> f64 {
        self.a.get(k).copied().unwrap_or(0.0)
    }

    pub fn b_coeff(&self, k: usize) -> f64 {
        if k == 0 { 0.0 } else { self.b.get(k - 1).copied().unwrap_or(0.0) }
    }

    pub fn has_zero_mean(&self) -> bool {
        self.a[0] == 0.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut v = self.a[0];
        for k in 1..=self.modes() {
            let kt = k as f64 * t;
            v += self.a_coeff(k) * kt.cos() + self.b_coeff(k) * kt.sin();
        }
        v
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let m = self.modes().max(rhs.modes());
        let a = (0..=m).map(|k| self.a_coeff(k) + rhs.a_coeff(k)).collect();
        let b = (1..=m).map(|k| self.b_coeff(k) + rhs.b_coeff(k)).collect();
        Self { a, b }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            a: self.a.iter().map(|x| x * s).collect(),
            b: self.b.iter().map(|x| x * s).collect(),
        }
    }

    /// Derivative in `t`: `cos(kt) -> -k sin(kt)`, `sin(kt) -> k cos(kt)`.
    pub fn derivative(&self) -> Self {
        let m = self.modes();
        let mut out = Self::zero(m);
        for k in 1..=m {
            out.a[k] = k as f64 * self.b_coeff(k);
            out.b[k - 1] = -(k as f64) * self.a_coeff(k);
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.a
            .iter()
            .chain(self.b.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Fourier coefficients from grid samples `phi[j] = phi(2 pi j / P)`,
    /// keeping modes up to `modes`.
    pub fn from_samples(phi: &[f64], modes: usize) -> Self {
        let p = phi.len();
        assert!(p > 2 * modes, "grid must oversample the requested modes");
        let mut field = Self::zero(modes);
        let scale = 2.0 / p as f64;
        for k in 0..=modes {
            let mut ca = 0.0;
            let mut cb = 0.0;
            for (j, &v) in phi.iter().enumerate() {
                let th = 2.0 * std::f64::consts::PI * (k * j) as f64 / p as f64;
                ca += v * th.cos();
                cb += v * th.sin();
            }
            if k == 0 {
                field.a[0] = ca / p as f64;
            } else {
                field.a[k] = ca * scale;
                field.b[k - 1] = cb * scale;
            }
        }
        field
    }
}

/// Hilbert transform by its multiplier: `e^{int} -> i sgn(n) e^{int}`,
/// constants to zero. On the real basis: `cos kt -> -sin kt`, `sin kt -> cos kt`.
pub fn hilbert_transform(f: &FourierField) -> FourierField {
    let m = f.modes();
    let mut out = FourierField::zero(m);
    for k in 1..=m {
        out.a[k] = f.b_coeff(k);
        out.b[k - 1] = -f.a_coeff(k);
    }
    out
}

/// Canonical almost-complex structure on zero-mean fields;
/// coincides with the Hilbert transform there.
pub fn complex_structure_j(v: &FourierField) -> Result<FourierField> {
    if !v.has_zero_mean() {
        return Err(CoreError::NonzeroMean);
    }
    Ok(hilbert_transform(v))
}

/// Lie bracket `[v1, v2] = v1 v2' - v1' v2`, expanded exactly in the basis
/// through the product-to-sum identities.
pub fn bracket(v1: &FourierField, v2: &FourierField) -> FourierField {
    let d1 = v1.derivative();
    let d2 = v2.derivative();
    trig_product(v1, &d2).add(&trig_product(&d1, v2).scale(-1.0))
}

/// Exact product of two trigonometric polynomials.
fn trig_product(u: &FourierField, v: &FourierField) -> FourierField {
    let mu = u.modes();
    let mv = v.modes();
    let mut out = FourierField::zero(mu + mv);
    // cos A cos B = (cos(A-B) + cos(A+B))/2
    // sin A sin B = (cos(A-B) - cos(A+B))/2
    // sin A cos B = (sin(A-B) + sin(A+B))/2
    for p in 0..=mu {
        let (ua, ub) = (u.a_coeff(p), u.b_coeff(p));
        if ua == 0.0 && ub == 0.0 {
            continue;
        }
        for q in 0..=mv {
            let (va, vb) = (v.a_coeff(q), v.b_coeff(q));
            if va == 0.0 && vb == 0.0 {
                continue;
            }
            let sum = p + q;
            let diff = p.abs_diff(q);
            let x = ua * va / 2.0;
            out.a[diff] += x;
            out.a[sum] += x;
            let x = ub * vb / 2.0;
            out.a[diff] += x;
            out.a[sum] -= x;
            // sin(p) cos(q): sin((p-q)t) picks up a sign when q > p.
            let x = ub * va / 2.0;
            if x != 0.0 {
                if sum >= 1 {
                    out.b[sum - 1] += x;
                }
                if diff >= 1 {
                    out.b[diff - 1] += if p >= q { x } else { -x };
                }
            }
            // cos(p) sin(q)
            let x = ua * vb / 2.0;
            if x != 0.0 {
                if sum >= 1 {
                    out.b[sum - 1] += x;
                }
                if diff >= 1 {
                    out.b[diff - 1] += if q >= p { x } else { -x };
                }
            }
        }
    }
    out
}

/// The bilinear antisymmetric form
/// `(1/2pi) ∫ ((2h - c/12) v1' - (c/12) v1''') v2 dt`,
/// evaluated exactly by orthogonality.
pub fn omega_ch(v1: &FourierField, v2: &FourierField, p: CentralParams) -> f64 {
    let m = v1.modes().max(v2.modes());
    let mut acc = 0.0;
    for k in 1..=m {
        let kf = k as f64;
        // v1 mode k contributes to v1' and v1''' with the multipliers below.
        let a1 = v1.a_coeff(k);
        let b1 = v1.b_coeff(k);
        // v1' : a cos -> -ak sin ; b sin -> bk cos
        // v1''': a cos -> ak^3 sin ; b sin -> -bk^3 cos
        let w1 = 2.0 * p.h - p.c / 12.0;
        let w3 = -p.c / 12.0;
        let sin_part = -a1 * kf * w1 + a1 * kf.powi(3) * w3;
        let cos_part = b1 * kf * w1 - b1 * kf.powi(3) * w3;
        acc += 0.5 * (cos_part * v2.a_coeff(k) + sin_part * v2.b_coeff(k));
    }
    acc
}

/// Diagonal Kähler metric coefficient at the origin: `2hk + (c/12)(k^3 - k)`.
pub fn kahler_metric_coeff(k: usize, p: CentralParams) -> f64 {
    assert!(k >= 1);
    let kf = k as f64;
    2.0 * p.h * kf + p.c / 12.0 * (kf.powi(3) - kf)
}

/// Result of the boundary-determinant functional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyakovAlvarez {
    /// The exponent `-(1/6pi) ∮ (phi *dphi / 2 + phi |dz|)`.
    pub exponent: f64,
    /// `det(Delta_f) / det(Delta_D) = exp(exponent)`.
    pub det_ratio: f64,
    /// Grid size used to sample the boundary trace.
    pub grid: usize,
    /// Fraction of boundary energy above the kept modes.
    pub tail_fraction: f64,
}

/// Evaluate the boundary functional on a Fourier boundary trace
/// `phi = log |f'|`. `*dphi` acts as the Fourier multiplier `|k|`
/// (normal derivative of the harmonic extension), so by orthogonality
/// `∮ phi *dphi = pi Σ_k k (a_k^2 + b_k^2)` and `∮ phi |dz| = 2 pi a_0`.
pub fn polyakov_alvarez_exponent(phi: &FourierField) -> f64 {
    let mut star = 0.0;
    for k in 1..=phi.modes() {
        star += k as f64 * (phi.a_coeff(k).powi(2) + phi.b_coeff(k).powi(2));
    }
    let star_integral = std::f64::consts::PI * star;
    let length_integral = 2.0 * std::f64::consts::PI * phi.a[0];
    -(0.5 * star_integral + length_integral) / (6.0 * std::f64::consts::PI)
}

/// Boundary trace `phi = log |f'|` of a truncated map, sampled on a uniform
/// circle grid of power-of-two size `>= 4 (order + 1)` and projected on the
/// Fourier basis. Fails when the trace is energetically under-resolved.
pub fn boundary_log_deriv(f: &TruncatedTaylor<C64>, nyquist_threshold: f64) -> Result<FourierField> {
    let n = f.order();
    let mut grid = 8usize;
    while grid < 4 * (n + 1) {
        grid *= 2;
    }
    let d = f.derivative();
    let mut phi = Vec::with_capacity(grid);
    for j in 0..grid {
        let t = 2.0 * std::f64::consts::PI * j as f64 / grid as f64;
        let z = C64::new(t.cos(), t.sin());
        let fp = d.eval(z);
        if fp.norm() < 1e-14 {
            return Err(CoreError::ZeroLeadingCoefficient);
        }
        phi.push(fp.norm().ln());
    }
    let modes = grid / 2 - 1;
    let field = FourierField::from_samples(&phi, modes);
    // Energy check: the top quarter of the kept band must be negligible.
    let cutoff = modes / 2;
    let mut total = field.a[0] * field.a[0];
    let mut tail = 0.0;
    for k in 1..=modes {
        let e = field.a_coeff(k).powi(2) + field.b_coeff(k).powi(2);
        total += e;
        if k > cutoff {
            tail += e;
        }
    }
    let tail_fraction = if total > 0.0 { tail / total } else { 0.0 };
    if tail_fraction > nyquist_threshold {
        return Err(CoreError::InsufficientResolution {
            tail: tail_fraction,
            threshold: nyquist_threshold,
        });
    }
    Ok(field)
}

/// Full pipeline: map -> boundary trace -> determinant-ratio exponent.
pub fn polyakov_alvarez(f: &TruncatedTaylor<C64>) -> Result<PolyakovAlvarez> {
    let n = f.order();
    let mut grid = 8usize;
    while grid < 4 * (n + 1) {
        grid *= 2;
    }
    let phi = boundary_log_deriv(f, 1e-8)?;
    let exponent = polyakov_alvarez_exponent(&phi);
    let mut total = phi.a[0] * phi.a[0];
    let mut tail = 0.0;
    let modes = phi.modes();
    for k in 1..=modes {
        let e = phi.a_coeff(k).powi(2) + phi.b_coeff(k).powi(2);
        total += e;
        if k > modes / 2 {
            tail += e;
        }
    }
    Ok(PolyakovAlvarez {
        exponent,
        det_ratio: exponent.exp(),
        grid,
        tail_fraction: if total > 0.0 { tail / total } else { 0.0 },
    })
}
