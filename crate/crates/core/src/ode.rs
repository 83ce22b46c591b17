//! Small adaptive Runge–Kutta driver on complex state vectors.
//!
//! Dormand–Prince 5(4) with elementary step-size control; enough for the
//! coefficient ODEs of the radial flow and the pointwise chordal maps.

use crate::error::{CoreError, Result};
use crate::scalar::C64;

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub min_step: f64,
    pub max_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, min_step: 1e-12, max_step: f64::INFINITY }
    }
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` in place.
pub fn integrate<F>(f: &F, y: &mut [C64], t0: f64, t1: f64, opts: &OdeOptions) -> Result<()>
where
    F: Fn(f64, &[C64], &mut [C64]),
{
    let dim = y.len();
    let mut t = t0;
    let mut h = ((t1 - t0) / 16.0).min(opts.max_step).max(opts.min_step);
    let mut k = vec![vec![C64::new(0.0, 0.0); dim]; 7];
    let mut ytmp = vec![C64::new(0.0, 0.0); dim];

    while t < t1 {
        if h > t1 - t {
            h = t1 - t;
        }
        f(t, y, &mut k[0]);
        for stage in 0..6 {
            for i in 0..dim {
                let mut acc = C64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate().take(stage + 1) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        acc += kj[i] * a;
                    }
                }
                ytmp[i] = y[i] + acc * h;
            }
            let (_, tail) = k.split_at_mut(stage + 1);
            f(t + C[stage] * h, &ytmp, &mut tail[0]);
        }
        // 5th-order solution and embedded error estimate.
        let mut err: f64 = 0.0;
        let mut y5 = vec![C64::new(0.0, 0.0); dim];
        for i in 0..dim {
            let mut acc5 = C64::new(0.0, 0.0);
            let mut acc4 = C64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                if B5[j] != 0.0 {
                    acc5 += kj[i] * B5[j];
                }
                if B4[j] != 0.0 {
                    acc4 += kj[i] * B4[j];
                }
            }
            y5[i] = y[i] + acc5 * h;
            let scale = opts.atol + opts.rtol * y5[i].norm().max(y[i].norm());
            err = err.max(((acc5 - acc4) * h).norm() / scale);
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&y5);
        }
        let factor = if err > 0.0 { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) } else { 5.0 };
        h *= factor;
        h = h.min(opts.max_step);
        if h < opts.min_step {
            if t1 - t < opts.min_step {
                break;
            }
            return Err(CoreError::StepRejected { t, dt: h });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        // y' = -2y: y(1) = e^{-2}.
        let f = |_t: f64, y: &[C64], dy: &mut [C64]| {
            dy[0] = y[0] * -2.0;
        };
        let mut y = vec![C64::new(1.0, 0.0)];
        integrate(&f, &mut y, 0.0, 1.0, &OdeOptions::default()).unwrap();
        assert!((y[0].re - (-2.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn rotation_in_complex_plane() {
        // y' = i y: |y| preserved, phase advances by t.
        let f = |_t: f64, y: &[C64], dy: &mut [C64]| {
            dy[0] = C64::new(0.0, 1.0) * y[0];
        };
        let mut y = vec![C64::new(1.0, 0.0)];
        integrate(&f, &mut y, 0.0, std::f64::consts::PI, &OdeOptions::default()).unwrap();
        assert!((y[0] - C64::new(-1.0, 0.0)).norm() < 1e-9);
    }
}
