// SPDX-License-Identifier: Apache-2.0

//! Embedded Dormand-Prince 5(4) integrator for complex linear ODEs.
//!
//! The solver steps exactly onto each requested sample time; between samples
//! the step size is chosen from the embedded error estimate.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

// Dormand & Prince (1980) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b* (5th minus 4th order weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Integrates `dy/dt = rhs(t, y)` from `t0` through every time in
/// `samples` (strictly increasing, all `>= t0`), calling `on_sample` with
/// the state at each one.
pub fn integrate<F, S>(
    mut rhs: F,
    y: &mut [C64],
    t0: f64,
    samples: &[f64],
    ctrl: &StepControl,
    mut on_sample: S,
) -> Result<Stats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    S: FnMut(usize, f64, &[C64]),
{
    let n = y.len();
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![C64::new(0.0, 0.0); n]).collect();
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let mut y_new = vec![C64::new(0.0, 0.0); n];
    let mut stats = Stats::default();

    let mut t = t0;
    let mut h = ctrl.initial_step.unwrap_or(ctrl.max_step / 4.0).min(ctrl.max_step);
    rhs(t, y, &mut k[0]);
    stats.rhs_evals += 1;

    for (idx, &target) in samples.iter().enumerate() {
        if target < t {
            return Err(Error::IntegratorAccuracy("sample times must be increasing".into()));
        }
        while t < target {
            if stats.accepted + stats.rejected >= ctrl.max_steps {
                return Err(Error::StepLimit(ctrl.max_steps));
            }
            let remaining = target - t;
            let clipped = h >= remaining * (1.0 - 1e-12);
            let step = if clipped { remaining } else { h };

            stage(&mut tmp, y, step, &k, &[A21]);
            rhs(t + C2 * step, &tmp, &mut k[1]);
            stage(&mut tmp, y, step, &k, &[A31, A32]);
            rhs(t + C3 * step, &tmp, &mut k[2]);
            stage(&mut tmp, y, step, &k, &[A41, A42, A43]);
            rhs(t + C4 * step, &tmp, &mut k[3]);
            stage(&mut tmp, y, step, &k, &[A51, A52, A53, A54]);
            rhs(t + C5 * step, &tmp, &mut k[4]);
            stage(&mut tmp, y, step, &k, &[A61, A62, A63, A64, A65]);
            rhs(t + step, &tmp, &mut k[5]);
            stage(&mut y_new, y, step, &k, &[B1, 0.0, B3, B4, B5, B6]);
            let t_new = if clipped { target } else { t + step };
            rhs(t_new, &y_new, &mut k[6]);
            stats.rhs_evals += 6;

            // Max norm: an RMS over mostly-empty state vectors would dilute
            // the error of the few populated components.
            let mut err: f64 = 0.0;
            for i in 0..n {
                let e = step
                    * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
                let scale = ctrl.atol + ctrl.rtol * y[i].norm().max(y_new[i].norm());
                err = err.max(e.norm() / scale);
            }
            if !err.is_finite() {
                return Err(Error::IntegratorAccuracy("non-finite error estimate".into()));
            }

            if err <= 1.0 {
                stats.accepted += 1;
                t = t_new;
                y.copy_from_slice(&y_new);
                k.swap(0, 6);
                let factor = if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
                // a clipped step says nothing about the natural step size
                if !clipped || step * factor > h {
                    h = (step * factor).min(ctrl.max_step);
                }
            } else {
                stats.rejected += 1;
                let factor = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                h = step * factor;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::IntegratorAccuracy(format!("step size underflow at t = {t}")));
                }
            }
        }
        on_sample(idx, t, y);
    }
    Ok(stats)
}

fn stage(out: &mut [C64], y: &[C64], h: f64, k: &[Vec<C64>], coeffs: &[f64]) {
    out.copy_from_slice(y);
    for (kj, &a) in k.iter().zip(coeffs) {
        if a == 0.0 {
            continue;
        }
        let s = h * a;
        for (o, d) in out.iter_mut().zip(kj) {
            *o += s * d;
        }
    }
}
