//! Adaptive Dormand–Prince 5(4) integrator with PI step-size control.
//!
//! State vectors are fixed-size arrays; the systems integrated in this crate
//! have at most four components. An observer runs after every accepted step
//! and may rescale the state in place (used for overflow renormalization).

use crate::error::{Result, SteklovError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; defaults to `1e-2 · |t0|` (or `1e-6 · |t1 - t0|` when `t0 = 0`).
    pub first_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-13,
            first_step: None,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Sum of the accepted local error estimates, in units of relative error.
    pub est_error: f64,
}

/// What the observer did with the state after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observed {
    Unchanged,
    Modified,
}

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1 > t0`.
///
/// `observer(t, &mut y)` is called after each accepted step; an error from it
/// aborts the integration.
pub fn integrate<const N: usize, F, O>(
    mut rhs: F,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    opts: &OdeOptions,
    mut observer: O,
) -> Result<([f64; N], OdeStats)>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &mut [f64; N]) -> Result<Observed>,
{
    if !(t1 > t0) {
        return Err(SteklovError::InvalidInput(format!(
            "integration interval [{t0}, {t1}] is empty"
        )));
    }
    let span = t1 - t0;
    let mut h = opts
        .first_step
        .unwrap_or(if t0 > 0.0 { 1e-2 * t0 } else { 1e-6 * span });
    h = h.min(span);

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut stats = OdeStats::default();
    let mut err_prev: f64 = 1e-4;

    while t < t1 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(SteklovError::SolverFailure {
                radius: t,
                reason: format!("step budget of {} exhausted", opts.max_steps),
            });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }

        let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let t_new = if last { t1 } else { t + h };
        let k7 = rhs(t_new, &y_new);

        let mut err: f64 = 0.0;
        let mut finite = true;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let ratio = e.abs() / sc;
            finite &= ratio.is_finite() && y_new[i].is_finite();
            err = err.max(ratio);
        }
        if !finite {
            err = f64::INFINITY;
        }

        if err <= 1.0 {
            t = t_new;
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
            stats.est_error += err * opts.rtol;
            if observer(t, &mut y)? == Observed::Modified {
                k1 = rhs(t, &y);
            }
            let err_c = err.max(1e-10);
            let factor =
                (SAFETY * err_c.powf(-ALPHA) * err_prev.powf(BETA)).clamp(MIN_FACTOR, MAX_FACTOR);
            err_prev = err_c;
            h *= factor;
        } else {
            stats.rejected += 1;
            let factor = if err.is_finite() {
                (SAFETY * err.powf(-ALPHA)).clamp(MIN_FACTOR, 1.0)
            } else {
                MIN_FACTOR
            };
            h *= factor;
        }

        if h < 16.0 * f64::EPSILON * t.abs().max(span) {
            return Err(SteklovError::SolverFailure {
                radius: t,
                reason: format!("step size underflow (h = {h:.3e})"),
            });
        }
    }
    Ok((y, stats))
}
