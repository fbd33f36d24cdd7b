//! Explicit Runge–Kutta steppers over flat complex buffers.

use num_complex::Complex64 as C64;

use super::{IntegratorConfig, Method};
use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);

// Dormand–Prince 5(4) tableau.
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
// b − b* (error weights).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Reusable stage buffers for one system size.
pub(crate) struct Stepper {
    config: IntegratorConfig,
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    next: Vec<C64>,
    /// Last accepted adaptive step, reused as the next trial step.
    h_hint: Option<f64>,
}

impl Stepper {
    pub fn new(config: IntegratorConfig, len: usize) -> Self {
        Self {
            config,
            k: std::array::from_fn(|_| vec![ZERO; len]),
            tmp: vec![ZERO; len],
            next: vec![ZERO; len],
            h_hint: None,
        }
    }

    fn combine(tmp: &mut [C64], y: &[C64], h: f64, terms: &[(&[C64], f64)]) {
        for (i, out) in tmp.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (k, a) in terms {
                acc += k[i] * *a;
            }
            *out = y[i] + acc * h;
        }
    }

    fn rk4<F>(&mut self, f: &mut F, t: f64, h: f64, y: &[C64], out: &mut [C64])
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let [k1, k2, k3, k4, ..] = &mut self.k;
        f(t, y, k1);
        Self::combine(&mut self.tmp, y, h, &[(k1, 0.5)]);
        f(t + 0.5 * h, &self.tmp, k2);
        Self::combine(&mut self.tmp, y, h, &[(k2, 0.5)]);
        f(t + 0.5 * h, &self.tmp, k3);
        Self::combine(&mut self.tmp, y, h, &[(k3, 1.0)]);
        f(t + h, &self.tmp, k4);
        for i in 0..y.len() {
            out[i] = y[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }

    /// One Dormand–Prince step; returns the scaled error norm.
    fn dopri<F>(&mut self, f: &mut F, t: f64, h: f64, y: &[C64], out: &mut [C64]) -> f64
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        f(t, y, k1);
        Self::combine(&mut self.tmp, y, h, &[(k1, A21)]);
        f(t + h / 5.0, &self.tmp, k2);
        Self::combine(&mut self.tmp, y, h, &[(k1, A31), (k2, A32)]);
        f(t + 3.0 * h / 10.0, &self.tmp, k3);
        Self::combine(&mut self.tmp, y, h, &[(k1, A41), (k2, A42), (k3, A43)]);
        f(t + 4.0 * h / 5.0, &self.tmp, k4);
        Self::combine(&mut self.tmp, y, h, &[(k1, A51), (k2, A52), (k3, A53), (k4, A54)]);
        f(t + 8.0 * h / 9.0, &self.tmp, k5);
        Self::combine(&mut self.tmp, y, h, &[(k1, A61), (k2, A62), (k3, A63), (k4, A64), (k5, A65)]);
        f(t + h, &self.tmp, k6);
        Self::combine(out, y, h, &[(k1, B1), (k3, B3), (k4, B4), (k5, B5), (k6, B6)]);
        f(t + h, out, k7);

        let (atol, rtol) = (self.config.abs_tol, self.config.rel_tol);
        let mut err: f64 = 0.0;
        for i in 0..y.len() {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let scale = atol + rtol * y[i].norm().max(out[i].norm());
            err = err.max(e.norm() / scale);
        }
        err
    }

    /// Advances `y` from `t0` to `t1`: one RK4 step, or adaptive
    /// Dormand–Prince substeps with error control.
    pub fn advance<F>(&mut self, f: &mut F, t0: f64, t1: f64, y: &mut [C64]) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let mut next = std::mem::take(&mut self.next);
        let result = match self.config.method {
            Method::Rk4 => {
                self.rk4(f, t0, span, y, &mut next);
                y.copy_from_slice(&next);
                check_finite(t1, y)
            }
            Method::Rk45 => self.adaptive(f, t0, t1, y, &mut next),
        };
        self.next = next;
        result
    }

    fn adaptive<F>(&mut self, f: &mut F, t0: f64, t1: f64, y: &mut [C64], next: &mut [C64]) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let span = t1 - t0;
        let min_step = 1e-12 * span.max(1.0);
        let mut t = t0;
        let mut h = self.h_hint.unwrap_or(span).min(span);
        while t < t1 {
            let last = t + h >= t1;
            let step = if last { t1 - t } else { h };
            let err = self.dopri(f, t, step, y, next);
            if err <= 1.0 {
                t = if last { t1 } else { t + step };
                y.copy_from_slice(next);
                check_finite(t, y)?;
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    h = step * grow;
                    self.h_hint = Some(h);
                } else {
                    self.h_hint = Some(self.h_hint.unwrap_or(step).max(step));
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                if h < min_step || !h.is_finite() {
                    return Err(Error::IntegrationFailure {
                        t,
                        reason: format!("step size underflow (h = {h:e}, error norm = {err:e})"),
                    });
                }
            }
        }
        Ok(())
    }
}

fn check_finite(t: f64, y: &[C64]) -> Result<()> {
    if y.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::IntegrationFailure {
            t,
            reason: "state became non-finite".into(),
        })
    }
}
