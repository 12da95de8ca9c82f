//! Adaptive Dormand–Prince 5(4) integrator with exact landing on
//! requested output times.

use crate::error::{Error, Result};

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
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

#[derive(Clone, Copy, Debug)]
pub struct StepControl {
    /// Mixed absolute/relative per-step error tolerance.
    pub tol: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
        }
        Ok(Self { tol, max_steps: 50_000_000 })
    }
}

/// Integration state carried between output times so that step-size
/// history is reused.
pub struct Dopri5<F> {
    rhs: F,
    ctl: StepControl,
    pub t: f64,
    pub y: Vec<f64>,
    h: f64,
    k: [Vec<f64>; 7],
    fsal_valid: bool,
    pub steps: usize,
    pub rejected: usize,
}

impl<F: FnMut(&[f64], &mut [f64])> Dopri5<F> {
    pub fn new(rhs: F, t0: f64, y0: Vec<f64>, ctl: StepControl) -> Self {
        let n = y0.len();
        let k = std::array::from_fn(|_| vec![0.0; n]);
        Self { rhs, ctl, t: t0, y: y0, h: 0.0, k, fsal_valid: false, steps: 0, rejected: 0 }
    }

    fn initial_step(&mut self) -> f64 {
        let n = self.y.len();
        let mut f0 = vec![0.0; n];
        (self.rhs)(&self.y, &mut f0);
        let sc: Vec<f64> = self.y.iter().map(|v| self.ctl.tol * (1.0 + v.abs())).collect();
        let d0 = rms(&self.y, &sc);
        let d1 = rms(&f0, &sc);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1: Vec<f64> = self.y.iter().zip(&f0).map(|(y, f)| y + h0 * f).collect();
        let mut f1 = vec![0.0; n];
        (self.rhs)(&y1, &mut f1);
        let diff: Vec<f64> = f1.iter().zip(&f0).map(|(a, b)| a - b).collect();
        let d2 = rms(&diff, &sc) / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        self.k[0] = f0;
        self.fsal_valid = true;
        (100.0 * h0).min(h1)
    }

    /// Advances exactly to `t_target`.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        if t_target < self.t {
            return Err(Error::InvalidParams("output times must be nondecreasing".into()));
        }
        if self.h == 0.0 {
            self.h = self.initial_step();
        }
        let n = self.y.len();
        let mut ytmp = vec![0.0; n];
        let mut y5 = vec![0.0; n];
        while self.t < t_target {
            if self.steps + self.rejected >= self.ctl.max_steps {
                return Err(Error::Integration { t: self.t, reason: "maximum number of steps exceeded".into() });
            }
            let remaining = t_target - self.t;
            let landing = self.h >= remaining;
            let h = if landing { remaining } else { self.h };
            if h <= 1e-14 * self.t.abs().max(1.0) && !landing {
                return Err(Error::Integration { t: self.t, reason: format!("step size underflow (h = {h:e})") });
            }
            if !self.fsal_valid {
                let (k0, _) = self.k.split_at_mut(1);
                (self.rhs)(&self.y, &mut k0[0]);
                self.fsal_valid = true;
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = self.y[i];
                    for (j, a) in A[s].iter().enumerate().take(s) {
                        acc += h * a * self.k[j][i];
                    }
                    ytmp[i] = acc;
                }
                let (_, rest) = self.k.split_at_mut(s);
                (self.rhs)(&ytmp, &mut rest[0]);
                if s == 6 {
                    y5.copy_from_slice(&ytmp);
                }
            }
            let mut err = 0.0f64;
            for i in 0..n {
                let mut e = 0.0;
                for s in 0..7 {
                    e += (B5[s] - B4[s]) * self.k[s][i];
                }
                let sc = self.ctl.tol * (1.0 + self.y[i].abs().max(y5[i].abs()));
                err = err.max((h * e).abs() / sc);
            }
            if !err.is_finite() {
                self.h = h * 0.2;
                self.rejected += 1;
                self.fsal_valid = true;
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                self.t = if landing { t_target } else { self.t + h };
                self.y.copy_from_slice(&y5);
                let last = std::mem::take(&mut self.k[6]);
                self.k[6] = std::mem::replace(&mut self.k[0], last);
                self.steps += 1;
                // keep the step-size history instead of the truncated landing step
                if !landing {
                    self.h = h * factor;
                } else if factor < 1.0 {
                    self.h = self.h.min(h * factor);
                }
            } else {
                self.h = h * factor.min(1.0);
                self.rejected += 1;
            }
        }
        Ok(())
    }
}

fn rms(v: &[f64], sc: &[f64]) -> f64 {
    (v.iter().zip(sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_returns_after_one_period() {
        let rhs = |y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let mut ig = Dopri5::new(rhs, 0.0, vec![1.0, 0.0], StepControl::new(1e-12).unwrap());
        ig.advance_to(std::f64::consts::TAU).unwrap();
        assert!((ig.y[0] - 1.0).abs() < 1e-10 && ig.y[1].abs() < 1e-10);
        assert_eq!(ig.t, std::f64::consts::TAU);
    }

    #[test]
    fn exponential_growth_matches() {
        let rhs = |y: &[f64], dy: &mut [f64]| dy[0] = y[0];
        let mut ig = Dopri5::new(rhs, 0.0, vec![1.0], StepControl::new(1e-11).unwrap());
        for k in 1..=10 {
            ig.advance_to(k as f64 * 0.3).unwrap();
        }
        assert!((ig.y[0] - 3f64.exp()).abs() < 1e-8 * 3f64.exp());
    }

    #[test]
    fn blow_up_reports_failure() {
        let rhs = |y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0];
        let mut ig = Dopri5::new(rhs, 0.0, vec![1.0], StepControl::new(1e-10).unwrap());
        assert!(matches!(ig.advance_to(2.0), Err(Error::Integration { .. })));
    }
}
