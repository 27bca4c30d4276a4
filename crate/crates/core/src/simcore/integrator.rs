//! Dormand–Prince 5(4) embedded Runge–Kutta integration.
//!
//! The 5th-order solution is propagated; the embedded 4th-order solution only
//! drives step-size control. Inputs that the caller holds constant across an
//! interval (fin command, thrust lookup) are simply captured by the derivative
//! closure, which is the zero-order-hold contract.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub min_step: f64,
    pub max_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-9,
            min_step: 1e-12,
            max_step: 0.1,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(SimError::config("integrator tolerances must be positive"));
        }
        if !(self.min_step > 0.0 && self.min_step <= self.max_step) {
            return Err(SimError::config(
                "integrator steps must satisfy 0 < min_step <= max_step",
            ));
        }
        Ok(())
    }
}

// Butcher tableau.
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

// 5th-order weights (also row 7 of the tableau, FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference between 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Adaptive integrator that remembers its last accepted step size between
/// calls, so consecutive controller intervals do not restart from scratch.
#[derive(Debug, Clone)]
pub struct DormandPrince {
    cfg: IntegratorConfig,
    next_step: Option<f64>,
    k: [Vec<f64>; 7],
    stage: Vec<f64>,
    y_new: Vec<f64>,
}

impl DormandPrince {
    pub fn new(cfg: IntegratorConfig) -> Self {
        Self {
            cfg,
            next_step: None,
            k: Default::default(),
            stage: Vec::new(),
            y_new: Vec::new(),
        }
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    fn ensure_dim(&mut self, n: usize) {
        if self.stage.len() != n {
            for k in &mut self.k {
                *k = vec![0.0; n];
            }
            self.stage = vec![0.0; n];
            self.y_new = vec![0.0; n];
        }
    }

    /// One Dormand–Prince step of size `h` from `(t, y)`. Fills `self.y_new`
    /// and returns the scaled error norm (≤ 1 means acceptable).
    fn attempt<F>(&mut self, f: &mut F, t: f64, y: &[f64], h: f64) -> Result<f64>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let stage = &mut self.stage;
        f(t, y, k1)?;
        for i in 0..n {
            stage[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, stage, k2)?;
        for i in 0..n {
            stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, stage, k3)?;
        for i in 0..n {
            stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, stage, k4)?;
        for i in 0..n {
            stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, stage, k5)?;
        for i in 0..n {
            stage[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, stage, k6)?;
        for i in 0..n {
            self.y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        f(t + h, &self.y_new, k7)?;

        let mut err = 0.0_f64;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = self.cfg.abs_tol + self.cfg.rel_tol * y[i].abs().max(self.y_new[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() || self.y_new.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite(format!("integrator state at t = {t}")));
        }
        Ok(err)
    }

    /// Advances `y` in place from `t0` to `t1` with adaptive steps.
    pub fn advance<F>(&mut self, f: &mut F, y: &mut [f64], t0: f64, t1: f64) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        if !(t1 > t0) {
            return Err(SimError::config(format!("integration interval [{t0}, {t1}] is empty")));
        }
        self.ensure_dim(y.len());
        let span = t1 - t0;
        let mut t = t0;
        let mut h = self.next_step.unwrap_or(span).min(self.cfg.max_step);
        loop {
            let remaining = t1 - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let err = self.attempt(f, t, y, step)?;
            if err <= 1.0 {
                y.copy_from_slice(&self.y_new);
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                if last {
                    // Keep the pre-truncation estimate so short final steps do
                    // not shrink the next interval's first step.
                    if step >= h {
                        h = (step * factor).min(self.cfg.max_step);
                    }
                    self.next_step = Some(h);
                    return Ok(());
                }
                t += step;
                h = (step * factor).min(self.cfg.max_step);
                if h < self.cfg.min_step {
                    return Err(SimError::StepUnderflow {
                        t,
                        step: h,
                        min_step: self.cfg.min_step,
                    });
                }
            } else {
                let factor = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                h = step * factor;
                if h < self.cfg.min_step {
                    return Err(SimError::StepUnderflow {
                        t,
                        step: h,
                        min_step: self.cfg.min_step,
                    });
                }
            }
        }
    }
}

/// Integrates from `t0` to `t1` with a fresh adaptive integrator.
pub fn integrate_interval<F>(mut f: F, y0: &[f64], t0: f64, t1: f64, cfg: &IntegratorConfig) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    cfg.validate()?;
    let mut y = y0.to_vec();
    DormandPrince::new(*cfg).advance(&mut f, &mut y, t0, t1)?;
    Ok(y)
}

/// Propagates the 5th-order solution with `steps` equal steps and no error control.
pub fn integrate_fixed<F>(mut f: F, y0: &[f64], t0: f64, t1: f64, steps: usize) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let mut dp = DormandPrince::new(IntegratorConfig::default());
    dp.ensure_dim(y0.len());
    let mut y = y0.to_vec();
    let h = (t1 - t0) / steps as f64;
    for i in 0..steps {
        dp.attempt(&mut f, t0 + i as f64 * h, &y, h)?;
        y.copy_from_slice(&dp.y_new);
    }
    Ok(y)
}
