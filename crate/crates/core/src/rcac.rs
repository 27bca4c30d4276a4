//! Retrospective cost adaptive control.
//!
//! The adaptive law is `u_k = φ_k θ_k` with the dense regressor
//! `φ_k = [u_{k-1} … u_{k-n_c}, z_{k-1} … z_{k-n_c}, γ_k]`, where
//! `γ_k = Σ_{i≤k} z_i` supplies the integral action. The gains minimize
//!
//! ```text
//! J_k(θ) = Σ_i λ^{k-i} [ R_z ẑ_i² + R_u (φ_i θ)² ] + λ^k (θ-θ_0)ᵀ R_θ (θ-θ_0)
//! ẑ_i    = z_i + φ_{f,i} θ - u_{f,i}
//! ```
//!
//! with `φ_f` and `u_f` obtained by passing the regressor and the past
//! adaptive inputs through the FIR target model `G_f`. The minimizer is
//! tracked exactly by weighted recursive least squares; [`batch_minimizer`]
//! recomputes it from scratch for testing.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{finite, Result, SimError};
use crate::linearize::FirFilter;

/// Longest FIR filter the delay lines can serve.
pub const MAX_FILTER_LAG: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RcacConfig {
    /// Controller order.
    pub n_c: usize,
    pub r_z: f64,
    pub r_u: f64,
    /// Prior weight; the weighting matrix is `r_theta · I`.
    pub r_theta: f64,
    /// Forgetting factor in (0, 1].
    pub lambda: f64,
    /// Initial gains; empty means all zeros.
    pub theta_0: Vec<f64>,
}

impl Default for RcacConfig {
    fn default() -> Self {
        Self {
            n_c: 4,
            r_z: 1.0,
            r_u: 0.25427,
            r_theta: 10f64.powf(14.398),
            lambda: 1.0,
            theta_0: Vec::new(),
        }
    }
}

impl RcacConfig {
    pub fn n_theta(&self) -> usize {
        2 * self.n_c + 1
    }

    pub fn theta_0(&self) -> DVector<f64> {
        if self.theta_0.is_empty() {
            DVector::zeros(self.n_theta())
        } else {
            DVector::from_column_slice(&self.theta_0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_c == 0 {
            return Err(SimError::config("n_c must be at least 1"));
        }
        if !(self.r_z >= 0.0 && self.r_u >= 0.0) {
            return Err(SimError::config("r_z and r_u must be nonnegative"));
        }
        if !(self.r_theta > 0.0 && self.r_theta.is_finite()) {
            return Err(SimError::config("r_theta must be positive and finite"));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(SimError::config("lambda must lie in (0, 1]"));
        }
        if !self.theta_0.is_empty() && self.theta_0.len() != self.n_theta() {
            return Err(SimError::config(format!(
                "theta_0 has length {}, expected 2 n_c + 1 = {}",
                self.theta_0.len(),
                self.n_theta()
            )));
        }
        Ok(())
    }
}

/// Exponentially weighted recursive least squares with a quadratic prior.
#[derive(Debug, Clone, PartialEq)]
pub struct Rls {
    pub theta: DVector<f64>,
    pub p: DMatrix<f64>,
    pub lambda: f64,
}

/// One weighted observation `weight · (row · θ - target)²`.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub row: &'a DVector<f64>,
    pub target: f64,
    pub weight: f64,
}

impl Rls {
    pub fn new(theta_0: DVector<f64>, prior_weight: f64, lambda: f64) -> Self {
        let n = theta_0.len();
        Self {
            theta: theta_0,
            p: DMatrix::identity(n, n) / prior_weight,
            lambda,
        }
    }

    /// Folds one batch of observations into the estimate. Zero-weight rows are skipped.
    pub fn update(&mut self, obs: &[Observation<'_>]) -> Result<()> {
        let used: Vec<&Observation<'_>> = obs.iter().filter(|o| o.weight > 0.0).collect();
        if used.is_empty() {
            // Only the forgetting acts.
            self.p /= self.lambda;
            return Ok(());
        }
        let n = self.theta.len();
        let m = used.len();
        let mut phi = DMatrix::zeros(m, n);
        let mut y = DVector::zeros(m);
        let mut w = DVector::zeros(m);
        for (i, o) in used.iter().enumerate() {
            phi.set_row(i, &o.row.transpose());
            y[i] = o.target;
            w[i] = o.weight;
        }
        let p_phi_t = &self.p * phi.transpose();
        let mut s = &phi * &p_phi_t;
        for i in 0..m {
            s[(i, i)] += self.lambda / w[i];
        }
        let s_inv = s
            .try_inverse()
            .ok_or_else(|| SimError::NonFinite("RLS innovation matrix inverse".into()))?;
        let mut p = (&self.p - &p_phi_t * s_inv * p_phi_t.transpose()) / self.lambda;
        p = (&p + p.transpose()) * 0.5;

        let residual = &phi * &self.theta - y;
        let weighted = residual.component_mul(&w);
        let theta = &self.theta - &p * phi.transpose() * weighted;

        if theta.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite("adaptive gain vector".into()));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite("RLS covariance".into()));
        }
        check_positive_definite(&p)?;
        self.theta = theta;
        self.p = p;
        Ok(())
    }
}

fn check_positive_definite(p: &DMatrix<f64>) -> Result<()> {
    let eig = SymmetricEigen::new(p.clone()).eigenvalues;
    let max = eig.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.iter().cloned().fold(f64::MAX, f64::min);
    if !(max > 0.0) || min < -1e-9 * max {
        return Err(SimError::Covariance { min_eigenvalue: min });
    }
    Ok(())
}

/// Adaptive-controller memory.
#[derive(Debug, Clone, PartialEq)]
pub struct RcacState {
    pub rls: Rls,
    /// Past adaptive inputs, most recent first, length `n_c`.
    pub u_hist: VecDeque<f64>,
    /// Past performance samples, most recent first, length `n_c`.
    pub z_hist: VecDeque<f64>,
    /// Raw regressors `φ_{k-1}, φ_{k-2}, …` feeding the filter.
    pub phi_line: VecDeque<DVector<f64>>,
    /// Raw adaptive inputs `u_{k-1}, u_{k-2}, …` feeding the filter.
    pub u_line: VecDeque<f64>,
    /// Accumulated performance `γ_k`.
    pub gamma: f64,
    pub steps: usize,
}

impl RcacState {
    pub fn new(cfg: &RcacConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_theta();
        Ok(Self {
            rls: Rls::new(cfg.theta_0(), cfg.r_theta, cfg.lambda),
            u_hist: std::iter::repeat_n(0.0, cfg.n_c).collect(),
            z_hist: std::iter::repeat_n(0.0, cfg.n_c).collect(),
            phi_line: std::iter::repeat_n(DVector::zeros(n), MAX_FILTER_LAG).collect(),
            u_line: std::iter::repeat_n(0.0, MAX_FILTER_LAG).collect(),
            gamma: 0.0,
            steps: 0,
        })
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.rls.theta
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.rls.p
    }
}

/// Assembles `[u_{k-1} … u_{k-n_c}, z_{k-1} … z_{k-n_c}, γ_k]`.
pub fn build_regressor(state: &RcacState) -> DVector<f64> {
    let n_c = state.u_hist.len();
    let mut phi = DVector::zeros(2 * n_c + 1);
    for (i, u) in state.u_hist.iter().enumerate() {
        phi[i] = *u;
    }
    for (i, z) in state.z_hist.iter().enumerate() {
        phi[n_c + i] = *z;
    }
    phi[2 * n_c] = state.gamma;
    phi
}

/// FIR convolution `Σ_j c_j x_{k-j}`; `delay_line[j-1]` holds `x_{k-j}`.
/// Samples beyond the end of the line count as zero.
pub fn filter_signal(filter: &FirFilter, delay_line: &[f64]) -> f64 {
    filter
        .taps()
        .map(|(lag, c)| delay_line.get(lag - 1).map_or(0.0, |x| c * x))
        .sum()
}

fn filter_vectors<'a>(filter: &FirFilter, line: impl Iterator<Item = &'a DVector<f64>>, n: usize) -> DVector<f64> {
    let line: Vec<&DVector<f64>> = line.collect();
    let mut out = DVector::zeros(n);
    for (lag, c) in filter.taps() {
        if let Some(x) = line.get(lag - 1) {
            out.axpy(c, x, 1.0);
        }
    }
    out
}

/// Quantities used by one update, kept for diagnostics and the batch oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct RcacStep {
    pub u: f64,
    pub z: f64,
    pub phi: DVector<f64>,
    pub phi_f: DVector<f64>,
    pub u_f: f64,
}

/// One adaptive step: filter, update the gains, compute `u_k` with the new gains, shift histories.
pub fn rcac_update(state: &mut RcacState, cfg: &RcacConfig, z_k: f64, filter: &FirFilter) -> Result<RcacStep> {
    finite(z_k, "performance sample z_k")?;
    if filter.max_lag() > MAX_FILTER_LAG {
        return Err(SimError::config(format!(
            "filter lag {} exceeds the supported {}",
            filter.max_lag(),
            MAX_FILTER_LAG
        )));
    }
    state.gamma += z_k;
    let phi = build_regressor(state);
    let n = phi.len();
    let phi_f = filter_vectors(filter, state.phi_line.iter(), n);
    let u_line: Vec<f64> = state.u_line.iter().copied().collect();
    let u_f = filter_signal(filter, &u_line);
    finite(u_f, "filtered input u_f")?;
    if phi_f.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFinite("filtered regressor".into()));
    }

    state.rls.update(&[
        Observation {
            row: &phi_f,
            target: u_f - z_k,
            weight: cfg.r_z,
        },
        Observation {
            row: &phi,
            target: 0.0,
            weight: cfg.r_u,
        },
    ])?;
    let u = finite(phi.dot(&state.rls.theta), "adaptive control u_k")?;

    state.u_hist.pop_back();
    state.u_hist.push_front(u);
    state.z_hist.pop_back();
    state.z_hist.push_front(z_k);
    state.phi_line.pop_back();
    state.phi_line.push_front(phi.clone());
    state.u_line.pop_back();
    state.u_line.push_front(u);
    state.steps += 1;

    Ok(RcacStep {
        u,
        z: z_k,
        phi,
        phi_f,
        u_f,
    })
}

/// Evaluates the retrospective cost at `theta_hat` over `history` (oldest first).
pub fn batch_cost(history: &[RcacStep], theta_hat: &DVector<f64>, cfg: &RcacConfig) -> f64 {
    let k = history.len();
    let mut j = 0.0;
    for (i, s) in history.iter().enumerate() {
        let w = cfg.lambda.powi((k - 1 - i) as i32);
        let z_hat = s.z + s.phi_f.dot(theta_hat) - s.u_f;
        let u_hat = s.phi.dot(theta_hat);
        j += w * (cfg.r_z * z_hat * z_hat + cfg.r_u * u_hat * u_hat);
    }
    let d = theta_hat - cfg.theta_0();
    j + cfg.lambda.powi(k as i32) * cfg.r_theta * d.dot(&d)
}

/// Closed-form minimizer of [`batch_cost`] from the accumulated normal equations.
pub fn batch_minimizer(history: &[RcacStep], cfg: &RcacConfig) -> Result<DVector<f64>> {
    let n = cfg.n_theta();
    let k = history.len();
    let prior = cfg.lambda.powi(k as i32) * cfg.r_theta;
    let mut h = DMatrix::identity(n, n) * prior;
    let mut b = cfg.theta_0() * prior;
    for (i, s) in history.iter().enumerate() {
        let w = cfg.lambda.powi((k - 1 - i) as i32);
        h += &s.phi_f * s.phi_f.transpose() * (w * cfg.r_z) + &s.phi * s.phi.transpose() * (w * cfg.r_u);
        b += &s.phi_f * (w * cfg.r_z * (s.u_f - s.z));
    }
    h.lu()
        .solve(&b)
        .ok_or_else(|| SimError::NonFinite("batch normal equations are singular".into()))
}
