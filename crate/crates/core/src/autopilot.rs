//! Fixed-gain three-loop autopilot.
//!
//! The fin command is `u = K_q q + I` where the integrator state obeys
//! `İ = K_θ q + K_a (a_z_ref - K_az a_z)`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TlaGains {
    /// Rate gain, s.
    pub k_q: f64,
    pub k_theta: f64,
    pub k_a: f64,
    pub k_az: f64,
}

impl Default for TlaGains {
    fn default() -> Self {
        Self {
            k_q: 0.464,
            k_theta: 15.62474,
            k_a: 0.2446459,
            k_az: 0.9278,
        }
    }
}

/// Selects which gains [`scale_gains_masked`] touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GainMask {
    pub k_q: bool,
    pub k_theta: bool,
    pub k_a: bool,
    pub k_az: bool,
}

impl Default for GainMask {
    fn default() -> Self {
        Self {
            k_q: true,
            k_theta: true,
            k_a: true,
            k_az: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TlaState {
    pub integrator: f64,
}

pub fn tla_integrand(gains: &TlaGains, q: f64, a_z: f64, a_z_ref: f64) -> f64 {
    gains.k_theta * q + gains.k_a * (a_z_ref - gains.k_az * a_z)
}

pub fn tla_output(gains: &TlaGains, tla: &TlaState, q: f64) -> f64 {
    gains.k_q * q + tla.integrator
}

/// Multiplies every gain by `alpha_tla`.
pub fn scale_gains(gains: &TlaGains, alpha_tla: f64) -> TlaGains {
    scale_gains_masked(gains, alpha_tla, &GainMask::default())
}

pub fn scale_gains_masked(gains: &TlaGains, alpha_tla: f64, mask: &GainMask) -> TlaGains {
    let s = |on: bool, g: f64| if on { g * alpha_tla } else { g };
    TlaGains {
        k_q: s(mask.k_q, gains.k_q),
        k_theta: s(mask.k_theta, gains.k_theta),
        k_a: s(mask.k_a, gains.k_a),
        k_az: s(mask.k_az, gains.k_az),
    }
}

/// Optional symmetric limit on the total fin command, rad.
pub fn clamp_command(u: f64, limit: Option<f64>) -> f64 {
    match limit {
        Some(l) => u.clamp(-l, l),
        None => u,
    }
}
