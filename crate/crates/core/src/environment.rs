//! International Standard Atmosphere, troposphere segment.
//!
//! Sea-level reference values are the 1976 standard constants. Gravity is a
//! single constant used by every equation of motion in the crate.

use crate::error::{Result, SimError};

/// Standard gravitational acceleration, m/s².
pub const GRAVITY: f64 = 9.806_65;

pub const SEA_LEVEL_TEMPERATURE: f64 = 288.15;
pub const SEA_LEVEL_DENSITY: f64 = 1.225;
/// Temperature lapse rate, K/m.
pub const LAPSE_RATE: f64 = 0.0065;
/// Specific gas constant of dry air, J/(kg·K).
pub const GAS_CONSTANT_AIR: f64 = 287.053;
pub const HEAT_CAPACITY_RATIO: f64 = 1.4;

/// Upper edge of the troposphere, m.
pub const TROPOPAUSE_ALTITUDE: f64 = 11_000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphereState {
    /// kg/m³
    pub density: f64,
    /// m/s
    pub speed_of_sound: f64,
    /// K
    pub temperature: f64,
}

/// Evaluates the troposphere lapse model at `altitude` (m).
///
/// Altitudes outside `[0, 11000]` m are rejected: the simulation has left the
/// regime the model covers.
pub fn isa_at(altitude: f64) -> Result<AtmosphereState> {
    if !(0.0..=TROPOPAUSE_ALTITUDE).contains(&altitude) {
        return Err(SimError::Domain {
            quantity: "altitude",
            value: altitude,
            min: 0.0,
            max: TROPOPAUSE_ALTITUDE,
        });
    }
    let temperature = SEA_LEVEL_TEMPERATURE - LAPSE_RATE * altitude;
    let exponent = GRAVITY / (LAPSE_RATE * GAS_CONSTANT_AIR) - 1.0;
    let density = SEA_LEVEL_DENSITY * (temperature / SEA_LEVEL_TEMPERATURE).powf(exponent);
    let speed_of_sound = (HEAT_CAPACITY_RATIO * GAS_CONSTANT_AIR * temperature).sqrt();
    Ok(AtmosphereState {
        density,
        speed_of_sound,
        temperature,
    })
}
