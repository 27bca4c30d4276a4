//! Longitudinal point-vehicle dynamics with polynomial aerodynamics, a
//! second-order fin actuator, and the accelerometer/gyro outputs seen by the
//! autopilot.
//!
//! Normal acceleration `a_z` is measured along the body z axis, positive
//! toward the belly (down for a wings-level airframe). A positive normal-force
//! coefficient lifts the vehicle, so the center-of-gravity acceleration is
//! `a_z_cg = -q̄ S C_N / m`. The accelerometer sits `d_imu` ahead of the
//! center of gravity; a nose-up pitch acceleration moves it upward, giving
//! `a_z = a_z_cg - q̇ d_imu`. This is also the sign convention of the
//! guidance law's normal-acceleration command.

use serde::{Deserialize, Serialize};

use crate::environment::{isa_at, AtmosphereState, GRAVITY};
use crate::error::{finite, Result, SimError};

/// Aerodynamic and physical constants of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MissileParams {
    pub mass_kg: f64,
    pub ref_area_m2: f64,
    pub chord_m: f64,
    pub pitch_inertia_kg_m2: f64,
    pub imu_offset_m: f64,
    pub a_n: f64,
    pub b_n: f64,
    pub c_n: f64,
    pub d_n: f64,
    pub a_a: f64,
    pub a_m: f64,
    pub b_m: f64,
    pub c_m: f64,
    pub d_m: f64,
    pub e_m: f64,
    pub actuator_freq_rad_s: f64,
    pub actuator_damping: f64,
}

impl Default for MissileParams {
    fn default() -> Self {
        Self {
            mass_kg: 204.0227,
            ref_area_m2: 0.0409,
            chord_m: 0.2286,
            pitch_inertia_kg_m2: 247.4336,
            imu_offset_m: 0.5,
            a_n: -19.373,
            b_n: 31.023,
            c_n: 9.717,
            d_n: 1.948,
            a_a: 0.3005,
            a_m: 40.440,
            b_m: -64.015,
            c_m: 2.922,
            d_m: -11.803,
            e_m: -1.719,
            actuator_freq_rad_s: 150.0,
            actuator_damping: 0.7,
        }
    }
}

/// Group of aerodynamic coefficients scaled together in robustness studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientGroup {
    /// `d_N` and `d_M`.
    FinDeflection,
    /// Every coefficient multiplying a power of the angle of attack.
    AngleOfAttack,
}

impl MissileParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass_kg", self.mass_kg),
            ("ref_area_m2", self.ref_area_m2),
            ("chord_m", self.chord_m),
            ("pitch_inertia_kg_m2", self.pitch_inertia_kg_m2),
            ("actuator_freq_rad_s", self.actuator_freq_rad_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.actuator_damping > 0.0 && self.actuator_damping < 1.0) {
            return Err(SimError::config(format!(
                "actuator_damping must lie in (0, 1), got {}",
                self.actuator_damping
            )));
        }
        Ok(())
    }

    /// Copy with one coefficient group multiplied by `factor`.
    pub fn scaled(&self, group: CoefficientGroup, factor: f64) -> Self {
        let mut p = *self;
        match group {
            CoefficientGroup::FinDeflection => {
                p.d_n *= factor;
                p.d_m *= factor;
            }
            CoefficientGroup::AngleOfAttack => {
                p.a_n *= factor;
                p.b_n *= factor;
                p.c_n *= factor;
                p.a_m *= factor;
                p.b_m *= factor;
                p.c_m *= factor;
            }
        }
        p
    }
}

/// Continuous state of the vehicle and its fin actuator. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MissileState {
    pub mach: f64,
    /// Flight path angle.
    pub gamma: f64,
    /// Pitch angle.
    pub theta: f64,
    /// Pitch rate.
    pub q: f64,
    /// Altitude, m.
    pub h: f64,
    /// Downrange, m.
    pub x: f64,
    /// Fin deflection.
    pub delta: f64,
    pub delta_dot: f64,
}

impl MissileState {
    pub const DIM: usize = 8;

    pub fn to_array(&self) -> [f64; Self::DIM] {
        [
            self.mach,
            self.gamma,
            self.theta,
            self.q,
            self.h,
            self.x,
            self.delta,
            self.delta_dot,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self {
            mach: v[0],
            gamma: v[1],
            theta: v[2],
            q: v[3],
            h: v[4],
            x: v[5],
            delta: v[6],
            delta_dot: v[7],
        }
    }

    pub fn alpha(&self) -> f64 {
        self.theta - self.gamma
    }

    /// True airspeed, m/s.
    pub fn airspeed(&self) -> Result<f64> {
        Ok(self.mach * isa_at(self.h)?.speed_of_sound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightCondition {
    pub alpha: f64,
    pub mach: f64,
    /// Pa
    pub dyn_pressure: f64,
}

impl FlightCondition {
    pub fn new(state: &MissileState, atm: &AtmosphereState) -> Self {
        let v = state.mach * atm.speed_of_sound;
        Self {
            alpha: state.alpha(),
            mach: state.mach,
            dyn_pressure: 0.5 * atm.density * v * v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroCoeffs {
    pub c_n: f64,
    pub c_a: f64,
    pub c_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroLoads {
    /// Normal force, N.
    pub f_n: f64,
    /// Axial force, N.
    pub f_a: f64,
    /// Pitching moment, N·m.
    pub moment: f64,
}

impl AeroLoads {
    pub fn new(coeffs: &AeroCoeffs, cond: &FlightCondition, params: &MissileParams) -> Self {
        let qs = cond.dyn_pressure * params.ref_area_m2;
        Self {
            f_n: qs * coeffs.c_n,
            f_a: qs * coeffs.c_a,
            moment: qs * params.chord_m * coeffs.c_m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ImuOutput {
    /// Sensed normal acceleration, m/s², body-z positive.
    pub a_z: f64,
    /// Pitch rate, rad/s.
    pub q: f64,
}

pub fn aero_coeffs(cond: &FlightCondition, delta: f64, q: f64, p: &MissileParams) -> AeroCoeffs {
    let a = cond.alpha;
    let m = cond.mach;
    let a_abs = a * a.abs();
    let a_cube = a * a * a;
    AeroCoeffs {
        c_n: p.a_n * a_cube + p.b_n * a_abs + p.c_n * (2.0 - m / 3.0) * a + p.d_n * delta,
        c_a: p.a_a,
        c_m: p.a_m * a_cube + p.b_m * a_abs + p.c_m * (8.0 * m / 3.0 - 7.0) * a + p.d_m * delta + p.e_m * q,
    }
}

/// Everything the airframe model produces at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirframeEval {
    pub derivative: MissileState,
    pub imu: ImuOutput,
    pub coeffs: AeroCoeffs,
    pub atmosphere: AtmosphereState,
    /// Center-of-gravity normal acceleration, m/s², body-z positive.
    pub a_z_cg: f64,
}

/// Evaluates derivatives and sensor outputs in one pass.
pub fn evaluate(state: &MissileState, thrust: f64, fin_cmd: f64, p: &MissileParams) -> Result<AirframeEval> {
    if !(state.mach > 0.0) {
        return Err(SimError::Domain {
            quantity: "mach",
            value: state.mach,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let atm = isa_at(state.h)?;
    let a = atm.speed_of_sound;
    let rho = atm.density;
    let m = state.mach;
    let cond = FlightCondition::new(state, &atm);
    let c = aero_coeffs(&cond, state.delta, state.q, p);
    let (sa, ca) = cond.alpha.sin_cos();
    let (sg, cg) = state.gamma.sin_cos();
    let mass = p.mass_kg;
    let s = p.ref_area_m2;

    let mach_dot =
        thrust / (mass * a) * ca - GRAVITY / a * sg - rho * a * m * m * s / (2.0 * mass) * (c.c_n * sa + c.c_a * ca);
    let gamma_dot = thrust / (mass * a * m) * sa - GRAVITY / (a * m) * cg
        + rho * a * m * s / (2.0 * mass) * (c.c_n * ca - c.c_a * sa);
    let q_dot = rho * a * a * m * m * s * p.chord_m / (2.0 * p.pitch_inertia_kg_m2) * c.c_m;
    let wa = p.actuator_freq_rad_s;
    let delta_ddot = wa * wa * (fin_cmd - state.delta) - 2.0 * p.actuator_damping * wa * state.delta_dot;

    let derivative = MissileState {
        mach: mach_dot,
        gamma: gamma_dot,
        theta: state.q,
        q: q_dot,
        h: m * a * sg,
        x: m * a * cg,
        delta: state.delta_dot,
        delta_dot: delta_ddot,
    };
    for (v, name) in derivative.to_array().iter().zip(DERIVATIVE_NAMES) {
        finite(*v, name)?;
    }
    let a_z_cg = -rho * a * a * m * m * s / (2.0 * mass) * c.c_n;
    let imu = ImuOutput {
        a_z: a_z_cg - q_dot * p.imu_offset_m,
        q: state.q,
    };
    Ok(AirframeEval {
        derivative,
        imu,
        coeffs: c,
        atmosphere: atm,
        a_z_cg,
    })
}

const DERIVATIVE_NAMES: [&str; 8] = [
    "mach rate",
    "flight path rate",
    "pitch rate",
    "pitch acceleration",
    "climb rate",
    "downrange rate",
    "fin rate",
    "fin acceleration",
];

pub fn state_derivative(state: &MissileState, thrust: f64, fin_cmd: f64, p: &MissileParams) -> Result<MissileState> {
    Ok(evaluate(state, thrust, fin_cmd, p)?.derivative)
}

pub fn imu_outputs(state: &MissileState, thrust: f64, fin_cmd: f64, p: &MissileParams) -> Result<ImuOutput> {
    Ok(evaluate(state, thrust, fin_cmd, p)?.imu)
}
