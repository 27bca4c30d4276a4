//! Planar pursuit of a point-mass evader under proportional navigation.
//!
//! Positions are `(d, h)`: horizontal downrange and altitude. The
//! line-of-sight angle `β` is measured from the horizontal toward the evader.
//! The guidance law commands the body-z normal acceleration
//! `n_z = -λ V_P β̇ - g cos γ_P`, which turns the flight path at `γ̇ = λ β̇`.

use serde::{Deserialize, Serialize};

use crate::airframe::ImuOutput;
use crate::airframe::{MissileParams, MissileState};
use crate::environment::{isa_at, GRAVITY};
use crate::error::{Result, SimError};
use crate::simcore::closed_loop::{
    Aborted, ClosedLoop, ControllerConfig, EngagementSample, Exogenous, LoopConfig, Record, Trajectory,
};
use crate::simcore::integrator::{DormandPrince, IntegratorConfig};

/// Speed below which a point mass is considered stalled, m/s.
pub const STALL_SPEED: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThrustBreakpoint {
    pub t_start_s: f64,
    pub thrust_n: f64,
}

/// Piecewise-constant thrust; zero before the first breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThrustProfile {
    breakpoints: Vec<ThrustBreakpoint>,
}

impl ThrustProfile {
    pub fn new(breakpoints: Vec<ThrustBreakpoint>) -> Result<Self> {
        let p = Self { breakpoints };
        p.validate()?;
        Ok(p)
    }

    pub fn constant(thrust_n: f64) -> Self {
        Self {
            breakpoints: vec![ThrustBreakpoint {
                t_start_s: 0.0,
                thrust_n,
            }],
        }
    }

    /// Boost, sustain, then burnout.
    pub fn boost_sustain() -> Self {
        Self {
            breakpoints: vec![
                ThrustBreakpoint {
                    t_start_s: 0.0,
                    thrust_n: 15_000.0,
                },
                ThrustBreakpoint {
                    t_start_s: 10.0,
                    thrust_n: 2_000.0,
                },
                ThrustBreakpoint {
                    t_start_s: 20.0,
                    thrust_n: 0.0,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.breakpoints.windows(2) {
            if !(w[1].t_start_s > w[0].t_start_s) {
                return Err(SimError::config(
                    "thrust breakpoints must be strictly increasing in time",
                ));
            }
        }
        if self
            .breakpoints
            .iter()
            .any(|b| !(b.thrust_n >= 0.0 && b.thrust_n.is_finite()))
        {
            return Err(SimError::config("thrust values must be finite and nonnegative"));
        }
        Ok(())
    }

    pub fn breakpoints(&self) -> &[ThrustBreakpoint] {
        &self.breakpoints
    }

    pub fn at(&self, t: f64) -> f64 {
        self.breakpoints
            .iter()
            .rev()
            .find(|b| b.t_start_s <= t)
            .map_or(0.0, |b| b.thrust_n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMass {
    /// m/s
    pub v: f64,
    pub gamma: f64,
    pub d: f64,
    pub h: f64,
    pub m: f64,
}

impl PointMass {
    fn to_array(self) -> [f64; 4] {
        [self.v, self.gamma, self.d, self.h]
    }

    fn with(self, y: &[f64]) -> Self {
        Self {
            v: y[0],
            gamma: y[1],
            d: y[2],
            h: y[3],
            m: self.m,
        }
    }

    /// Kinematic view of the full airframe state.
    pub fn from_missile(s: &MissileState, mass: f64) -> Result<Self> {
        Ok(Self {
            v: s.airspeed()?,
            gamma: s.gamma,
            d: s.x,
            h: s.h,
            m: mass,
        })
    }
}

/// Range and line-of-sight angle from pursuer to evader.
pub fn los_state(pursuer: (f64, f64), evader: (f64, f64)) -> (f64, f64) {
    let dd = evader.0 - pursuer.0;
    let dh = evader.1 - pursuer.1;
    (dd.hypot(dh), dh.atan2(dd))
}

/// `β̇`, or `None` at zero range.
pub fn los_rate(p: &PointMass, e: &PointMass) -> Option<f64> {
    let (r, beta) = los_state((p.d, p.h), (e.d, e.h));
    if r <= 0.0 {
        return None;
    }
    Some((p.v * (beta - p.gamma).sin() - e.v * (beta - e.gamma).sin()) / r)
}

/// `Ṙ` from the relative velocity.
pub fn range_rate(p: &PointMass, e: &PointMass) -> f64 {
    let dd = e.d - p.d;
    let dh = e.h - p.h;
    let r = dd.hypot(dh);
    if r == 0.0 {
        return 0.0;
    }
    let vd = e.v * e.gamma.cos() - p.v * p.gamma.cos();
    let vh = e.v * e.gamma.sin() - p.v * p.gamma.sin();
    (dd * vd + dh * vh) / r
}

/// Proportional-navigation normal-acceleration command, m/s².
pub fn pn_accel_command(p: &PointMass, e: &PointMass, lambda_pn: f64) -> Option<f64> {
    los_rate(p, e).map(|beta_dot| -lambda_pn * p.v * beta_dot - GRAVITY * p.gamma.cos())
}

/// `[V̇, γ̇, ḋ, ḣ]` of a point mass.
pub fn point_mass_derivative(pm: &PointMass, thrust: f64, drag: f64, n_z: f64) -> Result<[f64; 4]> {
    if !(pm.v > STALL_SPEED) {
        return Err(SimError::Stall("point mass", pm.v));
    }
    let (sg, cg) = pm.gamma.sin_cos();
    Ok([
        (thrust - drag) / pm.m - GRAVITY * sg,
        -(n_z + GRAVITY * cg) / pm.v,
        pm.v * cg,
        pm.v * sg,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum EvaderProfile {
    Ballistic,
    Straight,
    Weave { amplitude_m_s2: f64, freq_rad_s: f64 },
}

impl EvaderProfile {
    pub fn n_z(&self, t: f64, pm: &PointMass) -> f64 {
        match *self {
            EvaderProfile::Ballistic => 0.0,
            EvaderProfile::Straight => -GRAVITY * pm.gamma.cos(),
            EvaderProfile::Weave {
                amplitude_m_s2,
                freq_rad_s,
            } => -GRAVITY * pm.gamma.cos() + amplitude_m_s2 * (freq_rad_s * t).sin(),
        }
    }
}

/// Navigation and evader settings shared by every pursuer kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GuidanceConfig {
    pub lambda_pn: f64,
    pub evader: EvaderProfile,
    /// Holds the evader speed constant instead of letting gravity act on it.
    pub evader_constant_speed: bool,
    /// Drag on the ideal pursuer, N.
    pub ideal_drag_n: f64,
    pub miss_threshold_m: f64,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self {
            lambda_pn: 4.0,
            evader: EvaderProfile::Straight,
            evader_constant_speed: false,
            ideal_drag_n: 0.0,
            miss_threshold_m: 5.0,
        }
    }
}

/// Initial geometry. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngagementInit {
    pub pursuer_mach: f64,
    pub pursuer_gamma: f64,
    pub pursuer_h: f64,
    pub evader_mach: f64,
    pub evader_gamma: f64,
    pub evader_h: f64,
    /// Horizontal offset of the evader ahead of the pursuer, m.
    pub evader_ahead: f64,
}

impl Default for EngagementInit {
    fn default() -> Self {
        Self {
            pursuer_mach: 0.5,
            pursuer_gamma: 0.0,
            pursuer_h: 3000.0,
            evader_mach: 0.85,
            evader_gamma: 15f64.to_radians(),
            evader_h: 4000.0,
            evader_ahead: 1000.0,
        }
    }
}

impl EngagementInit {
    /// Airframe initial state: zero angle of attack, body at rest in pitch.
    pub fn pursuer_state(&self) -> MissileState {
        MissileState {
            mach: self.pursuer_mach,
            gamma: self.pursuer_gamma,
            theta: self.pursuer_gamma,
            h: self.pursuer_h,
            ..Default::default()
        }
    }

    pub fn evader(&self) -> Result<PointMass> {
        Ok(PointMass {
            v: self.evader_mach * isa_at(self.evader_h)?.speed_of_sound,
            gamma: self.evader_gamma,
            d: self.evader_ahead,
            h: self.evader_h,
            m: 1.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PursuerKind {
    /// Point mass that realizes the guidance command instantly.
    Ideal,
    /// Airframe under the fixed-gain autopilot.
    Fixed,
    /// Airframe under the adaptively augmented autopilot.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngagementResult {
    pub trajectory: Trajectory,
    pub miss_distance: f64,
    pub flight_time: f64,
    pub intercepted: bool,
}

fn evader_derivative(
    profile: &EvaderProfile,
    constant_speed: bool,
    t: f64,
    e: &PointMass,
    out: &mut [f64],
) -> Result<()> {
    let d = point_mass_derivative(e, 0.0, 0.0, profile.n_z(t, e))?;
    out.copy_from_slice(&d);
    if constant_speed {
        out[0] = 0.0;
    }
    Ok(())
}

/// Command source for the airframe: proportional navigation against a simulated evader.
pub struct Pursuit {
    pub guidance: GuidanceConfig,
    pub evader0: PointMass,
    pub pursuer_mass: f64,
}

impl Pursuit {
    fn evader(&self, extra: &[f64]) -> PointMass {
        self.evader0.with(extra)
    }
}

impl Exogenous for Pursuit {
    fn dim(&self) -> usize {
        4
    }

    fn initial(&self) -> Vec<f64> {
        self.evader0.to_array().to_vec()
    }

    fn reference(&self, _t: f64, missile: &MissileState, extra: &[f64]) -> Result<f64> {
        let p = PointMass::from_missile(missile, self.pursuer_mass)?;
        let e = self.evader(extra);
        Ok(pn_accel_command(&p, &e, self.guidance.lambda_pn).unwrap_or(-GRAVITY * p.gamma.cos()))
    }

    fn derivative(&self, t: f64, extra: &[f64], out: &mut [f64]) -> Result<()> {
        evader_derivative(
            &self.guidance.evader,
            self.guidance.evader_constant_speed,
            t,
            &self.evader(extra),
            out,
        )
    }

    fn sample(&self, _t: f64, missile: &MissileState, extra: &[f64]) -> Option<EngagementSample> {
        let e = self.evader(extra);
        let (range, los_angle) = los_state((missile.x, missile.h), (e.d, e.h));
        Some(EngagementSample {
            range,
            los_angle,
            evader_d: e.d,
            evader_h: e.h,
        })
    }
}

/// Everything that defines one engagement run.
#[derive(Debug, Clone, PartialEq)]
pub struct EngagementSetup {
    pub init: EngagementInit,
    pub guidance: GuidanceConfig,
    pub thrust: ThrustProfile,
    pub params: MissileParams,
    pub controller: ControllerConfig,
    pub loop_cfg: LoopConfig,
    pub integrator: IntegratorConfig,
}

impl Default for EngagementSetup {
    fn default() -> Self {
        Self {
            init: EngagementInit::default(),
            guidance: GuidanceConfig::default(),
            thrust: ThrustProfile::boost_sustain(),
            params: MissileParams::default(),
            controller: ControllerConfig::default(),
            loop_cfg: LoopConfig {
                t_s: 0.005,
                t_final: 30.0,
            },
            integrator: IntegratorConfig::default(),
        }
    }
}

const BISECTION_TOL: f64 = 1e-4;

/// Finds the root of `rdot(t)` on `[lo, hi]` given `rdot(lo) < 0 <= rdot(hi)`.
fn bisect<F: FnMut(f64) -> Result<f64>>(mut rdot: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if rdot(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Flies one engagement to closest approach or `t_final`.
pub fn run_engagement(setup: &EngagementSetup, kind: PursuerKind) -> std::result::Result<EngagementResult, Aborted> {
    let abort = |t: f64, error: SimError, trajectory: Trajectory| Aborted { t, error, trajectory };
    let evader0 = setup.init.evader().map_err(|e| abort(0.0, e, Trajectory::default()))?;
    let p0 = setup.init.pursuer_state();
    let (r0, _) = los_state((p0.x, p0.h), (evader0.d, evader0.h));
    if r0 <= setup.guidance.miss_threshold_m * 1e-9 {
        return Ok(EngagementResult {
            trajectory: Trajectory::default(),
            miss_distance: r0,
            flight_time: 0.0,
            intercepted: true,
        });
    }
    match kind {
        PursuerKind::Ideal => run_ideal(setup, evader0),
        PursuerKind::Fixed | PursuerKind::Adaptive => {
            let mut ctrl = setup.controller.clone();
            ctrl.adaptive = kind == PursuerKind::Adaptive;
            run_airframe(setup, ctrl, evader0)
        }
    }
}

fn run_airframe(
    setup: &EngagementSetup,
    ctrl: ControllerConfig,
    evader0: PointMass,
) -> std::result::Result<EngagementResult, Aborted> {
    let pursuit = Pursuit {
        guidance: setup.guidance,
        evader0,
        pursuer_mass: setup.params.mass_kg,
    };
    let mut sim = ClosedLoop::new(
        setup.params,
        setup.thrust.clone(),
        setup.init.pursuer_state(),
        ctrl,
        pursuit,
        setup.loop_cfg,
        setup.integrator,
    )
    .map_err(|error| Aborted {
        t: 0.0,
        error,
        trajectory: Trajectory::default(),
    })?;
    let mass = setup.params.mass_kg;
    let geometry = |sim: &ClosedLoop<Pursuit>, y: &[f64]| -> Result<(f64, f64)> {
        let m = MissileState::from_slice(&y[..MissileState::DIM]);
        let p = PointMass::from_missile(&m, mass)?;
        let e = sim.exogenous().evader(&y[MissileState::DIM + 1..]);
        Ok((los_state((p.d, p.h), (e.d, e.h)).0, range_rate(&p, &e)))
    };
    let n = setup.loop_cfg.steps();
    let t_s = setup.loop_cfg.t_s;
    let outcome = (|| -> Result<(f64, f64)> {
        let (mut r, mut rdot) = geometry(&sim, sim.state_vector())?;
        while sim.step_index() < n {
            sim.control()?;
            let y0 = sim.state_vector().to_vec();
            let t0 = sim.time();
            sim.advance()?;
            let (r1, rdot1) = geometry(&sim, sim.state_vector())?;
            if rdot < 0.0 && rdot1 >= 0.0 {
                let t_star = bisect(
                    |t| {
                        let y = sim_peek(&sim, &y0, t0, t)?;
                        Ok(geometry(&sim, &y)?.1)
                    },
                    t0,
                    t0 + t_s,
                )?;
                let y = sim_peek(&sim, &y0, t0, t_star)?;
                let r_star = geometry(&sim, &y)?.0;
                return Ok((r_star.min(r).min(r1), t_star));
            }
            r = r1;
            rdot = rdot1;
        }
        sim.control()?;
        Ok((r, sim.time()))
    })();
    match outcome {
        Ok((miss, t)) => Ok(EngagementResult {
            trajectory: sim.into_trajectory(),
            miss_distance: miss,
            flight_time: t,
            intercepted: miss < setup.guidance.miss_threshold_m,
        }),
        Err(error) => Err(Aborted {
            t: sim.time(),
            error,
            trajectory: sim.into_trajectory(),
        }),
    }
}

fn sim_peek(sim: &ClosedLoop<Pursuit>, y0: &[f64], t0: f64, t: f64) -> Result<Vec<f64>> {
    sim.propagate_from(y0, t0, t)
}

fn run_ideal(setup: &EngagementSetup, evader0: PointMass) -> std::result::Result<EngagementResult, Aborted> {
    let g = setup.guidance;
    let init = &setup.init;
    let pursuer0 = PointMass {
        v: init.pursuer_mach
            * isa_at(init.pursuer_h)
                .map_err(|e| Aborted {
                    t: 0.0,
                    error: e,
                    trajectory: Trajectory::default(),
                })?
                .speed_of_sound,
        gamma: init.pursuer_gamma,
        d: 0.0,
        h: init.pursuer_h,
        m: setup.params.mass_kg,
    };
    let thrust = &setup.thrust;
    let split = |y: &[f64]| (pursuer0.with(&y[..4]), evader0.with(&y[4..]));
    let command = |y: &[f64]| {
        let (p, e) = split(y);
        pn_accel_command(&p, &e, g.lambda_pn).unwrap_or(-GRAVITY * p.gamma.cos())
    };
    let deriv = |t: f64, y: &[f64], out: &mut [f64], thrust_n: f64, n_z: f64| -> Result<()> {
        let (p, e) = split(y);
        out[..4].copy_from_slice(&point_mass_derivative(&p, thrust_n, g.ideal_drag_n, n_z)?);
        evader_derivative(&g.evader, g.evader_constant_speed, t, &e, &mut out[4..])
    };
    let record = |t: f64, y: &[f64]| -> Result<Record> {
        let (p, e) = split(y);
        let n_z = command(y);
        let (range, los_angle) = los_state((p.d, p.h), (e.d, e.h));
        Ok(Record {
            t,
            state: MissileState {
                mach: p.v / isa_at(p.h)?.speed_of_sound,
                gamma: p.gamma,
                theta: p.gamma,
                h: p.h,
                x: p.d,
                ..Default::default()
            },
            imu: ImuOutput { a_z: n_z, q: 0.0 },
            a_z_ref: n_z,
            u: 0.0,
            u_tla: 0.0,
            u_a: 0.0,
            z: 0.0,
            q_dot: 0.0,
            theta: vec![0.0; setup.controller.adaptive_config.rcac.n_theta()],
            engagement: Some(EngagementSample {
                range,
                los_angle,
                evader_d: e.d,
                evader_h: e.h,
            }),
        })
    };
    let geometry = |y: &[f64]| {
        let (p, e) = split(y);
        (los_state((p.d, p.h), (e.d, e.h)).0, range_rate(&p, &e))
    };
    let mut y: Vec<f64> = pursuer0.to_array().into_iter().chain(evader0.to_array()).collect();
    let mut traj = Trajectory {
        n_theta: setup.controller.adaptive_config.rcac.n_theta(),
        records: Vec::new(),
    };
    let mut dp = DormandPrince::new(setup.integrator);
    let t_s = setup.loop_cfg.t_s;
    let n = setup.loop_cfg.steps();
    let mut k = 0;
    let outcome = (|| -> Result<(f64, f64)> {
        let (mut r, mut rdot) = geometry(&y);
        while k < n {
            let t0 = k as f64 * t_s;
            let t1 = (k + 1) as f64 * t_s;
            traj.records.push(record(t0, &y)?);
            let thrust_n = thrust.at(t0);
            let n_z = command(&y);
            let y0 = y.clone();
            dp.advance(
                &mut |t, y: &[f64], out: &mut [f64]| deriv(t, y, out, thrust_n, n_z),
                &mut y,
                t0,
                t1,
            )?;
            k += 1;
            let (r1, rdot1) = geometry(&y);
            if rdot < 0.0 && rdot1 >= 0.0 {
                let peek = |t: f64| -> Result<Vec<f64>> {
                    let mut yy = y0.clone();
                    if t > t0 {
                        DormandPrince::new(setup.integrator).advance(
                            &mut |tt, yv: &[f64], out: &mut [f64]| deriv(tt, yv, out, thrust_n, n_z),
                            &mut yy,
                            t0,
                            t,
                        )?;
                    }
                    Ok(yy)
                };
                let t_star = bisect(|t| Ok(geometry(&peek(t)?).1), t0, t1)?;
                let r_star = geometry(&peek(t_star)?).0;
                return Ok((r_star.min(r).min(r1), t_star));
            }
            r = r1;
            rdot = rdot1;
        }
        traj.records.push(record(k as f64 * t_s, &y)?);
        Ok((r, k as f64 * t_s))
    })();
    match outcome {
        Ok((miss, t)) => Ok(EngagementResult {
            trajectory: traj,
            miss_distance: miss,
            flight_time: t,
            intercepted: miss < g.miss_threshold_m,
        }),
        Err(error) => Err(Aborted {
            t: k as f64 * t_s,
            error,
            trajectory: traj,
        }),
    }
}
