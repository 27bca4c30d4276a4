//! Sampled-data simulation of the airframe under the three-loop autopilot
//! with optional adaptive augmentation.
//!
//! The continuous state is the airframe, the autopilot integrator, and any
//! exogenous states (for example an evader). At every controller instant
//! `t_k = k t_s` the sensors and the acceleration command are sampled, the
//! adaptive increment `u_a` is recomputed, both are held, and the joint state
//! is integrated to `t_{k+1}`. The autopilot's rate and integral paths stay
//! continuous inside the interval.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::airframe::{evaluate, ImuOutput, MissileParams, MissileState};
use crate::autopilot::{clamp_command, tla_integrand, TlaGains};
use crate::error::{Result, SimError};
use crate::guidance::ThrustProfile;
use crate::linearize::{airframe_model, build_gf, transmission_zeros, FilterOptions, FirFilter, StateSet};
use crate::rcac::{rcac_update, RcacConfig, RcacState};
use crate::simcore::integrator::{DormandPrince, IntegratorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    /// Controller sample time, s.
    pub t_s: f64,
    pub t_final: f64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            t_s: 0.005,
            t_final: 10.0,
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_s > 0.0 && self.t_s.is_finite()) {
            return Err(SimError::config("t_s must be positive"));
        }
        if !(self.t_final >= self.t_s) {
            return Err(SimError::config("t_final must be at least t_s"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.t_s).round() as usize
    }
}

/// Signal fed to the adaptive controller as its performance variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZTap {
    /// `a_z_ref - a_z`.
    #[default]
    Error,
    /// `a_z_ref - K_az a_z`, the signal entering the autopilot's acceleration loop.
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptiveConfig {
    pub rcac: RcacConfig,
    pub linearization_states: StateSet,
    pub filter: FilterOptions,
    pub z_tap: ZTap,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControllerConfig {
    pub gains: TlaGains,
    /// Runs the adaptive augmentation when set.
    pub adaptive: bool,
    pub adaptive_config: AdaptiveConfig,
    /// Symmetric limit on the total fin command, rad.
    pub fin_limit: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngagementSample {
    pub range: f64,
    pub los_angle: f64,
    pub evader_d: f64,
    pub evader_h: f64,
}

/// One logged controller instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: f64,
    pub state: MissileState,
    pub imu: ImuOutput,
    pub a_z_ref: f64,
    /// Total fin command, rad.
    pub u: f64,
    pub u_tla: f64,
    pub u_a: f64,
    /// `a_z_ref - a_z`.
    pub z: f64,
    pub q_dot: f64,
    pub theta: Vec<f64>,
    pub engagement: Option<EngagementSample>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    /// Length of the logged gain vectors.
    pub n_theta: usize,
    pub records: Vec<Record>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    pub fn series(&self, f: impl Fn(&Record) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    /// Mean of `|f|` over records with `t` in `[t0, t1]`.
    pub fn mean_abs_between(&self, t0: f64, t1: f64, f: impl Fn(&Record) -> f64) -> f64 {
        let v: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.t >= t0 - 1e-12 && r.t <= t1 + 1e-12)
            .map(|r| f(r).abs())
            .collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    }
}

/// Source of the acceleration command and of any states integrated with the airframe.
pub trait Exogenous {
    fn dim(&self) -> usize {
        0
    }

    fn initial(&self) -> Vec<f64> {
        Vec::new()
    }

    fn reference(&self, t: f64, missile: &MissileState, extra: &[f64]) -> Result<f64>;

    fn derivative(&self, _t: f64, _extra: &[f64], _out: &mut [f64]) -> Result<()> {
        Ok(())
    }

    fn sample(&self, _t: f64, _missile: &MissileState, _extra: &[f64]) -> Option<EngagementSample> {
        None
    }
}

/// Acceleration command given as a function of time.
pub struct TimeCommand<F>(pub F);

impl<F: Fn(f64) -> f64> Exogenous for TimeCommand<F> {
    fn reference(&self, t: f64, _missile: &MissileState, _extra: &[f64]) -> Result<f64> {
        Ok((self.0)(t))
    }
}

/// A run that stopped early, with everything logged up to the failure.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("run aborted at t = {t}: {error}")]
pub struct Aborted {
    pub t: f64,
    pub error: SimError,
    pub trajectory: Trajectory,
}

/// Inputs held constant over one controller interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Held {
    pub u_a: f64,
    pub thrust: f64,
    pub a_z_ref: f64,
}

const MISSILE: usize = MissileState::DIM;
const INTEGRATOR: usize = MissileState::DIM;
const EXTRA: usize = MissileState::DIM + 1;

/// Stepwise closed-loop simulation.
pub struct ClosedLoop<E> {
    params: MissileParams,
    thrust: ThrustProfile,
    ctrl: ControllerConfig,
    loop_cfg: LoopConfig,
    integ_cfg: IntegratorConfig,
    exo: E,
    integrator: DormandPrince,
    rcac: Option<RcacState>,
    filter: Option<FirFilter>,
    filter_fallbacks: usize,
    y: Vec<f64>,
    k: usize,
    held: Held,
    trajectory: Trajectory,
}

impl<E: Exogenous> ClosedLoop<E> {
    pub fn new(
        params: MissileParams,
        thrust: ThrustProfile,
        initial: MissileState,
        ctrl: ControllerConfig,
        exo: E,
        loop_cfg: LoopConfig,
        integ_cfg: IntegratorConfig,
    ) -> Result<Self> {
        params.validate()?;
        loop_cfg.validate()?;
        integ_cfg.validate()?;
        let rcac = if ctrl.adaptive {
            Some(RcacState::new(&ctrl.adaptive_config.rcac)?)
        } else {
            ctrl.adaptive_config.rcac.validate()?;
            None
        };
        let mut y = initial.to_array().to_vec();
        y.push(0.0);
        let extra = exo.initial();
        if extra.len() != exo.dim() {
            return Err(SimError::config("exogenous initial state has the wrong length"));
        }
        y.extend(extra);
        Ok(Self {
            params,
            thrust,
            integrator: DormandPrince::new(integ_cfg),
            trajectory: Trajectory {
                n_theta: ctrl.adaptive_config.rcac.n_theta(),
                records: Vec::new(),
            },
            ctrl,
            loop_cfg,
            integ_cfg,
            exo,
            rcac,
            filter: None,
            filter_fallbacks: 0,
            y,
            k: 0,
            held: Held {
                u_a: 0.0,
                thrust: 0.0,
                a_z_ref: 0.0,
            },
        })
    }

    pub fn time(&self) -> f64 {
        self.k as f64 * self.loop_cfg.t_s
    }

    pub fn step_index(&self) -> usize {
        self.k
    }

    pub fn state_vector(&self) -> &[f64] {
        &self.y
    }

    pub fn missile(&self) -> MissileState {
        MissileState::from_slice(&self.y[..MISSILE])
    }

    pub fn extra(&self) -> &[f64] {
        &self.y[EXTRA..]
    }

    pub fn exogenous(&self) -> &E {
        &self.exo
    }

    pub fn held(&self) -> Held {
        self.held
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.trajectory
    }

    /// Most recent target filter, if the adaptive path is active.
    pub fn filter(&self) -> Option<&FirFilter> {
        self.filter.as_ref()
    }

    /// Controller steps at which linearization failed and the previous filter was reused.
    pub fn filter_fallbacks(&self) -> usize {
        self.filter_fallbacks
    }

    pub fn rcac_state(&self) -> Option<&RcacState> {
        self.rcac.as_ref()
    }

    fn refresh_filter(&mut self, state: &MissileState, thrust: f64, fin: f64) -> Result<()> {
        let ad = &self.ctrl.adaptive_config;
        let built = airframe_model(state, thrust, fin, &self.params, ad.linearization_states).and_then(|m| {
            let zeros = transmission_zeros(&m)?;
            build_gf(&zeros, &m, self.loop_cfg.t_s, ad.filter)
        });
        match built {
            Ok(f) => {
                self.filter = Some(f);
                Ok(())
            }
            Err(e) if self.filter.is_some() => {
                log::debug!("filter rebuild failed at t = {}: {e}; reusing previous", self.time());
                self.filter_fallbacks += 1;
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    /// Samples sensors, updates the controller, and logs the current instant.
    pub fn control(&mut self) -> Result<()> {
        let t = self.time();
        let state = self.missile();
        let integrator = self.y[INTEGRATOR];
        let thrust = self.thrust.at(t);
        let gains = self.ctrl.gains;
        let eval = evaluate(&state, thrust, 0.0, &self.params)?;
        let a_z = eval.imu.a_z;
        let a_z_ref = self.exo.reference(t, &state, self.extra())?;
        let z = a_z_ref - a_z;
        let u_tla = gains.k_q * state.q + integrator;

        let mut u_a = 0.0;
        let mut theta = vec![0.0; self.trajectory.n_theta];
        if self.rcac.is_some() {
            let fin = u_tla + self.held.u_a;
            self.refresh_filter(&state, thrust, fin)?;
            let ad = &self.ctrl.adaptive_config;
            let z_in = match ad.z_tap {
                ZTap::Error => z,
                ZTap::Weighted => a_z_ref - gains.k_az * a_z,
            };
            let filter = self.filter.as_ref().expect("filter built above");
            let rcac = self.rcac.as_mut().expect("adaptive state present");
            u_a = rcac_update(rcac, &ad.rcac, z_in, filter)?.u;
            theta.copy_from_slice(rcac.theta().as_slice());
        }
        let u = clamp_command(u_tla + u_a, self.ctrl.fin_limit);
        if !u.is_finite() {
            return Err(SimError::NonFinite(format!("fin command at t = {t}")));
        }
        self.held = Held { u_a, thrust, a_z_ref };
        self.trajectory.records.push(Record {
            t,
            state,
            imu: eval.imu,
            a_z_ref,
            u,
            u_tla,
            u_a,
            z,
            q_dot: eval.derivative.q,
            theta,
            engagement: self.exo.sample(t, &state, self.extra()),
        });
        Ok(())
    }

    /// Integrates `y` from `t0` to `t1` under the currently held inputs.
    fn propagate(&self, integrator: &mut DormandPrince, y: &mut [f64], t0: f64, t1: f64) -> Result<()> {
        let held = self.held;
        let gains = self.ctrl.gains;
        let limit = self.ctrl.fin_limit;
        let params = &self.params;
        let exo = &self.exo;
        let mut f = |t: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
            let s = MissileState::from_slice(&y[..MISSILE]);
            let u = clamp_command(gains.k_q * s.q + y[INTEGRATOR] + held.u_a, limit);
            let ev = evaluate(&s, held.thrust, u, params)?;
            out[..MISSILE].copy_from_slice(&ev.derivative.to_array());
            out[INTEGRATOR] = tla_integrand(&gains, s.q, ev.imu.a_z, held.a_z_ref);
            exo.derivative(t, &y[EXTRA..], &mut out[EXTRA..])
        };
        integrator.advance(&mut f, y, t0, t1)
    }

    /// Integrates to the next controller instant.
    pub fn advance(&mut self) -> Result<()> {
        let t0 = self.time();
        let t1 = (self.k + 1) as f64 * self.loop_cfg.t_s;
        let mut y = self.y.clone();
        let mut integrator = self.integrator.clone();
        self.propagate(&mut integrator, &mut y, t0, t1)?;
        self.integrator = integrator;
        self.y = y;
        self.k += 1;
        Ok(())
    }

    /// Integrates `y0` from `t0` to `t` under the currently held inputs, leaving the simulation untouched.
    pub fn propagate_from(&self, y0: &[f64], t0: f64, t: f64) -> Result<Vec<f64>> {
        let mut y = y0.to_vec();
        if t > t0 {
            let mut integrator = DormandPrince::new(self.integ_cfg);
            self.propagate(&mut integrator, &mut y, t0, t)?;
        }
        Ok(y)
    }

    /// Runs `control` then `advance`.
    pub fn step(&mut self) -> Result<()> {
        self.control()?;
        self.advance()
    }

    /// Runs to `t_final`, logging every instant including the last.
    pub fn run(mut self) -> std::result::Result<Trajectory, Aborted> {
        let n = self.loop_cfg.steps();
        let result = (|| {
            while self.k < n {
                self.step()?;
            }
            self.control()
        })();
        match result {
            Ok(()) => Ok(self.trajectory),
            Err(error) => Err(Aborted {
                t: self.time(),
                error,
                trajectory: self.trajectory,
            }),
        }
    }
}

/// Airframe model, thrust schedule and initial condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub params: MissileParams,
    pub thrust: ThrustProfile,
    pub initial: MissileState,
}

/// Simulates the closed loop from `plant.initial` over `[0, t_final]`.
pub fn run_closed_loop<E: Exogenous>(
    plant: &Plant,
    ctrl: &ControllerConfig,
    command: E,
    loop_cfg: LoopConfig,
    integ_cfg: IntegratorConfig,
) -> std::result::Result<Trajectory, Aborted> {
    let sim = ClosedLoop::new(
        plant.params,
        plant.thrust.clone(),
        plant.initial,
        ctrl.clone(),
        command,
        loop_cfg,
        integ_cfg,
    )
    .map_err(|error| Aborted {
        t: 0.0,
        error,
        trajectory: Trajectory::default(),
    })?;
    sim.run()
}
