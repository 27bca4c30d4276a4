//! Scenario configuration, experiment orchestration and artifact emission.
//!
//! A scenario file is JSON. Physical quantities carry their unit in the key
//! name (`gamma_deg`, `h_m`, `sample_time_s`) and unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airframe::{CoefficientGroup, MissileParams, MissileState};
use crate::autopilot::{scale_gains_masked, GainMask, TlaGains};
use crate::environment::GRAVITY;
use crate::error::{Result, SimError};
use crate::guidance::{run_engagement, EngagementInit, EngagementSetup, GuidanceConfig, PursuerKind, ThrustProfile};
use crate::linearize::{FilterOptions, StateSet};
use crate::pso::{optimize, pso_cost, training_command, HyperBounds, IterationSummary, PsoConfig};
use crate::rcac::RcacConfig;
use crate::simcore::closed_loop::{Aborted, Plant};
use crate::simcore::{
    run_closed_loop, AdaptiveConfig, ControllerConfig, IntegratorConfig, LoopConfig, TimeCommand, Trajectory, ZTap,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Constant acceleration command.
    Step,
    /// Sinusoidal acceleration command.
    Harmonic,
    Intercept,
    Sweep,
    /// PSO search over the adaptive hyperparameters.
    Tune,
}

/// Initial airframe state for the step, harmonic and tuning runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlightInit {
    pub mach: f64,
    pub gamma_deg: f64,
    pub theta_deg: f64,
    pub q_deg_s: f64,
    pub h_m: f64,
    pub x_m: f64,
}

impl Default for FlightInit {
    fn default() -> Self {
        Self {
            mach: 2.5,
            gamma_deg: 45.0,
            theta_deg: 45.0,
            q_deg_s: 0.0,
            h_m: 3500.0,
            x_m: 0.0,
        }
    }
}

impl FlightInit {
    pub fn to_state(&self) -> MissileState {
        MissileState {
            mach: self.mach,
            gamma: self.gamma_deg.to_radians(),
            theta: self.theta_deg.to_radians(),
            q: self.q_deg_s.to_radians(),
            h: self.h_m,
            x: self.x_m,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngagementInitConfig {
    pub pursuer_mach: f64,
    pub pursuer_gamma_deg: f64,
    pub pursuer_h_m: f64,
    pub evader_mach: f64,
    pub evader_gamma_deg: f64,
    pub evader_h_m: f64,
    pub evader_ahead_m: f64,
}

impl Default for EngagementInitConfig {
    fn default() -> Self {
        Self {
            pursuer_mach: 0.5,
            pursuer_gamma_deg: 0.0,
            pursuer_h_m: 3000.0,
            evader_mach: 0.85,
            evader_gamma_deg: 15.0,
            evader_h_m: 4000.0,
            evader_ahead_m: 1000.0,
        }
    }
}

impl EngagementInitConfig {
    pub fn to_init(&self) -> EngagementInit {
        EngagementInit {
            pursuer_mach: self.pursuer_mach,
            pursuer_gamma: self.pursuer_gamma_deg.to_radians(),
            pursuer_h: self.pursuer_h_m,
            evader_mach: self.evader_mach,
            evader_gamma: self.evader_gamma_deg.to_radians(),
            evader_h: self.evader_h_m,
            evader_ahead: self.evader_ahead_m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommandConfig {
    pub step_g: f64,
    pub harmonic_amplitude_g: f64,
    pub harmonic_freq_rad_s: f64,
}

impl Default for CommandConfig {
    fn default() -> Self {
        Self {
            step_g: 10.0,
            harmonic_amplitude_g: 10.0,
            harmonic_freq_rad_s: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AutopilotConfig {
    pub gains: TlaGains,
    /// Common factor applied to the gains selected by `gain_mask`.
    pub alpha_tla: f64,
    pub gain_mask: GainMask,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fin_limit_deg: Option<f64>,
}

impl Default for AutopilotConfig {
    fn default() -> Self {
        Self {
            gains: TlaGains::default(),
            alpha_tla: 1.0,
            gain_mask: GainMask::default(),
            fin_limit_deg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptiveSection {
    pub n_c: usize,
    pub r_z: f64,
    pub r_u: f64,
    pub log10_r_theta: f64,
    pub lambda: f64,
    pub theta_0: Vec<f64>,
    pub linearization_states: StateSet,
    pub include_complex_zeros: bool,
    pub z_tap: ZTap,
}

impl Default for AdaptiveSection {
    fn default() -> Self {
        let r = RcacConfig::default();
        Self {
            n_c: r.n_c,
            r_z: r.r_z,
            r_u: r.r_u,
            log10_r_theta: 14.398,
            lambda: r.lambda,
            theta_0: r.theta_0,
            linearization_states: StateSet::default(),
            include_complex_zeros: false,
            z_tap: ZTap::default(),
        }
    }
}

impl AdaptiveSection {
    pub fn to_adaptive(&self) -> AdaptiveConfig {
        AdaptiveConfig {
            rcac: RcacConfig {
                n_c: self.n_c,
                r_z: self.r_z,
                r_u: self.r_u,
                r_theta: 10f64.powf(self.log10_r_theta),
                lambda: self.lambda,
                theta_0: self.theta_0.clone(),
            },
            linearization_states: self.linearization_states,
            filter: FilterOptions {
                include_complex: self.include_complex_zeros,
            },
            z_tap: self.z_tap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub sample_time_s: f64,
    /// Defaults to 10 s for step and harmonic runs, 30 s for engagements and 20 s for tuning.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            sample_time_s: LoopConfig::default().t_s,
            duration_s: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub min_step_s: f64,
    pub max_step_s: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        Self {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            min_step_s: d.min_step,
            max_step_s: d.max_step,
        }
    }
}

impl IntegratorSection {
    pub fn to_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            min_step: self.min_step_s,
            max_step: self.max_step_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    /// Autopilot gain scaling.
    AlphaTla,
    /// Aerodynamic coefficient scaling.
    AlphaX,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub target: SweepTarget,
    /// Experiment repeated at each point. Defaults to `step` for gain sweeps and `intercept` otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<ScenarioKind>,
    pub alpha_tla_values: Vec<f64>,
    pub alpha_x_kinds: Vec<CoefficientGroup>,
    pub alpha_x_factors: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            target: SweepTarget::AlphaX,
            base: None,
            alpha_tla_values: vec![0.2, 0.5, 1.0],
            alpha_x_kinds: vec![CoefficientGroup::FinDeflection, CoefficientGroup::AngleOfAttack],
            alpha_x_factors: vec![0.2, 0.65, 1.1, 1.55, 2.0],
        }
    }
}

impl SweepConfig {
    pub fn base_kind(&self) -> ScenarioKind {
        self.base.unwrap_or(match self.target {
            SweepTarget::AlphaTla => ScenarioKind::Step,
            SweepTarget::AlphaX => ScenarioKind::Intercept,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuneConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub bounds: HyperBounds,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for TuneConfig {
    fn default() -> Self {
        let p = PsoConfig::default();
        Self {
            swarm_size: p.swarm_size,
            iterations: p.iterations,
            bounds: HyperBounds::default(),
            inertia: p.inertia,
            cognitive: p.cognitive,
            social: p.social,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    /// Controllers to run. Defaults to ideal, fixed and adaptive for
    /// engagements and fixed and adaptive otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variants: Option<Vec<PursuerKind>>,
    #[serde(default)]
    pub initial: FlightInit,
    #[serde(default)]
    pub engagement: EngagementInitConfig,
    /// Defaults to a constant 3800 N, or the boost-sustain profile for engagements.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thrust: Option<ThrustProfile>,
    #[serde(default)]
    pub command: CommandConfig,
    #[serde(default)]
    pub airframe: MissileParams,
    #[serde(default)]
    pub autopilot: AutopilotConfig,
    #[serde(default)]
    pub adaptive: AdaptiveSection,
    #[serde(default)]
    pub guidance: GuidanceConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub tune: TuneConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        Self {
            scenario,
            variants: None,
            initial: FlightInit::default(),
            engagement: EngagementInitConfig::default(),
            thrust: None,
            command: CommandConfig::default(),
            airframe: MissileParams::default(),
            autopilot: AutopilotConfig::default(),
            adaptive: AdaptiveSection::default(),
            guidance: GuidanceConfig::default(),
            simulation: SimulationConfig::default(),
            integrator: IntegratorSection::default(),
            sweep: SweepConfig::default(),
            tune: TuneConfig::default(),
            output: OutputConfig::default(),
            seed: 0,
        }
    }

    /// Experiment actually simulated per run: the sweep base for sweeps.
    pub fn run_kind(&self) -> ScenarioKind {
        match self.scenario {
            ScenarioKind::Sweep => self.sweep.base_kind(),
            k => k,
        }
    }

    fn engaging(&self) -> bool {
        self.run_kind() == ScenarioKind::Intercept
    }

    pub fn variants(&self) -> Vec<PursuerKind> {
        match &self.variants {
            Some(v) => v.clone(),
            None if self.engaging() && self.scenario == ScenarioKind::Intercept => {
                vec![PursuerKind::Ideal, PursuerKind::Fixed, PursuerKind::Adaptive]
            }
            None => vec![PursuerKind::Fixed, PursuerKind::Adaptive],
        }
    }

    pub fn thrust_profile(&self) -> ThrustProfile {
        match &self.thrust {
            Some(t) => t.clone(),
            None if self.engaging() => ThrustProfile::boost_sustain(),
            None => ThrustProfile::constant(3800.0),
        }
    }

    pub fn loop_config(&self) -> LoopConfig {
        let default = match self.run_kind() {
            ScenarioKind::Intercept => 30.0,
            ScenarioKind::Tune => 20.0,
            _ => 10.0,
        };
        LoopConfig {
            t_s: self.simulation.sample_time_s,
            t_final: self.simulation.duration_s.unwrap_or(default),
        }
    }

    pub fn controller(&self, alpha_tla: f64, adaptive: bool) -> ControllerConfig {
        ControllerConfig {
            gains: scale_gains_masked(&self.autopilot.gains, alpha_tla, &self.autopilot.gain_mask),
            adaptive,
            adaptive_config: self.adaptive.to_adaptive(),
            fin_limit: self.autopilot.fin_limit_deg.map(f64::to_radians),
        }
    }

    pub fn pso_config(&self) -> PsoConfig {
        PsoConfig {
            swarm_size: self.tune.swarm_size,
            iterations: self.tune.iterations,
            bounds: self.tune.bounds.to_vec(),
            inertia: self.tune.inertia,
            cognitive: self.tune.cognitive,
            social: self.tune.social,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.airframe.validate()?;
        self.thrust_profile().validate()?;
        self.loop_config().validate()?;
        self.integrator.to_config().validate()?;
        self.adaptive.to_adaptive().rcac.validate()?;
        positive("autopilot.alpha_tla", self.autopilot.alpha_tla)?;
        if let Some(limit) = self.autopilot.fin_limit_deg {
            positive("autopilot.fin_limit_deg", limit)?;
        }
        positive("guidance.lambda_pn", self.guidance.lambda_pn)?;
        positive("guidance.miss_threshold_m", self.guidance.miss_threshold_m)?;
        positive("initial.mach", self.initial.mach)?;
        positive("engagement.pursuer_mach", self.engagement.pursuer_mach)?;
        positive("engagement.evader_mach", self.engagement.evader_mach)?;

        let variants = self.variants();
        if variants.is_empty() {
            return Err(SimError::config("variants must not be empty"));
        }
        if !self.engaging() && variants.contains(&PursuerKind::Ideal) {
            return Err(SimError::config("the ideal variant only applies to intercept runs"));
        }
        match self.scenario {
            ScenarioKind::Sweep => {
                let base = self.sweep.base_kind();
                if !matches!(
                    base,
                    ScenarioKind::Step | ScenarioKind::Harmonic | ScenarioKind::Intercept
                ) {
                    return Err(SimError::config("sweep.base must be step, harmonic or intercept"));
                }
                let points = match self.sweep.target {
                    SweepTarget::AlphaTla => &self.sweep.alpha_tla_values,
                    SweepTarget::AlphaX => {
                        if self.sweep.alpha_x_kinds.is_empty() {
                            return Err(SimError::config("sweep.alpha_x_kinds must not be empty"));
                        }
                        &self.sweep.alpha_x_factors
                    }
                };
                if points.is_empty() {
                    return Err(SimError::config("sweep factor list must not be empty"));
                }
                for &f in points {
                    positive("sweep factor", f)?;
                }
            }
            ScenarioKind::Tune => self.pso_config().validate()?,
            _ => {}
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::config(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Parses and validates a JSON scenario.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    if text.trim().is_empty() {
        return Err(SimError::config("empty configuration; required keys: scenario"));
    }
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| SimError::config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        SimError::Config(msg) => SimError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn to_json(cfg: &ScenarioConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("configuration serializes")
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub alpha_tla: Option<f64>,
    pub adaptive: Option<bool>,
    pub seed: Option<u64>,
    pub t_s: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) -> Result<()> {
        if let Some(a) = self.alpha_tla {
            cfg.autopilot.alpha_tla = a;
        }
        if let Some(on) = self.adaptive {
            let (from, to) = if on {
                (PursuerKind::Fixed, PursuerKind::Adaptive)
            } else {
                (PursuerKind::Adaptive, PursuerKind::Fixed)
            };
            let mut v: Vec<PursuerKind> = Vec::new();
            for k in cfg.variants() {
                let k = if k == from { to } else { k };
                if !v.contains(&k) {
                    v.push(k);
                }
            }
            cfg.variants = Some(v);
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.t_s {
            cfg.simulation.sample_time_s = t;
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        cfg.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// `alpha_tla`, `fin_deflection` or `angle_of_attack`.
    pub parameter: String,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub variant: PursuerKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepPoint>,
    pub trajectory_file: String,
    pub completed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Simulated time reached, s.
    pub end_time_s: f64,
    pub mean_abs_z_m_s2: f64,
    pub max_abs_q_dot_rad_s2: f64,
    pub final_theta: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub miss_distance_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flight_time_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intercepted: Option<bool>,
    /// Smallest logged range; for aborted engagements this is the closest the run got.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_range_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneSummary {
    pub best_r_u: f64,
    pub best_log10_r_theta: f64,
    pub best_cost: f64,
    pub seed: u64,
    pub evaluations: usize,
    pub history: Vec<IterationSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: ScenarioKind,
    pub runs: Vec<RunSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tune: Option<TuneSummary>,
}

impl Summary {
    pub fn all_completed(&self) -> bool {
        self.runs.iter().all(|r| r.completed)
    }
}

/// In-memory result of [`run_scenario`]; trajectories align with `summary.runs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub summary: Summary,
    pub trajectories: Vec<Trajectory>,
}

struct RunSpec {
    label: String,
    variant: PursuerKind,
    sweep: Option<SweepPoint>,
    alpha_tla: f64,
    params: MissileParams,
}

fn factor_label(f: f64) -> String {
    format!("{f}").replace('-', "m")
}

fn variant_label(v: PursuerKind) -> &'static str {
    match v {
        PursuerKind::Ideal => "ideal",
        PursuerKind::Fixed => "fixed",
        PursuerKind::Adaptive => "adaptive",
    }
}

fn group_label(g: CoefficientGroup) -> &'static str {
    match g {
        CoefficientGroup::FinDeflection => "fin_deflection",
        CoefficientGroup::AngleOfAttack => "angle_of_attack",
    }
}

fn kind_label(k: ScenarioKind) -> &'static str {
    match k {
        ScenarioKind::Step => "step",
        ScenarioKind::Harmonic => "harmonic",
        ScenarioKind::Intercept => "intercept",
        ScenarioKind::Sweep => "sweep",
        ScenarioKind::Tune => "tune",
    }
}

fn run_specs(cfg: &ScenarioConfig) -> Vec<RunSpec> {
    let variants = cfg.variants();
    let alpha = cfg.autopilot.alpha_tla;
    let mut specs = Vec::new();
    match cfg.scenario {
        ScenarioKind::Sweep => {
            let mut points: Vec<(String, f64, f64, MissileParams)> = Vec::new();
            match cfg.sweep.target {
                SweepTarget::AlphaTla => {
                    for &a in &cfg.sweep.alpha_tla_values {
                        points.push(("alpha_tla".into(), a, a, cfg.airframe));
                    }
                }
                SweepTarget::AlphaX => {
                    for &g in &cfg.sweep.alpha_x_kinds {
                        for &f in &cfg.sweep.alpha_x_factors {
                            points.push((group_label(g).into(), f, alpha, cfg.airframe.scaled(g, f)));
                        }
                    }
                }
            }
            for (parameter, factor, alpha_tla, params) in points {
                for &variant in &variants {
                    specs.push(RunSpec {
                        label: format!("sweep_{parameter}_{}_{}", factor_label(factor), variant_label(variant)),
                        variant,
                        sweep: Some(SweepPoint {
                            parameter: parameter.clone(),
                            factor,
                        }),
                        alpha_tla,
                        params,
                    });
                }
            }
        }
        kind => {
            for &variant in &variants {
                specs.push(RunSpec {
                    label: format!("{}_{}", kind_label(kind), variant_label(variant)),
                    variant,
                    sweep: None,
                    alpha_tla: alpha,
                    params: cfg.airframe,
                });
            }
        }
    }
    specs
}

struct RunResult {
    trajectory: Trajectory,
    error: Option<String>,
    miss: Option<(f64, f64, bool)>,
}

fn run_command(
    cfg: &ScenarioConfig,
    spec: &RunSpec,
    command: impl Fn(f64) -> f64,
) -> std::result::Result<Trajectory, Aborted> {
    let plant = Plant {
        params: spec.params,
        thrust: cfg.thrust_profile(),
        initial: cfg.initial.to_state(),
    };
    let ctrl = cfg.controller(spec.alpha_tla, spec.variant == PursuerKind::Adaptive);
    run_closed_loop(
        &plant,
        &ctrl,
        TimeCommand(command),
        cfg.loop_config(),
        cfg.integrator.to_config(),
    )
}

fn execute_run(cfg: &ScenarioConfig, spec: &RunSpec) -> RunResult {
    let from_loop = |r: std::result::Result<Trajectory, Aborted>| match r {
        Ok(trajectory) => RunResult {
            trajectory,
            error: None,
            miss: None,
        },
        Err(a) => RunResult {
            error: Some(a.to_string()),
            trajectory: a.trajectory,
            miss: None,
        },
    };
    match cfg.run_kind() {
        ScenarioKind::Step => {
            let a = cfg.command.step_g * GRAVITY;
            from_loop(run_command(cfg, spec, move |_| a))
        }
        ScenarioKind::Harmonic => {
            let (a, w) = (
                cfg.command.harmonic_amplitude_g * GRAVITY,
                cfg.command.harmonic_freq_rad_s,
            );
            from_loop(run_command(cfg, spec, move |t| a * (w * t).sin()))
        }
        ScenarioKind::Tune => from_loop(run_command(cfg, spec, training_command)),
        ScenarioKind::Intercept | ScenarioKind::Sweep => {
            let setup = EngagementSetup {
                init: cfg.engagement.to_init(),
                guidance: cfg.guidance,
                thrust: cfg.thrust_profile(),
                params: spec.params,
                controller: cfg.controller(spec.alpha_tla, false),
                loop_cfg: cfg.loop_config(),
                integrator: cfg.integrator.to_config(),
            };
            match run_engagement(&setup, spec.variant) {
                Ok(r) => RunResult {
                    trajectory: r.trajectory,
                    error: None,
                    miss: Some((r.miss_distance, r.flight_time, r.intercepted)),
                },
                Err(a) => RunResult {
                    error: Some(a.to_string()),
                    trajectory: a.trajectory,
                    miss: None,
                },
            }
        }
    }
}

fn summarize(spec: &RunSpec, result: &RunResult) -> RunSummary {
    let traj = &result.trajectory;
    let n = traj.len().max(1) as f64;
    let min_range = traj
        .records
        .iter()
        .filter_map(|r| r.engagement.map(|e| e.range))
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r))));
    RunSummary {
        label: spec.label.clone(),
        variant: spec.variant,
        sweep: spec.sweep.clone(),
        trajectory_file: format!("{}.csv", spec.label),
        completed: result.error.is_none(),
        error: result.error.clone(),
        end_time_s: traj.last().map_or(0.0, |r| r.t),
        mean_abs_z_m_s2: traj.records.iter().map(|r| r.z.abs()).sum::<f64>() / n,
        max_abs_q_dot_rad_s2: traj.records.iter().map(|r| r.q_dot.abs()).fold(0.0, f64::max),
        final_theta: traj.last().map(|r| r.theta.clone()).unwrap_or_default(),
        miss_distance_m: result.miss.map(|m| m.0),
        flight_time_s: result.miss.map(|m| m.1),
        intercepted: result.miss.map(|m| m.2),
        min_range_m: min_range,
    }
}

fn tune(cfg: &ScenarioConfig) -> Result<(TuneSummary, ScenarioConfig)> {
    let pso = cfg.pso_config();
    let objective = |x: &[f64]| -> f64 {
        let mut trial = cfg.clone();
        trial.adaptive.r_u = x[0];
        trial.adaptive.log10_r_theta = x[1];
        let spec = RunSpec {
            label: String::new(),
            variant: PursuerKind::Adaptive,
            sweep: None,
            alpha_tla: cfg.autopilot.alpha_tla,
            params: cfg.airframe,
        };
        match run_command(&trial, &spec, training_command) {
            Ok(traj) => pso_cost(&traj).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };
    let result = optimize(objective, &pso)?;
    let mut best = cfg.clone();
    best.adaptive.r_u = result.best_position[0];
    best.adaptive.log10_r_theta = result.best_position[1];
    Ok((
        TuneSummary {
            best_r_u: result.best_position[0],
            best_log10_r_theta: result.best_position[1],
            best_cost: result.best_cost,
            seed: cfg.seed,
            evaluations: result.evaluations.len(),
            history: result.history,
        },
        best,
    ))
}

/// Runs every (variant, sweep point) of the scenario. Module errors are
/// recorded per run; only configuration errors abort the whole call.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Report> {
    cfg.validate()?;
    let (tune_summary, run_cfg) = if cfg.scenario == ScenarioKind::Tune {
        let (s, best) = tune(cfg)?;
        (Some(s), best)
    } else {
        (None, cfg.clone())
    };
    let specs = if cfg.scenario == ScenarioKind::Tune {
        vec![RunSpec {
            label: "tune_best_adaptive".into(),
            variant: PursuerKind::Adaptive,
            sweep: None,
            alpha_tla: cfg.autopilot.alpha_tla,
            params: cfg.airframe,
        }]
    } else {
        run_specs(cfg)
    };
    let results: Vec<RunResult> = specs.par_iter().map(|s| execute_run(&run_cfg, s)).collect();
    let runs = specs.iter().zip(&results).map(|(s, r)| summarize(s, r)).collect();
    for (s, r) in specs.iter().zip(&results) {
        if let Some(e) = &r.error {
            log::error!("{} ({:?}) failed: {e}", s.label, s.sweep);
        }
    }
    Ok(Report {
        summary: Summary {
            scenario: cfg.scenario,
            runs,
            tune: tune_summary,
        },
        trajectories: results.into_iter().map(|r| r.trajectory).collect(),
    })
}

/// Writes one CSV per run plus `summary.json` into `dir`.
pub fn write_report(report: &Report, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    for (run, traj) in report.summary.runs.iter().zip(&report.trajectories) {
        emit_trajectory(traj, &dir.join(&run.trajectory_file))?;
    }
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&report.summary).map_err(|e| SimError::io(&path, e))?;
    fs::write(&path, text).map_err(|e| SimError::io(&path, e))
}

pub fn trajectory_header(n_theta: usize, engaging: bool) -> Vec<String> {
    let mut h: Vec<String> = [
        "t",
        "mach",
        "V",
        "gamma_rad",
        "theta_rad",
        "q_rad_s",
        "alpha_rad",
        "h_m",
        "X_m",
        "delta_rad",
        "u",
        "u_tla",
        "u_a",
        "a_z_ref",
        "a_z",
        "z",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((1..=n_theta).map(|i| format!("theta_k_{i}")));
    if engaging {
        h.extend(
            ["R_m", "beta_rad", "evader_d_m", "evader_h_m"]
                .iter()
                .map(|s| s.to_string()),
        );
    }
    h
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn emit_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    let engaging = traj.records.iter().any(|r| r.engagement.is_some());
    let mut w = csv::Writer::from_path(path).map_err(|e| SimError::io(path, e))?;
    w.write_record(trajectory_header(traj.n_theta, engaging))
        .map_err(|e| SimError::io(path, e))?;
    for r in &traj.records {
        let s = &r.state;
        let v = s.airspeed().unwrap_or(f64::NAN);
        let mut row: Vec<f64> = vec![
            r.t,
            s.mach,
            v,
            s.gamma,
            s.theta,
            s.q,
            s.theta - s.gamma,
            s.h,
            s.x,
            s.delta,
            r.u,
            r.u_tla,
            r.u_a,
            r.a_z_ref,
            r.imu.a_z,
            r.z,
        ];
        row.extend((0..traj.n_theta).map(|i| r.theta.get(i).copied().unwrap_or(0.0)));
        if engaging {
            let e = r.engagement.unwrap_or(crate::simcore::EngagementSample {
                range: f64::NAN,
                los_angle: f64::NAN,
                evader_d: f64::NAN,
                evader_h: f64::NAN,
            });
            row.extend([e.range, e.los_angle, e.evader_d, e.evader_h]);
        }
        w.write_record(row.into_iter().map(fmt17))
            .map_err(|e| SimError::io(path, e))?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_names_required_keys() {
        let e = parse_config("  \n").unwrap_err();
        assert!(e.to_string().contains("scenario"), "{e}");
        let e = parse_config("{}").unwrap_err();
        assert!(e.to_string().contains("scenario"), "{e}");
    }

    #[test]
    fn minimal_file_echoes_table_values() {
        let cfg = parse_config(r#"{"scenario": "step"}"#).unwrap();
        assert_eq!(cfg.airframe, MissileParams::default());
        assert_eq!(cfg.airframe.mass_kg, 204.0227);
        assert_eq!(cfg.autopilot.gains.k_theta, 15.62474);
        assert_eq!(cfg.initial.to_state().mach, 2.5);
        assert_eq!(cfg.thrust_profile().at(3.0), 3800.0);
        assert_eq!(cfg.loop_config().t_final, 10.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse_config(r#"{"scenario": "step", "gamma": 1}"#).is_err());
        assert!(parse_config(r#"{"scenario": "step", "initial": {"gamma": 1}}"#).is_err());
        assert!(parse_config(r#"{"scenario": "step", "adaptive": {"r_theta": 1}}"#).is_err());
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse_config("{\n \"scenario\": }").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn sweep_defaults() {
        let cfg = parse_config(r#"{"scenario": "sweep"}"#).unwrap();
        assert_eq!(cfg.sweep.alpha_x_factors, vec![0.2, 0.65, 1.1, 1.55, 2.0]);
        assert_eq!(cfg.sweep.alpha_tla_values, vec![0.2, 0.5, 1.0]);
        assert_eq!(cfg.sweep.base_kind(), ScenarioKind::Intercept);
        assert_eq!(run_specs(&cfg).len(), 2 * 5 * 2);
    }

    #[test]
    fn print_config_round_trips() {
        for kind in [
            ScenarioKind::Step,
            ScenarioKind::Intercept,
            ScenarioKind::Sweep,
            ScenarioKind::Tune,
        ] {
            let mut cfg = ScenarioConfig::new(kind);
            cfg.autopilot.fin_limit_deg = Some(30.0);
            cfg.simulation.duration_s = Some(2.5);
            let back = parse_config(&to_json(&cfg)).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn adaptive_override_swaps_variants() {
        let mut cfg = ScenarioConfig::new(ScenarioKind::Intercept);
        Overrides {
            adaptive: Some(false),
            ..Default::default()
        }
        .apply(&mut cfg)
        .unwrap();
        assert_eq!(cfg.variants(), vec![PursuerKind::Ideal, PursuerKind::Fixed]);
        let mut cfg = ScenarioConfig::new(ScenarioKind::Step);
        Overrides {
            adaptive: Some(true),
            ..Default::default()
        }
        .apply(&mut cfg)
        .unwrap();
        assert_eq!(cfg.variants(), vec![PursuerKind::Adaptive]);
    }

    #[test]
    fn ideal_rejected_outside_engagements() {
        let mut cfg = ScenarioConfig::new(ScenarioKind::Step);
        cfg.variants = Some(vec![PursuerKind::Ideal]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn header_width() {
        assert_eq!(trajectory_header(9, false).len(), 16 + 9);
        assert_eq!(trajectory_header(9, true).len(), 16 + 9 + 4);
    }
}
