//! ODE integration and the sampled-data closed-loop driver.

pub mod closed_loop;
pub mod integrator;

pub use closed_loop::{
    run_closed_loop, AdaptiveConfig, ClosedLoop, ControllerConfig, EngagementSample, Exogenous, LoopConfig, Record,
    TimeCommand, Trajectory, ZTap,
};
pub use integrator::{integrate_fixed, integrate_interval, DormandPrince, IntegratorConfig};
