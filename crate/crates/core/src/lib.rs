//! Planar missile flight simulation with a three-loop autopilot, retrospective
//! cost adaptive augmentation, particle-swarm hyperparameter tuning, and
//! proportional-navigation engagements.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airframe;
pub mod autopilot;
pub mod environment;
pub mod error;
pub mod guidance;
pub mod linearize;
pub mod pso;
pub mod rcac;
pub mod scenario;
pub mod simcore;

pub use error::{Result, SimError};
