//! Particle swarm search and the adaptive-controller tuning objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environment::GRAVITY;
use crate::error::{Result, SimError};
use crate::simcore::Trajectory;

/// Pitch-acceleration allowance in the tuning cost: 3 deg/s².
pub const Q_DOT_MAX: f64 = 3.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    /// `(lo, hi)` per searched dimension.
    pub bounds: Vec<(f64, f64)>,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 20,
            iterations: 50,
            bounds: HyperBounds::default().to_vec(),
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(SimError::config("swarm_size must be at least 1"));
        }
        if self.bounds.is_empty() {
            return Err(SimError::config("at least one search dimension is required"));
        }
        for (i, (lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(SimError::config(format!("bounds[{i}] must satisfy lo < hi")));
            }
        }
        Ok(())
    }
}

/// Search box for `(R_u, log10 R_θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperBounds {
    pub r_u: (f64, f64),
    pub log10_r_theta: (f64, f64),
}

impl Default for HyperBounds {
    fn default() -> Self {
        Self {
            r_u: (0.0, 20.0),
            log10_r_theta: (0.0, 15.0),
        }
    }
}

impl HyperBounds {
    pub fn to_vec(self) -> Vec<(f64, f64)> {
        vec![self.r_u, self.log10_r_theta]
    }
}

/// Mean per-sample tuning cost of a closed-loop run.
pub fn pso_cost(traj: &Trajectory) -> Result<f64> {
    pso_cost_samples(traj.records.iter().map(|r| (r.z, r.q_dot)))
}

/// Same cost from raw `(z, q̇)` samples.
pub fn pso_cost_samples(samples: impl IntoIterator<Item = (f64, f64)>) -> Result<f64> {
    let mut n = 0usize;
    let mut sum = 0.0;
    for (z, q_dot) in samples {
        sum += 2.0 / GRAVITY * z.abs() + 0.2 * (q_dot.abs() - Q_DOT_MAX).max(0.0);
        n += 1;
    }
    if n == 0 {
        return Err(SimError::config("tuning cost needs at least one sample"));
    }
    Ok(sum / n as f64)
}

/// Square-wave training command, m/s². `sign(0)` is taken as 0.
pub fn training_command(t: f64) -> f64 {
    let s = (0.3 * t).sin();
    let sign = if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    };
    0.5 * GRAVITY - 8.0 * GRAVITY * sign
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub iteration: usize,
    pub best_position: Vec<f64>,
    pub best_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub iteration: usize,
    pub particle: usize,
    pub position: Vec<f64>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoResult {
    pub best_position: Vec<f64>,
    pub best_cost: f64,
    /// Global best after the initial evaluation and after every iteration.
    pub history: Vec<IterationSummary>,
    pub evaluations: Vec<Evaluation>,
}

/// Global-best particle swarm minimization of `objective` over the box.
///
/// Random draws happen sequentially on a seeded generator; particle costs are
/// evaluated in parallel and reduced in particle order, so the result depends
/// only on the seed.
pub fn optimize<F>(objective: F, cfg: &PsoConfig) -> Result<PsoResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let dim = cfg.bounds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x: Vec<Vec<f64>> = (0..cfg.swarm_size)
        .map(|_| cfg.bounds.iter().map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..cfg.swarm_size)
        .map(|_| {
            cfg.bounds
                .iter()
                .map(|(lo, hi)| 0.1 * (hi - lo) * rng.gen_range(-1.0..1.0))
                .collect()
        })
        .collect();

    let evaluate = |positions: &[Vec<f64>]| -> Vec<f64> {
        positions
            .par_iter()
            .map(|p| {
                let c = objective(p);
                if c.is_finite() {
                    c
                } else {
                    log::warn!("objective returned {c} at {p:?}; treating as +inf");
                    f64::INFINITY
                }
            })
            .collect()
    };

    let mut evaluations = Vec::new();
    let costs = evaluate(&x);
    let mut p_best = x.clone();
    let mut p_cost = costs.clone();
    let (mut g_best, mut g_cost) = (x[0].clone(), f64::INFINITY);
    for (i, c) in costs.iter().enumerate() {
        evaluations.push(Evaluation {
            iteration: 0,
            particle: i,
            position: x[i].clone(),
            cost: *c,
        });
        if *c < g_cost {
            g_cost = *c;
            g_best = x[i].clone();
        }
    }
    let mut history = vec![IterationSummary {
        iteration: 0,
        best_position: g_best.clone(),
        best_cost: g_cost,
    }];

    for it in 1..=cfg.iterations {
        for i in 0..cfg.swarm_size {
            for d in 0..dim {
                let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
                v[i][d] = cfg.inertia * v[i][d]
                    + cfg.cognitive * r1 * (p_best[i][d] - x[i][d])
                    + cfg.social * r2 * (g_best[d] - x[i][d]);
                x[i][d] += v[i][d];
                let (lo, hi) = cfg.bounds[d];
                if x[i][d] < lo || x[i][d] > hi {
                    x[i][d] = x[i][d].clamp(lo, hi);
                    v[i][d] = 0.0;
                }
            }
        }
        let costs = evaluate(&x);
        for (i, c) in costs.iter().enumerate() {
            evaluations.push(Evaluation {
                iteration: it,
                particle: i,
                position: x[i].clone(),
                cost: *c,
            });
            if *c < p_cost[i] {
                p_cost[i] = *c;
                p_best[i] = x[i].clone();
            }
            if *c < g_cost {
                g_cost = *c;
                g_best = x[i].clone();
            }
        }
        history.push(IterationSummary {
            iteration: it,
            best_position: g_best.clone(),
            best_cost: g_cost,
        });
    }
    Ok(PsoResult {
        best_position: g_best,
        best_cost: g_cost,
        history,
        evaluations,
    })
}
