//! Physics-informed trajectory planner.
//!
//! A sine network represents the whole trajectory `τ ↦ (x, y, vx, vy, ux,
//! uy)`. Training minimizes a weighted sum of the dynamics residual at random
//! collocation times, the endpoint mismatch, and a trajectory-quality
//! objective (control energy, control rate, barrier potential).

mod loss;
mod train;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use loss::{residuals, trapezoid_grid, LossBreakdown, LossProblem, Multipliers};
pub use train::{train, train_with};

use crate::diffnet::mlp::{batch_forward, forward_with_dt, ParamVector};
use crate::dynamics::{Control, State};
use crate::environment::Scenario;
use crate::error::{Error, Result};
use crate::trajectory::{Sample, TrajectoryRecord};

pub(crate) const X: usize = 0;
pub(crate) const Y: usize = 1;
pub(crate) const VX: usize = 2;
pub(crate) const VY: usize = 3;
pub(crate) const UX: usize = 4;
pub(crate) const UY: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossWeights {
    pub lambda_phys: f64,
    pub lambda_bc: f64,
    pub lambda_obj: f64,
    /// Control energy weight inside the objective.
    pub alpha: f64,
    /// Control-rate (smoothness) weight inside the objective.
    pub beta: f64,
    /// Barrier weight inside the objective.
    pub gamma: f64,
    /// Flight-time weight. `T` is fixed during training, so `δ·T` is a
    /// constant: it is reported but contributes no gradient.
    pub delta: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { lambda_phys: 1.0, lambda_bc: 10.0, lambda_obj: 0.1, alpha: 0.01, beta: 0.001, gamma: 0.1, delta: 0.0 }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda_phys, self.lambda_bc, self.lambda_obj, self.alpha, self.beta, self.gamma, self.delta];
        if all.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("loss weights must be finite and non-negative".into()));
        }
        if self.lambda_phys == 0.0 && self.lambda_bc == 0.0 && self.lambda_obj == 0.0 {
            return Err(Error::InvalidArgument("at least one of the lambda weights must be positive".into()));
        }
        Ok(())
    }
}

/// Linear ramp of the physics and objective multipliers from `start` to 1
/// over the first `ramp_fraction` of training, then held at 1. The boundary
/// weight is never ramped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurriculumSchedule {
    pub start: f64,
    pub ramp_fraction: f64,
}

impl Default for CurriculumSchedule {
    fn default() -> Self {
        Self { start: 0.1, ramp_fraction: 0.5 }
    }
}

impl CurriculumSchedule {
    pub const NONE: CurriculumSchedule = CurriculumSchedule { start: 1.0, ramp_fraction: 0.0 };

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.start) || !(0.0..=1.0).contains(&self.ramp_fraction) {
            return Err(Error::InvalidArgument("curriculum start and ramp_fraction must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn multipliers(&self, epoch: usize, epochs: usize) -> Multipliers {
        let ramp_epochs = self.ramp_fraction * epochs as f64;
        let m = if ramp_epochs <= 0.0 {
            1.0
        } else {
            let progress = (epoch as f64 / ramp_epochs).min(1.0);
            self.start + (1.0 - self.start) * progress
        };
        Multipliers { phys: m, obj: m }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub collocation_points: usize,
    pub lr: f64,
    pub seed: u64,
    /// Emit a checkpoint every this many epochs; 0 disables.
    pub checkpoint_interval: usize,
    pub quadrature_nodes: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 6000, collocation_points: 2048, lr: 1e-3, seed: 42, checkpoint_interval: 0, quadrature_nodes: 256 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        if self.collocation_points < 2 {
            return Err(Error::InvalidArgument("need at least 2 collocation points".into()));
        }
        if self.quadrature_nodes < 2 {
            return Err(Error::InvalidArgument("quadrature grid needs at least 2 nodes".into()));
        }
        if !(self.lr > 0.0) {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLosses {
    pub epoch: usize,
    pub phys: f64,
    pub bc: f64,
    pub obj: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub history: Vec<EpochLosses>,
    /// Loss of the returned parameters, evaluated after the last update.
    pub final_losses: EpochLosses,
    pub weights: LossWeights,
    /// Objective cost including the constant flight-time term `δ·T`.
    pub objective_with_time: f64,
    pub wall_time: Duration,
}

impl TrainReport {
    pub const CSV_HEADER: &'static str = "epoch,L_phys,L_bc,L_obj,L_total";

    /// Per-epoch history as CSV. Wall time is deliberately excluded so the
    /// file is reproducible.
    pub fn to_csv_string(&self) -> String {
        use crate::trajectory::format_sig9 as f;
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.history {
            out.push_str(&format!("{},{},{},{},{}\n", e.epoch, f(e.phys), f(e.bc), f(e.obj), f(e.total)));
        }
        out
    }
}

/// Samples the network on `n_samples` uniform normalized times and maps
/// them to physical time `t = τ·T`.
pub fn extract_trajectory(params: &ParamVector, scenario: &Scenario, n_samples: usize) -> Result<TrajectoryRecord> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n_samples}")));
    }
    let taus: Vec<f64> = (0..n_samples)
        .map(|k| if k == n_samples - 1 { 1.0 } else { k as f64 / (n_samples - 1) as f64 })
        .collect();
    let eval = batch_forward(params, &taus);
    let samples = taus
        .iter()
        .enumerate()
        .map(|(i, tau)| {
            let y = eval.y.row(i);
            Sample::new(tau * scenario.horizon, State::new(y[X], y[Y], y[VX], y[VY]), Control::new(y[UX], y[UY]))
        })
        .collect();
    TrajectoryRecord::new("pinn", samples)
}

/// Mean of `r1²+…+r4²` over `n` uniform normalized times.
pub fn mean_square_residual(params: &ParamVector, scenario: &Scenario, n: usize) -> f64 {
    let mut sum = 0.0;
    for k in 0..n {
        let tau = k as f64 / (n - 1) as f64;
        let out = forward_with_dt(params, tau);
        sum += residuals(&out, tau, scenario).iter().map(|r| r * r).sum::<f64>();
    }
    sum / n as f64
}

/// Number of samples whose control exceeds the scenario bound in either
/// axis. The network's controls are not clamped.
pub fn control_bound_violations(tr: &TrajectoryRecord, u_max: f64) -> usize {
    tr.samples()
        .iter()
        .filter(|s| s.control.ux.abs() > u_max || s.control.uy.abs() > u_max)
        .count()
}
