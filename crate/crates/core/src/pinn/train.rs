use std::time::Instant;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::loss::LossProblem;
use super::{CurriculumSchedule, EpochLosses, LossWeights, TrainConfig, TrainReport};
use crate::diffnet::adam::{AdamConfig, AdamState};
use crate::diffnet::mlp::{init_params, MlpConfig, ParamVector};
use crate::environment::Scenario;
use crate::error::{Error, Result};

pub fn train(
    scenario: &Scenario,
    net: &MlpConfig,
    cfg: &TrainConfig,
    weights: &LossWeights,
    schedule: &CurriculumSchedule,
) -> Result<(ParamVector, TrainReport)> {
    train_with(scenario, net, cfg, weights, schedule, |_, _| Ok(()))
}

/// Full-batch Adam on freshly drawn collocation points every epoch.
///
/// `on_epoch` sees the losses of each epoch (evaluated before that epoch's
/// update) together with the parameters they were computed from.
pub fn train_with<F>(
    scenario: &Scenario,
    net: &MlpConfig,
    cfg: &TrainConfig,
    weights: &LossWeights,
    schedule: &CurriculumSchedule,
    mut on_epoch: F,
) -> Result<(ParamVector, TrainReport)>
where
    F: FnMut(&EpochLosses, &ParamVector) -> Result<()>,
{
    cfg.validate()?;
    weights.validate()?;
    schedule.validate()?;
    scenario.validate()?;
    let started = Instant::now();

    let mut params = init_params(net)?;
    let problem = LossProblem::new(scenario, *weights, cfg.quadrature_nodes);
    let mut adam = AdamState::new(AdamConfig { lr: cfg.lr, ..AdamConfig::default() }, params.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let unit = Uniform::new(0.0, 1.0);
    let mut collocation = vec![0.0; cfg.collocation_points];
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        for tau in collocation.iter_mut() {
            *tau = unit.sample(&mut rng);
        }
        let mult = schedule.multipliers(epoch, cfg.epochs);
        let (loss, grad) = problem.evaluate(&params, &collocation, mult, true);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        let record = EpochLosses { epoch, phys: loss.phys, bc: loss.bc, obj: loss.obj, total: loss.total };
        on_epoch(&record, &params)?;
        history.push(record);
        let grad = grad.expect("gradient requested");
        adam.step(&mut params.data, &grad)?;
        if !params.is_finite() {
            return Err(Error::Diverged { epoch });
        }
    }

    // Score the final parameters on a fresh draw at full curriculum weight.
    for tau in collocation.iter_mut() {
        *tau = unit.sample(&mut rng);
    }
    let mult = schedule.multipliers(cfg.epochs, cfg.epochs);
    let (loss, _) = problem.evaluate(&params, &collocation, mult, false);
    if !loss.is_finite() {
        return Err(Error::Diverged { epoch: cfg.epochs });
    }
    let final_losses = EpochLosses { epoch: cfg.epochs, phys: loss.phys, bc: loss.bc, obj: loss.obj, total: loss.total };

    let report = TrainReport {
        history,
        final_losses,
        weights: *weights,
        objective_with_time: loss.obj + weights.delta * scenario.horizon,
        wall_time: started.elapsed(),
    };
    Ok((params, report))
}
