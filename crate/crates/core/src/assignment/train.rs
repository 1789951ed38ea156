//! Learning `π̂` by projected gradient descent on the MAE.

use log::debug;
use serde::{Deserialize, Serialize};

use super::gradient::{mae_gradient, mae_loss};
use super::gumbel::{draw_gumbel, AssignmentProbabilities, GumbelDraw};
use crate::config::RunConfig;
use crate::dataset::{Dataset, FeatureMask};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::selection::{fit_outcome, selection_stage, HeckmanFit, SelectionStage};

/// Extra Gumbel draws allowed within one epoch when a draw cannot be fitted.
pub const MAX_REDRAWS: usize = 16;

/// Address slots reserved per epoch in the training stream.
const DRAW_SLOTS_PER_EPOCH: u64 = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// `None` when the epoch was skipped because every draw was all-zero.
    pub loss: Option<f64>,
    pub mask: Option<FeatureMask>,
    pub redraws: usize,
    /// `π_2·` after the update, when requested.
    pub pi_assigned: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub epochs: Vec<EpochRecord>,
}

impl TrainTrace {
    pub fn skipped_epochs(&self) -> usize {
        self.epochs.iter().filter(|e| e.loss.is_none()).count()
    }
}

/// Runs `T` epochs of draw → fit → MAE → projected gradient step, starting
/// from `π_2k = c`.
pub fn train_assignment(data: &Dataset, config: &RunConfig) -> Result<(AssignmentProbabilities, TrainTrace)> {
    let stage = selection_stage(data)?;
    train_assignment_with_stage(data, &stage, config)
}

pub fn train_assignment_with_stage(
    data: &Dataset,
    stage: &SelectionStage,
    config: &RunConfig,
) -> Result<(AssignmentProbabilities, TrainTrace)> {
    config.validate()?;
    let mut pi = AssignmentProbabilities::uniform(data.k(), config.init_c)?;
    let mut trace = TrainTrace {
        epochs: Vec::with_capacity(config.epochs),
    };

    for epoch in 0..config.epochs {
        let attempt = fit_epoch_draw(data, stage, &pi, config, epoch)?;
        let record = match attempt {
            EpochDraw::Fitted { draw, fit, redraws } => {
                let loss = mae_loss(&fit, data);
                let grad = mae_gradient(data, &fit, &draw, &pi);
                pi = pi.gradient_step(&grad, config.learning_rate);
                EpochRecord {
                    epoch,
                    loss: Some(loss),
                    mask: Some(fit.mask),
                    redraws,
                    pi_assigned: None,
                }
            }
            EpochDraw::Skipped => {
                debug!("epoch {epoch}: every draw left all features unassigned; skipping update");
                EpochRecord {
                    epoch,
                    loss: None,
                    mask: None,
                    redraws: MAX_REDRAWS,
                    pi_assigned: None,
                }
            }
        };
        let mut record = record;
        if config.record_pi {
            record.pi_assigned = Some(pi.assigned_row());
        }
        trace.epochs.push(record);
    }
    Ok((pi, trace))
}

enum EpochDraw {
    Fitted {
        draw: GumbelDraw,
        fit: HeckmanFit,
        redraws: usize,
    },
    Skipped,
}

fn fit_epoch_draw(
    data: &Dataset,
    stage: &SelectionStage,
    pi: &AssignmentProbabilities,
    config: &RunConfig,
    epoch: usize,
) -> Result<EpochDraw> {
    let mut last_error = None;
    for redraws in 0..=MAX_REDRAWS {
        let address = epoch as u64 * DRAW_SLOTS_PER_EPOCH + redraws as u64;
        let mut rng = stream_rng(config.seed, Stream::Train, address);
        let draw = draw_gumbel(pi, config.temperature, &mut rng);
        let mask = match draw.mask() {
            Ok(mask) => mask,
            Err(Error::AllZeroMask) => continue,
            Err(e) => return Err(e),
        };
        match fit_outcome(data, stage, &mask) {
            Ok(fit) => return Ok(EpochDraw::Fitted { draw, fit, redraws }),
            Err(e @ (Error::SingularDesign { .. } | Error::InsufficientSamples { .. })) => {
                last_error = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    match last_error {
        Some(e) => Err(e),
        None => Ok(EpochDraw::Skipped),
    }
}
