//! Learned assignment of selection features to the prediction equation.

mod gradient;
mod gumbel;
mod train;

pub use gradient::{
    mae_gradient, mae_loss, mse_gradient_probe, relaxed_fitted, relaxed_mae_gradient,
    relaxed_mae_loss,
};
pub use gumbel::{
    draw_gumbel, feature_assign, sample_gumbel, AssignmentProbabilities, GumbelDraw, PI_FLOOR,
};
pub use train::{
    train_assignment, train_assignment_with_stage, EpochRecord, TrainTrace, MAX_REDRAWS,
};
