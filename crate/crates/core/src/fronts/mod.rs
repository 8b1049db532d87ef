//! Traveling fronts, multi-front supersolutions and front-position fits.

mod fit;
mod profile;
mod supersolution;

use thiserror::Error;

use crate::reaction::ReactionError;

pub use fit::{fit_front_position, FrontFit, MIN_SAMPLES};
pub use profile::{shoot_profile, FrontProfile, ProfileResidual, TAIL_LEVEL};
pub use supersolution::{build_supersolution, epsilon_net, supersolution_residual, Supersolution, SupersolutionParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontError {
    #[error("speed {c} is below the minimal speed {c_star}")]
    SpeedBelowMinimal { c: f64, c_star: f64 },
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Reaction(#[from] ReactionError),
}
