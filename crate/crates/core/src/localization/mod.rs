//! Particle-filter self-localization from field lines and corners.

mod filter;
mod model;

pub use filter::{
    effective_sample_size, estimate_pose, log_likelihood, pose_error, predict, systematic_resample, uniform_particles,
    update_and_resample, FilterConfig, MotionNoise, Particle, ParticleFilter, PoseEstimate, UpdateParams,
};
pub use model::{
    best_residual_sq, expected_from, expected_observations, landmark_likelihood, observation_likelihood, residual_sq,
    FieldLandmarks, Landmark, RobotObservation, Sigmas,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalizationError {
    #[error("all particle weights vanished; reinitialize the filter")]
    Degenerate,
    #[error("particle set is empty")]
    Empty,
    #[error("observation sigmas must be positive")]
    InvalidSigmas,
}
