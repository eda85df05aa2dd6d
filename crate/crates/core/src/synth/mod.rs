//! Synthetic world used for fixtures: field renders, stereo pairs and
//! localization trajectories with ground truth.

mod overlay;
mod render;
mod trajectory;

pub use render::{
    add_noise, is_painted, render_birdview, render_field, render_stereo, value_noise, Obstacle, Scene, BACKDROP,
    GRASS, PAINT, STEREO_TEXTURE,
};
pub use trajectory::{generate_trajectory, Trajectory, TrajectoryConfig, TrajectoryStep};
pub use overlay::{detection_overlay, plan_overlay};
