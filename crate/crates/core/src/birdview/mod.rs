//! Camera geometry for the flat field: projection with radial distortion,
//! the top-down "birdview" resampling, wide-angle emulation and the
//! field-of-view mask.

mod camera;
mod emulation;
mod transform;

use thiserror::Error;

pub use camera::{project, unproject_to_ground, CameraExtrinsics, CameraIntrinsics};
pub use emulation::{apply_mask, emulate_wide_angle, fov_mask};
pub use transform::{birdview_map, birdview_transform, remap, BirdviewSpec, Blend, Sampling};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CameraError {
    #[error("point is behind the camera")]
    BehindCamera,
    #[error("pixel ray does not hit the ground in front of the camera")]
    HorizonRay,
    #[error("camera must be above the field plane")]
    BelowGround,
    #[error("radial distortion (k1={k1}, k2={k2}) is not monotonic over the image")]
    NonMonotonicDistortion { k1: f64, k2: f64 },
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("undistortion did not converge")]
    NoConvergence,
}
