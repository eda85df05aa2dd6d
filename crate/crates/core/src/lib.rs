//! Perception and decision building blocks for a small humanoid soccer robot:
//! field model, kick planning on a grid, field-line detection, camera
//! geometry, particle-filter localization, a parallel filter pipeline and
//! stereo obstacle detection, plus a synthetic world to test them against.
//!
//! Numeric code is generic over [`scalar::Real`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`.

pub mod ball_planner;
pub mod birdview;
pub mod field_model;
pub mod geometry;
pub mod image;
pub mod line_vision;
pub mod localization;
pub mod pipeline_scheduler;
pub mod scalar;
pub mod stereo_obstacles;
pub mod synth;

pub use scalar::Real;

pub type Vec2 = geometry::Vec2<f64>;
pub type Vec3 = geometry::Vec3<f64>;
pub type FieldPose = geometry::FieldPose<f64>;
pub type FieldSpec = field_model::FieldSpec<f64>;
pub type PlanContext = ball_planner::PlanContext<f64>;
pub type BallPlan = ball_planner::BallPlan<f64>;
pub type CameraIntrinsics = birdview::CameraIntrinsics<f64>;
pub type CameraExtrinsics = birdview::CameraExtrinsics<f64>;
pub type BirdviewSpec = birdview::BirdviewSpec<f64>;
pub type LineSegment = line_vision::LineSegment<f64>;
pub type CornerObservation = line_vision::CornerObservation<f64>;
pub type Heatmap = line_vision::Heatmap<f64>;
pub type RobotObservation = localization::RobotObservation<f64>;
pub type Particle = localization::Particle<f64>;
pub type ParticleFilter = localization::ParticleFilter<f64>;
pub type StereoRig = stereo_obstacles::StereoRig<f64>;
pub type PointCloud = stereo_obstacles::PointCloud<f64>;
pub type GroundPlane = stereo_obstacles::GroundPlane<f64>;
pub type ObstacleCluster = stereo_obstacles::ObstacleCluster<f64>;
pub type Scene = synth::Scene<f64>;
