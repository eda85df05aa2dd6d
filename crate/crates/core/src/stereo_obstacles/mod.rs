//! Obstacles from a rectified stereo pair: block matching, reprojection,
//! voxel filtering, a RANSAC ground plane and clustering of whatever stands
//! out of it. Everything happens in the left camera's optical frame.

mod cloud;
mod matching;

pub use cloud::{
    disparity_to_points, extract_clusters, ransac_plane, voxel_bin, GroundPlane, ObstacleCluster, PointCloud,
    RansacParams,
};
pub use matching::{block_match, DisparityMap, UNIQUENESS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::birdview::{CameraExtrinsics, CameraIntrinsics};
use crate::geometry::{Vec2, Vec3};
use crate::image::Gray;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StereoError {
    #[error("left image is {left:?} but right image is {right:?}")]
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("point cloud is degenerate (fewer than three non-collinear points)")]
    DegenerateCloud,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Rectified pinhole pair; the right camera sits `baseline` meters to the
/// right of the left one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StereoRig<T> {
    #[serde(default = "d_baseline")]
    pub baseline: T,
    pub focal: T,
    pub cx: T,
    pub cy: T,
    pub width: usize,
    pub height: usize,
}

fn d_baseline<T: Real>() -> T {
    T::lit(0.062)
}

impl<T: Real> StereoRig<T> {
    pub fn new(baseline: T, focal: T, width: usize, height: usize) -> Result<Self, StereoError> {
        let rig = Self {
            baseline,
            focal,
            cx: T::lit(width as f64 - 1.0) / T::lit(2.0),
            cy: T::lit(height as f64 - 1.0) / T::lit(2.0),
            width,
            height,
        };
        rig.validate()?;
        Ok(rig)
    }

    /// 62 mm baseline, 640x480, 70 degree horizontal field of view.
    pub fn standard() -> Self {
        let focal = T::lit(320.0 / 35f64.to_radians().tan());
        Self::new(d_baseline(), focal, 640, 480).expect("valid default rig")
    }

    pub fn validate(&self) -> Result<(), StereoError> {
        if !(self.baseline > T::zero() && self.focal > T::zero()) {
            return Err(StereoError::InvalidParameter("baseline and focal must be positive".into()));
        }
        Ok(())
    }

    pub fn intrinsics(&self) -> CameraIntrinsics<T> {
        CameraIntrinsics {
            fx: self.focal,
            fy: self.focal,
            cx: self.cx,
            cy: self.cy,
            k1: T::zero(),
            k2: T::zero(),
            width: self.width,
            height: self.height,
        }
    }

    /// Depth of a disparity, `focal * baseline / d`.
    pub fn depth(&self, disparity: T) -> T {
        self.focal * self.baseline / disparity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "T: Real")]
pub struct ObstacleParams<T> {
    pub window: usize,
    pub max_disparity: usize,
    /// Pixel stride when reprojecting disparities.
    pub step: usize,
    /// Points farther than this are dropped, meters.
    pub max_depth: T,
    pub voxel: T,
    pub min_points_per_voxel: usize,
    pub ransac: RansacParams<T>,
    pub protrusion: T,
    pub link_dist: T,
    pub min_size: usize,
}

impl<T: Real> Default for ObstacleParams<T> {
    fn default() -> Self {
        Self {
            window: 7,
            max_disparity: 64,
            step: 2,
            max_depth: T::lit(3.0),
            voxel: T::lit(0.05),
            min_points_per_voxel: 2,
            ransac: RansacParams::default(),
            protrusion: T::lit(0.1),
            link_dist: T::lit(0.15),
            min_size: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ObstacleReport<T> {
    pub plane: GroundPlane<T>,
    /// Share of the filtered cloud that supports the plane.
    pub inlier_ratio: T,
    pub cloud_size: usize,
    pub clusters: Vec<ObstacleCluster<T>>,
}

/// Voxel-filtered cloud of a stereo pair, the input of plane fitting.
pub fn stereo_cloud<T: Real>(left: &Gray, right: &Gray, rig: &StereoRig<T>, params: &ObstacleParams<T>) -> Result<PointCloud<T>, StereoError> {
    rig.validate()?;
    let disp = block_match(left, right, params.window, params.max_disparity)?;
    let mut raw = disparity_to_points(&disp, rig, params.step);
    raw.points.retain(|p| p.z <= params.max_depth);
    Ok(voxel_bin(&raw, params.voxel, params.min_points_per_voxel))
}

/// The whole stereo chain in one call.
pub fn detect_obstacles<T: Real>(
    left: &Gray,
    right: &Gray,
    rig: &StereoRig<T>,
    params: &ObstacleParams<T>,
) -> Result<ObstacleReport<T>, StereoError> {
    let cloud = stereo_cloud(left, right, rig, params)?;
    let plane = ransac_plane(&cloud, &params.ransac)?;
    let clusters = extract_clusters(&cloud, &plane, params.protrusion, params.link_dist, params.min_size);
    Ok(ObstacleReport {
        inlier_ratio: T::lit(plane.inlier_count as f64 / cloud.len().max(1) as f64),
        cloud_size: cloud.len(),
        plane,
        clusters,
    })
}

/// Field position of an optical-frame point seen by a camera at `ex`.
pub fn optical_to_field<T: Real>(p: Vec3<T>, ex: &CameraExtrinsics<T>) -> Vec3<T> {
    ex.position + ex.ray_to_field(p)
}

/// Ground footprint of a cluster in the field frame.
pub fn cluster_on_field<T: Real>(c: &ObstacleCluster<T>, ex: &CameraExtrinsics<T>) -> Vec2<T> {
    optical_to_field(c.centroid, ex).xy()
}
