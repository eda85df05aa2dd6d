//! Field line and corner detection.
//!
//! Two sliding-window passes score every decimated scanline site for "bright,
//! non-green stripe between green", non-maximum suppression keeps the stripe
//! centers, a probabilistic Hough transform turns the centers into segments,
//! near-duplicates are merged and right-angle intersections become corners.

mod corners;
mod hough;
mod integral;
mod merge;
mod nms;
mod response;

pub use corners::{detect_corners, CornerParams, Junction};
pub use hough::{hough_segments, HoughParams};
pub use integral::{integral_image, SummedAreaTable};
pub use merge::{direction_difference, merge_segments, mutual_line_distance};
pub use nms::{nms, nms_sites};
pub use response::{line_response_pass, Heatmap, ResponseParams, ScanDirection, WidthMap};

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::image::Raster;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LineSegment<T> {
    pub p0: Vec2<T>,
    pub p1: Vec2<T>,
    pub length: T,
}

impl<T: Real> LineSegment<T> {
    pub fn new(p0: Vec2<T>, p1: Vec2<T>) -> Self {
        Self {
            p0,
            p1,
            length: p0.dist(p1),
        }
    }

    /// Direction angle of `p1 - p0`.
    pub fn direction(&self) -> T {
        (self.p1 - self.p0).angle()
    }

    pub fn unit(&self) -> Option<Vec2<T>> {
        (self.p1 - self.p0).normalized()
    }

    pub fn midpoint(&self) -> Vec2<T> {
        (self.p0 + self.p1) * T::lit(0.5)
    }

    /// Orders the endpoints so that `p0` is lexicographically smaller.
    pub fn canonicalize(&mut self) {
        if (self.p1.x, self.p1.y) < (self.p0.x, self.p0.y) {
            std::mem::swap(&mut self.p0, &mut self.p1);
        }
    }

    pub fn distance_to(&self, p: Vec2<T>) -> T {
        crate::geometry::point_segment_distance(p, self.p0, self.p1)
    }
}

/// Two lines meeting at a right angle, seen from their intersection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CornerObservation<T> {
    pub position: Vec2<T>,
    pub dir_a: Vec2<T>,
    pub dir_b: Vec2<T>,
    pub junction: Junction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LineDetectorConfig {
    pub width_map: WidthMap,
    pub response: ResponseParams,
    pub nms_radius: usize,
    pub nms_threshold: f64,
    pub hough: HoughParams,
    pub merge_angle_tol: f64,
    pub merge_dist_tol: f64,
    pub corners: CornerParams,
}

impl Default for LineDetectorConfig {
    fn default() -> Self {
        Self {
            width_map: WidthMap::Constant(5),
            response: ResponseParams::default(),
            nms_radius: 4,
            nms_threshold: 30.0,
            hough: HoughParams::default(),
            merge_angle_tol: 3f64.to_radians(),
            merge_dist_tol: 4.0,
            corners: CornerParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LineDetections<T> {
    pub lines: Vec<LineSegment<T>>,
    pub corners: Vec<CornerObservation<T>>,
}

/// Stripe centers found by one pass.
pub fn line_points<T: Real>(r: &Raster, direction: ScanDirection, cfg: &LineDetectorConfig) -> Vec<Vec2<T>> {
    let h = line_response_pass::<T>(r, direction, &cfg.width_map, &cfg.response);
    nms(&h, cfg.nms_radius, T::lit(cfg.nms_threshold))
}

/// Runs the full detector on one image.
pub fn detect_lines<T: Real>(r: &Raster, cfg: &LineDetectorConfig) -> LineDetections<T> {
    let (ph, pv) = rayon::join(
        || line_points::<T>(r, ScanDirection::Horizontal, cfg),
        || line_points::<T>(r, ScanDirection::Vertical, cfg),
    );
    let mut vertical_hough = cfg.hough;
    vertical_hough.seed = cfg.hough.seed.wrapping_add(1);
    let mut segs = hough_segments(&ph, &cfg.hough);
    segs.extend(hough_segments(&pv, &vertical_hough));
    let lines = merge_segments(&segs, T::lit(cfg.merge_angle_tol), T::lit(cfg.merge_dist_tol));
    let corners = detect_corners(&lines, &cfg.corners);
    LineDetections { lines, corners }
}
