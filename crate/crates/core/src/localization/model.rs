use serde::{Deserialize, Serialize};

use crate::field_model::FieldSpec;
use crate::geometry::{wrap_angle, wrap_half_turn, FieldPose, Vec2};
use crate::line_vision::{detect_corners, CornerParams, LineSegment};
use crate::scalar::Real;

/// A detection expressed in the robot frame.
///
/// A line is described by its direction `φ` in `[0, π)` and the signed
/// distance `n · p` of any of its points `p`, where `n = (-sin φ, cos φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum RobotObservation<T> {
    Line { distance: T, direction: T },
    Corner { position: Vec2<T>, orientation: T },
    PointFeature { position: Vec2<T> },
}

impl<T: Real> RobotObservation<T> {
    /// Line through `a` and `b`, both in the robot frame.
    pub fn line_through(a: Vec2<T>, b: Vec2<T>) -> Option<Self> {
        let u = (b - a).normalized()?;
        let direction = wrap_half_turn(u.angle());
        let n = Vec2::new(-direction.sin(), direction.cos());
        Some(Self::Line {
            distance: n.dot(a),
            direction,
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Line { .. } => "line",
            Self::Corner { .. } => "corner",
            Self::PointFeature { .. } => "point_feature",
        }
    }
}

/// A field feature in the field frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum Landmark<T> {
    Line { a: Vec2<T>, b: Vec2<T> },
    /// `orientation` is the direction of the bisector of the two arms.
    Corner { position: Vec2<T>, orientation: T },
    Point { position: Vec2<T> },
}

impl<T: Real> Landmark<T> {
    /// Closest distance from `p` to the feature.
    pub fn distance_from(&self, p: Vec2<T>) -> T {
        match *self {
            Landmark::Line { a, b } => crate::geometry::point_segment_distance(p, a, b),
            Landmark::Corner { position, .. } | Landmark::Point { position } => p.dist(position),
        }
    }

    /// How the feature looks from `pose`.
    pub fn observe_from(&self, pose: &FieldPose<T>) -> RobotObservation<T> {
        match *self {
            Landmark::Line { a, b } => RobotObservation::line_through(pose.to_local(a), pose.to_local(b))
                .expect("field lines have distinct endpoints"),
            Landmark::Corner { position, orientation } => RobotObservation::Corner {
                position: pose.to_local(position),
                orientation: wrap_angle(orientation - pose.theta),
            },
            Landmark::Point { position } => RobotObservation::PointFeature {
                position: pose.to_local(position),
            },
        }
    }
}

/// Every landmark of a field layout: its straight lines, each right-angle
/// junction once per pair of arms (1 for L, 2 for T, 4 for X) and the goal posts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FieldLandmarks<T> {
    pub lines: Vec<Landmark<T>>,
    pub corners: Vec<Landmark<T>>,
    pub posts: Vec<Landmark<T>>,
}

impl<T: Real> FieldLandmarks<T> {
    pub fn new(spec: &FieldSpec<T>) -> Self {
        let segs: Vec<LineSegment<T>> = spec.line_segments.iter().map(|s| LineSegment::new(s.a, s.b)).collect();
        let tol = spec.line_width.to_f64_lossy() / 4.0;
        let params = CornerParams {
            angle_tol: 1f64.to_radians(),
            extend_tol: tol,
            join_tol: tol,
        };
        let corners = detect_corners(&segs, &params)
            .into_iter()
            .map(|c| Landmark::Corner {
                position: c.position,
                orientation: (c.dir_a + c.dir_b).angle(),
            })
            .collect();
        Self {
            lines: spec.line_segments.iter().map(|s| Landmark::Line { a: s.a, b: s.b }).collect(),
            corners,
            posts: spec.goal_posts().iter().map(|&position| Landmark::Point { position }).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Landmark<T>> {
        self.lines.iter().chain(&self.corners).chain(&self.posts)
    }

    /// Landmarks of the same kind as `obs`.
    pub fn matching(&self, obs: &RobotObservation<T>) -> &[Landmark<T>] {
        match obs {
            RobotObservation::Line { .. } => &self.lines,
            RobotObservation::Corner { .. } => &self.corners,
            RobotObservation::PointFeature { .. } => &self.posts,
        }
    }
}

/// What a robot at `pose` would observe within `max_range`, lines first,
/// then corners, then goal posts, each in layout order.
pub fn expected_observations<T: Real>(pose: &FieldPose<T>, spec: &FieldSpec<T>, max_range: T) -> Vec<RobotObservation<T>> {
    expected_from(&FieldLandmarks::new(spec), pose, max_range)
}

/// [`expected_observations`] against precomputed landmarks.
pub fn expected_from<T: Real>(lm: &FieldLandmarks<T>, pose: &FieldPose<T>, max_range: T) -> Vec<RobotObservation<T>> {
    lm.iter()
        .filter(|l| l.distance_from(pose.position()) <= max_range)
        .map(|l| l.observe_from(pose))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Sigmas<T> {
    /// Line distance, meters.
    pub distance: T,
    /// Corner and point positions, meters.
    pub position: T,
    /// Line directions and corner orientations, radians.
    pub angle: T,
}

impl<T: Real> Default for Sigmas<T> {
    fn default() -> Self {
        Self {
            distance: T::lit(0.15),
            position: T::lit(0.2),
            angle: T::lit(0.15),
        }
    }
}

impl<T: Real> Sigmas<T> {
    pub fn is_valid(&self) -> bool {
        self.distance > T::zero() && self.position > T::zero() && self.angle > T::zero()
    }
}

/// Squared normalized residual between an observation and an expected one
/// of the same kind, or `None` for different kinds.
pub fn residual_sq<T: Real>(obs: &RobotObservation<T>, expected: &RobotObservation<T>, s: &Sigmas<T>) -> Option<T> {
    use RobotObservation as O;
    match (*obs, *expected) {
        (O::Line { distance: d, direction: a }, O::Line { distance: de, direction: ae }) => {
            // flipping a line's direction by π flips the sign of its distance
            let raw = wrap_angle(a - ae);
            let (da, de) = if raw.abs() > T::FRAC_PI_2() {
                (wrap_angle(raw - T::PI()), -de)
            } else {
                (raw, de)
            };
            let rd = (d - de) / s.distance;
            let ra = da / s.angle;
            Some(rd * rd + ra * ra)
        }
        (O::Corner { position: p, orientation: o }, O::Corner { position: pe, orientation: oe }) => {
            let rp = (p - pe).norm() / s.position;
            let ro = wrap_angle(o - oe) / s.angle;
            Some(rp * rp + ro * ro)
        }
        (O::PointFeature { position: p }, O::PointFeature { position: pe }) => {
            let rp = (p - pe).norm() / s.position;
            Some(rp * rp)
        }
        _ => None,
    }
}

/// Gaussian kernel `exp(-r²/2)` of the residual to a known landmark.
pub fn landmark_likelihood<T: Real>(obs: &RobotObservation<T>, landmark: &Landmark<T>, pose: &FieldPose<T>, s: &Sigmas<T>) -> T {
    residual_sq(obs, &landmark.observe_from(pose), s)
        .map(|r| (-r / T::lit(2.0)).exp())
        .unwrap_or(T::zero())
}

/// Smallest squared residual over all landmarks of the observation's kind.
pub fn best_residual_sq<T: Real>(obs: &RobotObservation<T>, pose: &FieldPose<T>, lm: &FieldLandmarks<T>, s: &Sigmas<T>) -> Option<T> {
    lm.matching(obs)
        .iter()
        .filter_map(|l| residual_sq(obs, &l.observe_from(pose), s))
        .fold(None, |best: Option<T>, r| Some(best.map_or(r, |b| b.min(r))))
}

/// Score of `obs` against the best-matching landmark seen from `pose`.
pub fn observation_likelihood<T: Real>(obs: &RobotObservation<T>, pose: &FieldPose<T>, spec: &FieldSpec<T>, s: &Sigmas<T>) -> T {
    let lm = FieldLandmarks::new(spec);
    best_residual_sq(obs, pose, &lm, s)
        .map(|r| (-r / T::lit(2.0)).exp())
        .unwrap_or(T::zero())
}
