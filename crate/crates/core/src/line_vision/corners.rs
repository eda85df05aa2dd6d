use serde::{Deserialize, Serialize};

use super::{CornerObservation, LineSegment};
use crate::geometry::Vec2;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Junction {
    L,
    T,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerParams {
    /// Allowed deviation from a right angle, radians.
    pub angle_tol: f64,
    /// A line extends past the intersection if at least this much of it lies
    /// beyond, pixels.
    pub extend_tol: f64,
    /// Largest distance from the intersection to either segment, pixels.
    pub join_tol: f64,
}

impl Default for CornerParams {
    fn default() -> Self {
        Self {
            angle_tol: 10f64.to_radians(),
            extend_tol: 3.0,
            join_tol: 8.0,
        }
    }
}

impl CornerParams {
    pub fn with_angle_tol(angle_tol: f64) -> Self {
        Self {
            angle_tol,
            ..Self::default()
        }
    }
}

/// Arms of `s` leaving `x`: unit directions along which the segment extends
/// at least `extend_tol` beyond the point.
fn arms<T: Real>(s: &LineSegment<T>, x: Vec2<T>, extend_tol: T, join_tol: T) -> Option<Vec<Vec2<T>>> {
    let u = s.unit()?;
    let t = (x - s.p0).dot(u);
    if t < -join_tol || t > s.length + join_tol {
        return None;
    }
    let mut out = Vec::with_capacity(2);
    if s.length - t >= extend_tol {
        out.push(u);
    }
    if t >= extend_tol {
        out.push(-u);
    }
    (!out.is_empty()).then_some(out)
}

/// Corner observations where pairs of lines meet at a right angle.
///
/// Every pair of arms meeting at the intersection is one observation, so an
/// L-junction reports one corner, a T-junction two and an X-crossing four.
pub fn detect_corners<T: Real>(lines: &[LineSegment<T>], params: &CornerParams) -> Vec<CornerObservation<T>> {
    let tol = T::lit(params.angle_tol);
    let ext = T::lit(params.extend_tol);
    let join = T::lit(params.join_tol);
    let mut out = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a, b) = (&lines[i], &lines[j]);
            let (Some(ua), Some(ub)) = (a.unit(), b.unit()) else {
                continue;
            };
            let cross = ua.cross(ub);
            // |sin| of the angle between the lines
            if cross.abs() < (T::FRAC_PI_2() - tol).sin() {
                continue;
            }
            let t = (b.p0 - a.p0).cross(ub) / cross;
            let x = a.p0 + ua * t;
            let (Some(arms_a), Some(arms_b)) = (arms(a, x, ext, join), arms(b, x, ext, join)) else {
                continue;
            };
            let kind = match arms_a.len() * arms_b.len() {
                1 => Junction::L,
                2 => Junction::T,
                _ => Junction::X,
            };
            for &da in &arms_a {
                for &db in &arms_b {
                    out.push(CornerObservation {
                        position: x,
                        dir_a: da,
                        dir_b: db,
                        junction: kind,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: (f64, f64), b: (f64, f64)) -> LineSegment<f64> {
        LineSegment::new(Vec2::new(a.0, a.1), Vec2::new(b.0, b.1))
    }

    #[test]
    fn l_t_x_multiplicity() {
        let p = CornerParams::default();
        let l = [seg((0.0, 0.0), (50.0, 0.0)), seg((0.0, 0.0), (0.0, 50.0))];
        let t = [seg((-50.0, 0.0), (50.0, 0.0)), seg((0.0, 0.0), (0.0, 50.0))];
        let x = [seg((-50.0, 0.0), (50.0, 0.0)), seg((0.0, -50.0), (0.0, 50.0))];
        assert_eq!(detect_corners(&l, &p).len(), 1);
        assert_eq!(detect_corners(&t, &p).len(), 2);
        assert_eq!(detect_corners(&x, &p).len(), 4);
        assert!(detect_corners(&x, &p).iter().all(|c| c.junction == Junction::X));
    }

    #[test]
    fn parallel_and_far_lines_ignored() {
        let p = CornerParams::default();
        let par = [seg((0.0, 0.0), (50.0, 0.0)), seg((0.0, 10.0), (50.0, 10.0))];
        let far = [seg((0.0, 0.0), (50.0, 0.0)), seg((100.0, 20.0), (100.0, 80.0))];
        assert!(detect_corners(&par, &p).is_empty());
        assert!(detect_corners(&far, &p).is_empty());
    }
}
