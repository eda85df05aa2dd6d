use super::LineSegment;
use crate::geometry::{wrap_half_turn, Vec2};
use crate::scalar::Real;

/// Angle between two undirected segments, in `[0, pi/2]`.
pub fn direction_difference<T: Real>(a: &LineSegment<T>, b: &LineSegment<T>) -> T {
    let d = wrap_half_turn(a.direction() - b.direction());
    d.min(T::PI() - d)
}

fn point_line_distance<T: Real>(p: Vec2<T>, s: &LineSegment<T>) -> T {
    match s.unit() {
        Some(u) => (p - s.p0).cross(u).abs(),
        None => p.dist(s.p0),
    }
}

/// Largest distance of either segment's endpoints from the other's line.
pub fn mutual_line_distance<T: Real>(a: &LineSegment<T>, b: &LineSegment<T>) -> T {
    [
        point_line_distance(b.p0, a),
        point_line_distance(b.p1, a),
        point_line_distance(a.p0, b),
        point_line_distance(a.p1, b),
    ]
    .into_iter()
    .fold(T::zero(), T::max)
}

/// Smallest segment covering both inputs, along their length-weighted
/// mean direction.
fn cover<T: Real>(a: &LineSegment<T>, b: &LineSegment<T>) -> LineSegment<T> {
    let ua = a.unit().unwrap_or(Vec2::new(T::one(), T::zero()));
    let mut ub = b.unit().unwrap_or(ua);
    if ua.dot(ub) < T::zero() {
        ub = -ub;
    }
    let dir = (ua * a.length + ub * b.length).normalized().unwrap_or(ua);
    let wsum = a.length + b.length;
    let center = if wsum > T::zero() {
        (a.midpoint() * a.length + b.midpoint() * b.length) / wsum
    } else {
        a.midpoint()
    };
    let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
    for p in [a.p0, a.p1, b.p0, b.p1] {
        let t = (p - center).dot(dir);
        lo = lo.min(t);
        hi = hi.max(t);
    }
    LineSegment::new(center + dir * lo, center + dir * hi)
}

/// Joins near-collinear segments into their covering segments until no pair
/// within `angle_tol` and `dist_tol` is left.
///
/// The result is sorted (longest first, then by endpoints), so merging is
/// idempotent and independent of the input order for well-separated lines.
pub fn merge_segments<T: Real>(segs: &[LineSegment<T>], angle_tol: T, dist_tol: T) -> Vec<LineSegment<T>> {
    let mut cur: Vec<LineSegment<T>> = segs.to_vec();
    sort_segments(&mut cur);
    loop {
        let mut merged = false;
        'outer: for i in 0..cur.len() {
            for j in i + 1..cur.len() {
                if direction_difference(&cur[i], &cur[j]) <= angle_tol
                    && mutual_line_distance(&cur[i], &cur[j]) <= dist_tol
                {
                    let m = cover(&cur[i], &cur[j]);
                    cur.swap_remove(j);
                    cur[i] = m;
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
        sort_segments(&mut cur);
    }
    cur
}

fn sort_segments<T: Real>(v: &mut [LineSegment<T>]) {
    for s in v.iter_mut() {
        s.canonicalize();
    }
    v.sort_by(|a, b| {
        b.length
            .partial_cmp(&a.length)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.p0.x.partial_cmp(&b.p0.x).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.p0.y.partial_cmp(&b.p0.y).unwrap_or(std::cmp::Ordering::Equal))
    });
}
