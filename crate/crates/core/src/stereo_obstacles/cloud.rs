use std::collections::{BTreeMap, HashMap};

use nalgebra::{Matrix3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DisparityMap, StereoError, StereoRig};
use crate::geometry::Vec3;
use crate::scalar::Real;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PointCloud<T> {
    pub points: Vec<Vec3<T>>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(points: Vec<Vec3<T>>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One `x y z` line per point.
    pub fn to_xyz(&self) -> String {
        let mut s = String::new();
        for p in &self.points {
            s.push_str(&format!("{} {} {}\n", p.x, p.y, p.z));
        }
        s
    }
}

/// Camera-frame points of every valid pixel on a `step` grid.
pub fn disparity_to_points<T: Real>(d: &DisparityMap, rig: &StereoRig<T>, step: usize) -> PointCloud<T> {
    let step = step.max(1);
    let fb = rig.focal * rig.baseline;
    let mut points = Vec::new();
    for v in (0..d.height).step_by(step) {
        for u in (0..d.width).step_by(step) {
            let Some(disp) = d.get(u, v).filter(|&k| k > 0) else {
                continue;
            };
            let z = fb / T::lit(disp as f64);
            let x = (T::lit(u as f64) - rig.cx) * z / rig.focal;
            let y = (T::lit(v as f64) - rig.cy) * z / rig.focal;
            points.push(Vec3::new(x, y, z));
        }
    }
    PointCloud { points }
}

fn voxel_key<T: Real>(p: Vec3<T>, voxel: T) -> (i64, i64, i64) {
    let k = |v: T| (v / voxel).floor().to_f64_lossy() as i64;
    (k(p.x), k(p.y), k(p.z))
}

/// Centroids of voxels holding at least `min_points` points, in voxel-key order.
pub fn voxel_bin<T: Real>(pc: &PointCloud<T>, voxel: T, min_points: usize) -> PointCloud<T> {
    let mut bins: BTreeMap<(i64, i64, i64), (Vec3<T>, usize)> = BTreeMap::new();
    for &p in &pc.points {
        let e = bins.entry(voxel_key(p, voxel)).or_insert((Vec3::zero(), 0));
        e.0 = e.0 + p;
        e.1 += 1;
    }
    let points = bins
        .into_values()
        .filter(|&(_, n)| n >= min_points.max(1))
        .map(|(s, n)| s / T::lit(n as f64))
        .collect();
    PointCloud { points }
}

/// Plane `normal . x = offset` with unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GroundPlane<T> {
    pub normal: Vec3<T>,
    pub offset: T,
    pub inlier_count: usize,
}

impl<T: Real> GroundPlane<T> {
    pub fn signed_distance(&self, p: Vec3<T>) -> T {
        self.normal.dot(p) - self.offset
    }

    /// Angle between the normals of two planes, radians.
    pub fn normal_angle(&self, other: Vec3<T>) -> T {
        let c = self.normal.dot(other) / other.norm();
        c.max(-T::one()).min(T::one()).acos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RansacParams<T> {
    pub iterations: usize,
    pub inlier_dist: T,
    pub seed: u64,
    /// The returned normal has a non-negative component along this direction.
    pub up: Vec3<T>,
}

impl<T: Real> Default for RansacParams<T> {
    fn default() -> Self {
        Self {
            iterations: 200,
            inlier_dist: T::lit(0.02),
            seed: 0,
            // optical frame: y points down
            up: Vec3::new(T::zero(), -T::one(), T::zero()),
        }
    }
}

fn orient<T: Real>(n: Vec3<T>, d: T, up: Vec3<T>) -> (Vec3<T>, T) {
    if n.dot(up) < T::zero() {
        (-n, -d)
    } else {
        (n, d)
    }
}

fn count_inliers<T: Real>(pts: &[Vec3<T>], n: Vec3<T>, d: T, tol: T) -> usize {
    pts.iter().filter(|p| (n.dot(**p) - d).abs() <= tol).count()
}

/// Total-least-squares plane through `pts`.
fn fit_plane<T: Real>(pts: &[Vec3<T>]) -> Option<(Vec3<T>, T)> {
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let f = |p: &Vec3<T>| [p.x.to_f64_lossy(), p.y.to_f64_lossy(), p.z.to_f64_lossy()];
    let mut c = [0.0; 3];
    for p in pts {
        let q = f(p);
        for k in 0..3 {
            c[k] += q[k] / n;
        }
    }
    let mut cov = Matrix3::<f64>::zeros();
    for p in pts {
        let q = f(p);
        let d = [q[0] - c[0], q[1] - c[1], q[2] - c[2]];
        for i in 0..3 {
            for j in 0..3 {
                cov[(i, j)] += d[i] * d[j];
            }
        }
    }
    let eig = SymmetricEigen::new(cov);
    let k = eig.eigenvalues.imin();
    let v = eig.eigenvectors.column(k);
    let normal = Vec3::new(T::lit(v[0]), T::lit(v[1]), T::lit(v[2])).normalized()?;
    let centroid = Vec3::new(T::lit(c[0]), T::lit(c[1]), T::lit(c[2]));
    Some((normal, normal.dot(centroid)))
}

/// Three-point RANSAC plane refined by least squares over its inliers.
pub fn ransac_plane<T: Real>(pc: &PointCloud<T>, params: &RansacParams<T>) -> Result<GroundPlane<T>, StereoError> {
    let pts = &pc.points;
    if pts.len() < 3 {
        return Err(StereoError::DegenerateCloud);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(usize, Vec3<T>, T)> = None;
    let exhaustive = pts.len() == 3;
    for _ in 0..params.iterations.max(1) {
        let (i, j, k) = if exhaustive {
            (0, 1, 2)
        } else {
            let i = rng.random_range(0..pts.len());
            let j = rng.random_range(0..pts.len());
            let k = rng.random_range(0..pts.len());
            if i == j || j == k || i == k {
                continue;
            }
            (i, j, k)
        };
        let Some(n) = (pts[j] - pts[i]).cross(pts[k] - pts[i]).normalized() else {
            continue;
        };
        if !n.is_finite() {
            continue;
        }
        let d = n.dot(pts[i]);
        let count = count_inliers(pts, n, d, params.inlier_dist);
        if best.is_none_or(|(c, _, _)| count > c) {
            best = Some((count, n, d));
        }
        if exhaustive {
            break;
        }
    }
    let (count, mut n, mut d) = best.ok_or(StereoError::DegenerateCloud)?;
    let inliers: Vec<Vec3<T>> = pts
        .iter()
        .copied()
        .filter(|p| (n.dot(*p) - d).abs() <= params.inlier_dist)
        .collect();
    let mut count_final = count;
    if let Some((rn, rd)) = fit_plane(&inliers) {
        let rc = count_inliers(pts, rn, rd, params.inlier_dist);
        if rc >= count {
            (n, d, count_final) = (rn, rd, rc);
        }
    }
    let (normal, offset) = orient(n, d, params.up);
    Ok(GroundPlane {
        normal,
        offset,
        inlier_count: count_final,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ObstacleCluster<T> {
    pub centroid: Vec3<T>,
    pub min: Vec3<T>,
    pub max: Vec3<T>,
    pub point_count: usize,
    pub max_protrusion: T,
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Single-linkage clusters of the points standing more than `protrusion`
/// above `plane`, nearest to the camera first.
pub fn extract_clusters<T: Real>(
    pc: &PointCloud<T>,
    plane: &GroundPlane<T>,
    protrusion: T,
    link_dist: T,
    min_size: usize,
) -> Vec<ObstacleCluster<T>> {
    let above: Vec<(Vec3<T>, T)> = pc
        .points
        .iter()
        .map(|&p| (p, plane.signed_distance(p)))
        .filter(|&(_, h)| h > protrusion)
        .collect();
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, (p, _)) in above.iter().enumerate() {
        grid.entry(voxel_key(*p, link_dist)).or_default().push(i);
    }
    let mut sets = DisjointSets::new(above.len());
    let link_sq = link_dist * link_dist;
    for (i, (p, _)) in above.iter().enumerate() {
        let (kx, ky, kz) = voxel_key(*p, link_dist);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(cell) = grid.get(&(kx + dx, ky + dy, kz + dz)) else {
                        continue;
                    };
                    for &j in cell {
                        if j > i && (above[j].0 - *p).norm_sq() <= link_sq {
                            sets.union(i, j);
                        }
                    }
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..above.len() {
        let r = sets.find(i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<ObstacleCluster<T>> = groups
        .into_values()
        .filter(|g| g.len() >= min_size.max(1))
        .map(|g| {
            let mut sum = Vec3::zero();
            let mut lo = above[g[0]].0;
            let mut hi = lo;
            let mut top = T::neg_infinity();
            for &i in &g {
                let (p, h) = above[i];
                sum = sum + p;
                lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
                hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
                top = top.max(h);
            }
            ObstacleCluster {
                centroid: sum / T::lit(g.len() as f64),
                min: lo,
                max: hi,
                point_count: g.len(),
                max_protrusion: top,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.centroid
            .norm()
            .partial_cmp(&b.centroid.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}
