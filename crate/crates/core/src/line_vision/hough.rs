//! Progressive probabilistic Hough transform over a sparse point set.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LineSegment;
use crate::geometry::Vec2;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoughParams {
    /// Accumulator distance resolution, pixels.
    pub rho_res: f64,
    /// Accumulator angle resolution, radians.
    pub theta_res: f64,
    /// Votes a bin needs before its line is traced.
    pub threshold: u32,
    pub min_length: f64,
    /// Largest gap bridged while walking a line, pixels.
    pub max_gap: f64,
    /// Points within this distance of a traced line belong to it.
    pub corridor: f64,
    pub seed: u64,
}

impl Default for HoughParams {
    fn default() -> Self {
        Self {
            rho_res: 1.0,
            theta_res: std::f64::consts::PI / 180.0,
            threshold: 6,
            min_length: 20.0,
            max_gap: 12.0,
            corridor: 1.5,
            seed: 0,
        }
    }
}

struct Accumulator {
    n_theta: usize,
    n_rho: usize,
    trig: Vec<(f64, f64)>,
    rho_res: f64,
    votes: Vec<u32>,
}

impl Accumulator {
    fn new(theta_res: f64, rho_res: f64, max_rho: f64) -> Self {
        let n_theta = ((std::f64::consts::PI / theta_res).round() as usize).max(1);
        let step = std::f64::consts::PI / n_theta as f64;
        let n_rho = 2 * (max_rho / rho_res).ceil() as usize + 3;
        Self {
            n_theta,
            n_rho,
            trig: (0..n_theta).map(|t| ((t as f64 * step).cos(), (t as f64 * step).sin())).collect(),
            rho_res,
            votes: vec![0; n_theta * n_rho],
        }
    }

    #[inline]
    fn bin(&self, t: usize, p: (f64, f64)) -> usize {
        let (c, s) = self.trig[t];
        let r = ((p.0 * c + p.1 * s) / self.rho_res).round() as i64 + (self.n_rho / 2) as i64;
        t * self.n_rho + r as usize
    }

    /// Adds the point's votes and returns the best `(votes, theta bin)`.
    fn vote(&mut self, p: (f64, f64)) -> (u32, usize) {
        let mut best = (0, 0);
        for t in 0..self.n_theta {
            let b = self.bin(t, p);
            self.votes[b] += 1;
            if self.votes[b] > best.0 {
                best = (self.votes[b], t);
            }
        }
        best
    }

    fn unvote(&mut self, p: (f64, f64)) {
        for t in 0..self.n_theta {
            let b = self.bin(t, p);
            self.votes[b] = self.votes[b].saturating_sub(1);
        }
    }
}

/// Total-least-squares fit; returns the covering segment of `pts`.
pub(crate) fn fit_segment(pts: &[(f64, f64)]) -> Option<(Vec2<f64>, Vec2<f64>)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let (dx, dy) = (p.0 - mx, p.1 - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let d = Vec2::new(angle.cos(), angle.sin());
    let c = Vec2::new(mx, my);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        let t = (Vec2::new(p.0, p.1) - c).dot(d);
        lo = lo.min(t);
        hi = hi.max(t);
    }
    Some((c + d * lo, c + d * hi))
}

/// Detects line segments among `points`.
///
/// Points are visited in a seeded random order. Each visited point votes; if
/// its best bin has enough votes, the line through it at that angle is walked
/// in both directions collecting points within the corridor and bridging gaps
/// up to `max_gap`. The walked points are consumed; when their covering
/// segment is long enough it is emitted and their votes are withdrawn.
pub fn hough_segments<T: Real>(points: &[Vec2<T>], params: &HoughParams) -> Vec<LineSegment<T>> {
    if points.is_empty() {
        return Vec::new();
    }
    let raw: Vec<(f64, f64)> = points.iter().map(|p| (p.x.to_f64_lossy(), p.y.to_f64_lossy())).collect();
    let (ox, oy) = raw
        .iter()
        .fold((f64::INFINITY, f64::INFINITY), |a, p| (a.0.min(p.0), a.1.min(p.1)));
    let pts: Vec<(f64, f64)> = raw.iter().map(|p| (p.0 - ox, p.1 - oy)).collect();
    let max_rho = pts.iter().map(|p| p.0.hypot(p.1)).fold(0.0, f64::max) + 2.0;
    let mut acc = Accumulator::new(params.theta_res, params.rho_res, max_rho);

    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));
    let mut alive = vec![true; pts.len()];
    let mut voted = vec![false; pts.len()];
    let mut out = Vec::new();

    for &seed in &order {
        if !alive[seed] {
            continue;
        }
        let (votes, t) = acc.vote(pts[seed]);
        voted[seed] = true;
        if votes < params.threshold {
            continue;
        }
        let (c, s) = acc.trig[t];
        let normal = Vec2::new(c, s);
        let dir = Vec2::new(-s, c);
        let origin = Vec2::new(pts[seed].0, pts[seed].1);

        let mut on_line: Vec<(f64, usize)> = (0..pts.len())
            .filter(|&k| alive[k])
            .filter_map(|k| {
                let d = Vec2::new(pts[k].0, pts[k].1) - origin;
                (d.dot(normal).abs() <= params.corridor).then(|| (d.dot(dir), k))
            })
            .collect();
        on_line.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let Some(at) = on_line.iter().position(|&(_, k)| k == seed) else {
            continue;
        };
        let mut lo = at;
        while lo > 0 && on_line[lo].0 - on_line[lo - 1].0 <= params.max_gap {
            lo -= 1;
        }
        let mut hi = at;
        while hi + 1 < on_line.len() && on_line[hi + 1].0 - on_line[hi].0 <= params.max_gap {
            hi += 1;
        }
        let members: Vec<usize> = on_line[lo..=hi].iter().map(|&(_, k)| k).collect();
        let fitted = fit_segment(&members.iter().map(|&k| pts[k]).collect::<Vec<_>>());
        let good = fitted.is_some_and(|(a, b)| a.dist(b) >= params.min_length);
        for &k in &members {
            alive[k] = false;
            if good && voted[k] {
                acc.unvote(pts[k]);
            }
        }
        if let (true, Some((a, b))) = (good, fitted) {
            let shift = Vec2::new(ox, oy);
            out.push(LineSegment::new((a + shift).cast(), (b + shift).cast()));
        }
    }
    out
}
