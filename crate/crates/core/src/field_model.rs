//! Field geometry, the planning grid and kick-edge generation.
//!
//! The field frame has its origin at the field center, `x` pointing toward the
//! opponent goal and `theta = 0` facing it. Grid cells are indexed by
//! `(row, col)` with `row` along `y` and `col` along `x`, both starting at the
//! `(-length/2, -width/2)` corner.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;
use crate::scalar::Real;

/// Bundled default field description (KidSize 9 x 6 m).
pub const DEFAULT_FIELD_JSON: &str = include_str!("../data/default_field.json");

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("point ({x}, {y}) lies outside the field grid")]
    OutOfField { x: f64, y: f64 },
    #[error("invalid field specification: {0}")]
    InvalidSpec(String),
    #[error("kick lengths must be non-empty and each longer than one cell ({0})")]
    InvalidKicks(String),
    #[error("grid index ({row}, {col}) out of range")]
    BadIndex { row: usize, col: usize },
}

/// A painted straight line, serialized as `[[x0, y0], [x1, y1]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[Vec2<T>; 2]", into = "[Vec2<T>; 2]")]
#[serde(bound = "T: Real")]
pub struct Segment<T> {
    pub a: Vec2<T>,
    pub b: Vec2<T>,
}

impl<T: Real> From<[Vec2<T>; 2]> for Segment<T> {
    fn from(v: [Vec2<T>; 2]) -> Self {
        Self { a: v[0], b: v[1] }
    }
}

impl<T: Real> From<Segment<T>> for [Vec2<T>; 2] {
    fn from(s: Segment<T>) -> Self {
        [s.a, s.b]
    }
}

impl<T: Real> Segment<T> {
    pub fn new(a: Vec2<T>, b: Vec2<T>) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> T {
        self.a.dist(self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Circle<T> {
    pub center: Vec2<T>,
    pub radius: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Goals<T> {
    pub left: Vec2<T>,
    pub right: Vec2<T>,
}

fn default_line_width<T: Real>() -> T {
    T::lit(0.05)
}

fn default_goal_width<T: Real>() -> T {
    T::lit(2.6)
}

/// Immutable field description shared by the planner, localizer and renderer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FieldSpec<T> {
    pub length: T,
    pub width: T,
    pub cell_size: T,
    #[serde(default = "default_line_width")]
    pub line_width: T,
    #[serde(default = "default_goal_width")]
    pub goal_width: T,
    pub goals: Goals<T>,
    pub line_segments: Vec<Segment<T>>,
    pub circle: Circle<T>,
}

/// Penalty and goal area dimensions used to lay out a standard field.
#[derive(Debug, Clone, Copy)]
pub struct AreaLayout<T> {
    pub penalty_depth: T,
    pub penalty_width: T,
    pub goal_area_depth: T,
    pub goal_area_width: T,
    pub circle_radius: T,
}

impl<T: Real> Default for AreaLayout<T> {
    fn default() -> Self {
        Self {
            penalty_depth: T::lit(2.0),
            penalty_width: T::lit(5.0),
            goal_area_depth: T::lit(1.0),
            goal_area_width: T::lit(3.0),
            circle_radius: T::lit(0.75),
        }
    }
}

/// Cell address in the planning grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridIndex {
    pub row: usize,
    pub col: usize,
}

impl GridIndex {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl<T: Real> Default for FieldSpec<T> {
    fn default() -> Self {
        Self::standard(T::lit(9.0), T::lit(6.0), T::lit(0.1), AreaLayout::default())
    }
}

impl<T: Real> FieldSpec<T> {
    /// Builds the usual line layout: border, halfway line, penalty and goal
    /// areas on both sides, and the center circle.
    pub fn standard(length: T, width: T, cell_size: T, areas: AreaLayout<T>) -> Self {
        let hl = length / T::lit(2.0);
        let hw = width / T::lit(2.0);
        let p = |x: T, y: T| Vec2::new(x, y);
        let mut segs = vec![
            Segment::new(p(-hl, -hw), p(hl, -hw)),
            Segment::new(p(hl, -hw), p(hl, hw)),
            Segment::new(p(hl, hw), p(-hl, hw)),
            Segment::new(p(-hl, hw), p(-hl, -hw)),
            Segment::new(p(T::zero(), -hw), p(T::zero(), hw)),
        ];
        for side in [-T::one(), T::one()] {
            for (depth, w) in [
                (areas.penalty_depth, areas.penalty_width),
                (areas.goal_area_depth, areas.goal_area_width),
            ] {
                let x0 = side * hl;
                let x1 = side * (hl - depth);
                let h = w / T::lit(2.0);
                segs.push(Segment::new(p(x0, -h), p(x1, -h)));
                segs.push(Segment::new(p(x1, -h), p(x1, h)));
                segs.push(Segment::new(p(x1, h), p(x0, h)));
            }
        }
        Self {
            length,
            width,
            cell_size,
            line_width: default_line_width(),
            goal_width: default_goal_width(),
            goals: Goals {
                left: p(-hl, T::zero()),
                right: p(hl, T::zero()),
            },
            line_segments: segs,
            circle: Circle {
                center: Vec2::zero(),
                radius: areas.circle_radius,
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self, FieldError> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| FieldError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// The bundled default description.
    pub fn bundled() -> Self {
        Self::from_json(DEFAULT_FIELD_JSON).expect("bundled field description is valid")
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        let bad = |m: String| Err(FieldError::InvalidSpec(m));
        if !(self.length > T::zero() && self.width > T::zero() && self.cell_size > T::zero()) {
            return bad("length, width and cell_size must be positive".into());
        }
        for (name, v) in [("length", self.length), ("width", self.width)] {
            let ratio = v / self.cell_size;
            if (ratio - ratio.round()).abs() > T::lit(1e-6) * ratio.max(T::one()) {
                return bad(format!("{name}/cell_size = {ratio} is not an integer"));
            }
        }
        let tol = T::lit(1e-6);
        let (hl, hw) = (self.half_length(), self.half_width());
        let inside = |q: Vec2<T>| q.x.abs() <= hl + tol && q.y.abs() <= hw + tol;
        for s in &self.line_segments {
            if !inside(s.a) || !inside(s.b) {
                return bad(format!("segment {:?} leaves the border rectangle", s));
            }
            if s.length() <= T::zero() {
                return bad("zero-length line segment".into());
            }
        }
        for (name, g, x) in [("left", self.goals.left, -hl), ("right", self.goals.right, hl)] {
            if (g.x - x).abs() > tol || g.y.abs() > tol {
                return bad(format!("{name} goal center must lie at ({x}, 0)"));
            }
        }
        if !(self.circle.radius > T::zero()) || !inside(self.circle.center) {
            return bad("center circle must have positive radius inside the field".into());
        }
        Ok(())
    }

    #[inline]
    pub fn half_length(&self) -> T {
        self.length / T::lit(2.0)
    }

    #[inline]
    pub fn half_width(&self) -> T {
        self.width / T::lit(2.0)
    }

    /// Number of grid columns (along `x`).
    pub fn cols(&self) -> usize {
        (self.length / self.cell_size).round().to_usize().unwrap_or(0)
    }

    /// Number of grid rows (along `y`).
    pub fn rows(&self) -> usize {
        (self.width / self.cell_size).round().to_usize().unwrap_or(0)
    }

    pub fn cell_count(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn contains_index(&self, i: GridIndex) -> bool {
        i.row < self.rows() && i.col < self.cols()
    }

    /// Dense index `row * cols + col`.
    #[inline]
    pub fn linear(&self, i: GridIndex) -> usize {
        i.row * self.cols() + i.col
    }

    #[inline]
    pub fn from_linear(&self, k: usize) -> GridIndex {
        GridIndex::new(k / self.cols(), k % self.cols())
    }

    /// Whether `p` lies on the field (inside the border rectangle).
    pub fn contains(&self, p: Vec2<T>) -> bool {
        p.x.abs() <= self.half_length() && p.y.abs() <= self.half_width()
    }

    /// Goal posts as point features: both posts of both goals.
    pub fn goal_posts(&self) -> [Vec2<T>; 4] {
        let h = self.goal_width / T::lit(2.0);
        let (l, r) = (self.goals.left, self.goals.right);
        [
            Vec2::new(l.x, l.y - h),
            Vec2::new(l.x, l.y + h),
            Vec2::new(r.x, r.y - h),
            Vec2::new(r.x, r.y + h),
        ]
    }

    /// The opponent goal center (positive `x`).
    pub fn opponent_goal(&self) -> Vec2<T> {
        self.goals.right
    }

    pub fn cell_center(&self, i: GridIndex) -> Vec2<T> {
        let half = T::lit(0.5);
        Vec2::new(
            -self.half_length() + (T::lit(i.col as f64) + half) * self.cell_size,
            -self.half_width() + (T::lit(i.row as f64) + half) * self.cell_size,
        )
    }

    /// Nearest cell along one axis; exact midpoints go to the smaller index.
    fn axis_cell(&self, offset: T, n: usize) -> usize {
        let mut f = offset / self.cell_size;
        let r = f.round();
        if (f - r).abs() <= T::lit(1e-9) * r.abs().max(T::one()) {
            f = r;
        }
        let k = f.ceil() - T::one();
        let k = k.max(T::zero()).to_usize().unwrap_or(0);
        k.min(n - 1)
    }

    pub fn pose_to_cell(&self, p: Vec2<T>) -> Result<GridIndex, FieldError> {
        let margin = self.cell_size / T::lit(2.0);
        let (hl, hw) = (self.half_length(), self.half_width());
        if !(p.x.abs() <= hl + margin && p.y.abs() <= hw + margin) {
            return Err(FieldError::OutOfField {
                x: p.x.to_f64_lossy(),
                y: p.y.to_f64_lossy(),
            });
        }
        Ok(GridIndex::new(
            self.axis_cell(p.y + hw, self.rows()),
            self.axis_cell(p.x + hl, self.cols()),
        ))
    }
}

/// Free-function form of [`FieldSpec::pose_to_cell`].
pub fn pose_to_cell<T: Real>(p: Vec2<T>, spec: &FieldSpec<T>) -> Result<GridIndex, FieldError> {
    spec.pose_to_cell(p)
}

/// Free-function form of [`FieldSpec::cell_center`].
pub fn cell_center<T: Real>(i: GridIndex, spec: &FieldSpec<T>) -> Vec2<T> {
    spec.cell_center(i)
}

/// Relative grid offsets reachable by one kick, shared by every cell.
///
/// Membership is an annulus test: the center distance lies within
/// `cell_size / 2` of some kick length. Distances are computed from integer
/// offsets so the edge set is translation invariant and symmetric.
#[derive(Debug, Clone)]
pub struct KickOffsets<T> {
    offsets: Vec<(i64, i64, T)>,
}

impl<T: Real> KickOffsets<T> {
    pub fn new(kick_lengths: &[T], cell_size: T) -> Result<Self, FieldError> {
        if kick_lengths.is_empty() {
            return Err(FieldError::InvalidKicks("empty kick set".into()));
        }
        if let Some(k) = kick_lengths.iter().find(|&&k| !(k > cell_size)) {
            return Err(FieldError::InvalidKicks(format!("kick length {k}")));
        }
        let band = cell_size / T::lit(2.0);
        let eps = T::lit(1e-9);
        let max_k = kick_lengths.iter().fold(T::zero(), |a, &b| a.max(b));
        let reach = ((max_k + band) / cell_size).ceil().to_i64().unwrap_or(0);
        let mut offsets = Vec::new();
        for dr in -reach..=reach {
            for dc in -reach..=reach {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let d = T::lit(((dr * dr + dc * dc) as f64).sqrt()) * cell_size;
                if kick_lengths.iter().any(|&k| (d - k).abs() <= band + eps) {
                    offsets.push((dr, dc, d));
                }
            }
        }
        Ok(Self { offsets })
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(i64, i64, T)> {
        self.offsets.iter()
    }

    /// In-field neighbours of `i` with their center distance, in offset order.
    pub fn neighbours<'a>(
        &'a self,
        i: GridIndex,
        spec: &'a FieldSpec<T>,
    ) -> impl Iterator<Item = (GridIndex, T)> + 'a {
        let (rows, cols) = (spec.rows() as i64, spec.cols() as i64);
        self.offsets.iter().filter_map(move |&(dr, dc, d)| {
            let r = i.row as i64 + dr;
            let c = i.col as i64 + dc;
            (r >= 0 && c >= 0 && r < rows && c < cols)
                .then(|| (GridIndex::new(r as usize, c as usize), d))
        })
    }
}

/// Every in-field cell reachable from `i` by one of `kick_lengths`, sorted by
/// index.
pub fn kick_edges<T: Real>(
    i: GridIndex,
    kick_lengths: &[T],
    spec: &FieldSpec<T>,
) -> Result<Vec<(GridIndex, T)>, FieldError> {
    if !spec.contains_index(i) {
        return Err(FieldError::BadIndex {
            row: i.row,
            col: i.col,
        });
    }
    let offsets = KickOffsets::new(kick_lengths, spec.cell_size)?;
    let mut out: Vec<_> = offsets.neighbours(i, spec).collect();
    out.sort_by_key(|e| e.0);
    Ok(out)
}
