use serde::{Deserialize, Serialize};

use super::integral::SummedAreaTable;
use crate::image::Raster;
use crate::scalar::Real;

/// Scan direction of a sliding-window pass. A horizontal pass slides along
/// image rows and responds to lines crossing them (mostly vertical lines).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanDirection {
    Horizontal,
    Vertical,
}

/// Expected painted line width in pixels, per image row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthMap {
    Constant(u32),
    PerRow(Vec<u32>),
}

impl WidthMap {
    #[inline]
    pub fn at(&self, row: usize) -> usize {
        let w = match self {
            WidthMap::Constant(w) => *w,
            WidthMap::PerRow(v) => v.get(row).or(v.last()).copied().unwrap_or(1),
        };
        w.max(1) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseParams {
    /// Stride between scanlines.
    pub decimation: usize,
    /// Extent of each rectangle along the line, in pixels.
    pub along: usize,
    pub luma_weight: f64,
    pub green_weight: f64,
}

impl Default for ResponseParams {
    fn default() -> Self {
        Self {
            decimation: 4,
            along: 3,
            luma_weight: 1.0,
            green_weight: 1.0,
        }
    }
}

/// Per-site line score of one pass.
///
/// Site `(i, j)` sits at pixel `(i * stride_x, j * stride_y)`. Scanlines are
/// decimated, samples along a scanline are not, so one of the strides is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap<T> {
    pub width: usize,
    pub height: usize,
    pub stride_x: usize,
    pub stride_y: usize,
    pub direction: ScanDirection,
    pub values: Vec<T>,
}

impl<T: Real> Heatmap<T> {
    pub fn new(width: usize, height: usize, stride_x: usize, stride_y: usize, direction: ScanDirection) -> Self {
        Self {
            width,
            height,
            stride_x,
            stride_y,
            direction,
            values: vec![T::zero(); width * height],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[j * self.width + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.values[j * self.width + i] = v;
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }
}

struct Tables {
    luma: SummedAreaTable,
    green: SummedAreaTable,
}

impl Tables {
    /// (luma sum, green sum) over `[x0, x1) x [y0, y1)`.
    #[inline]
    fn sums(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> (f64, f64) {
        (
            self.luma.rect_sum(x0, y0, x1, y1) as f64,
            self.green.rect_sum(x0, y0, x1, y1) as f64,
        )
    }
}

/// Three-rectangle score at a full-resolution pixel, or 0 where the window
/// does not fit.
fn site_score(t: &Tables, x: usize, y: usize, dir: ScanDirection, w: usize, p: &ResponseParams) -> f64 {
    let (iw, ih) = (t.luma.width() as i64, t.luma.height() as i64);
    let w = w as i64;
    let a = p.along.max(1) as i64;
    // `across` runs along the scan, `along` across it
    let (c_across, c_along, n_across, n_along) = match dir {
        ScanDirection::Horizontal => (x as i64, y as i64, iw, ih),
        ScanDirection::Vertical => (y as i64, x as i64, ih, iw),
    };
    let m0 = c_across - w / 2;
    let (l0, r1) = (m0 - w, m0 + 2 * w);
    let (s0, s1) = (c_along - a / 2, c_along - a / 2 + a);
    if l0 < 0 || r1 > n_across || s0 < 0 || s1 > n_along {
        return 0.0;
    }
    let rect = |a0: i64, a1: i64| -> (f64, f64) {
        match dir {
            ScanDirection::Horizontal => t.sums(a0 as usize, s0 as usize, a1 as usize, s1 as usize),
            ScanDirection::Vertical => t.sums(s0 as usize, a0 as usize, s1 as usize, a1 as usize),
        }
    };
    let area = (w * a) as f64;
    let (ml, mg) = rect(m0, m0 + w);
    let (ll, lg) = rect(l0, m0);
    let (rl, rg) = rect(m0 + w, r1);
    let mid_luma = ml / area;
    let mid_green = mg / area;
    let side_luma = (ll + rl) / (2.0 * area);
    let side_green = (lg + rg) / (2.0 * area);
    let s = p.luma_weight * (mid_luma - side_luma) + p.green_weight * (side_green - mid_green);
    s.max(0.0)
}

/// One sliding-window pass: bright, non-green middle between dark, green sides.
pub fn line_response_pass<T: Real>(
    r: &Raster,
    direction: ScanDirection,
    width_map: &WidthMap,
    params: &ResponseParams,
) -> Heatmap<T> {
    let t = Tables {
        luma: SummedAreaTable::new(&r.luma),
        green: SummedAreaTable::new(&r.green),
    };
    let dec = params.decimation.max(1);
    let (sx, sy) = match direction {
        ScanDirection::Horizontal => (1, dec),
        ScanDirection::Vertical => (dec, 1),
    };
    let (w, h) = (r.width().div_ceil(sx), r.height().div_ceil(sy));
    let mut hm = Heatmap::new(w, h, sx, sy, direction);
    for j in 0..h {
        let y = j * sy;
        for i in 0..w {
            let x = i * sx;
            let v = site_score(&t, x, y, direction, width_map.at(y), params);
            hm.set(i, j, T::lit(v));
        }
    }
    hm
}
