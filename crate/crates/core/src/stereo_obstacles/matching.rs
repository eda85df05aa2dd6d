use rayon::prelude::*;

use super::StereoError;
use crate::image::Gray;

/// Integer disparity per left-image pixel; invalid pixels hold `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisparityMap {
    pub width: usize,
    pub height: usize,
    values: Vec<u16>,
}

const INVALID: u16 = u16::MAX;

/// Relative margin by which the best match must beat every non-adjacent shift.
pub const UNIQUENESS: f64 = 0.1;

impl DisparityMap {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![INVALID; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Option<u16> {
        let v = self.values[y * self.width + x];
        (v != INVALID).then_some(v)
    }

    pub fn set(&mut self, x: usize, y: usize, d: Option<u16>) {
        self.values[y * self.width + x] = d.unwrap_or(INVALID);
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|&&v| v != INVALID).count()
    }
}

/// Windowed SAD cost of every disparity at every column of row `y`:
/// `cost[d * w + x]` compares left `x` with right `x - d`, `u32::MAX` where
/// the window leaves either image.
fn row_costs(left: &Gray, right: &Gray, y: usize, r: usize, max_d: usize) -> Vec<u32> {
    let w = left.width();
    let mut out = vec![u32::MAX; (max_d + 1) * w];
    let mut col = vec![0u32; w];
    for d in 0..=max_d {
        if d + 2 * r >= w {
            break;
        }
        for x in d..w {
            let mut s = 0u32;
            for yy in y - r..=y + r {
                s += (left.get(x, yy) as i32 - right.get(x - d, yy) as i32).unsigned_abs();
            }
            col[x] = s;
        }
        let row = &mut out[d * w..(d + 1) * w];
        let mut acc: u32 = col[d..d + 2 * r + 1].iter().sum();
        row[d + r] = acc;
        for x in d + r + 1..w - r {
            acc = acc + col[x + r] - col[x - r - 1];
            row[x] = acc;
        }
    }
    out
}

/// Sum-of-absolute-differences block matching on a rectified pair.
///
/// The left disparity of each pixel is the smallest-cost shift in
/// `[0, max_disparity]`, ties going to the smaller shift. A right-to-left
/// match is computed from the same costs and pixels whose two disparities
/// differ by more than one are invalidated, as are pixels where a shift more
/// than one away from the best costs less than [`UNIQUENESS`] more.
pub fn block_match(left: &Gray, right: &Gray, window: usize, max_disparity: usize) -> Result<DisparityMap, StereoError> {
    if left.width() != right.width() || left.height() != right.height() {
        return Err(StereoError::DimensionMismatch {
            left: (left.width(), left.height()),
            right: (right.width(), right.height()),
        });
    }
    if window % 2 == 0 || window == 0 {
        return Err(StereoError::InvalidParameter(format!("window must be odd, got {window}")));
    }
    let (w, h) = (left.width(), left.height());
    let r = window / 2;
    let max_d = max_disparity.min(u16::MAX as usize - 1);
    let mut map = DisparityMap::new(w, h);
    if w <= 2 * r || h <= 2 * r {
        return Ok(map);
    }
    let rows: Vec<(usize, Vec<Option<u16>>)> = (r..h - r)
        .into_par_iter()
        .map(|y| {
            let cost = row_costs(left, right, y, r, max_d);
            let best = |pick: &dyn Fn(usize) -> Option<usize>| -> Option<usize> {
                let mut b: Option<(u32, usize)> = None;
                for d in 0..=max_d {
                    let Some(c) = pick(d).map(|i| cost[i]) else { continue };
                    if c != u32::MAX && b.is_none_or(|(bc, _)| c < bc) {
                        b = Some((c, d));
                    }
                }
                b.map(|(_, d)| d)
            };
            let left_d: Vec<Option<usize>> = (0..w).map(|x| best(&|d| Some(d * w + x))).collect();
            let right_d: Vec<Option<usize>> = (0..w)
                .map(|xr| best(&|d| (xr + d < w).then_some(d * w + xr + d)))
                .collect();
            let row = (0..w)
                .map(|x| {
                    let dl = left_d[x]?;
                    let dr = right_d[x - dl]?;
                    let best = cost[dl * w + x] as f64;
                    let unique = (0..=max_d)
                        .filter(|d| d.abs_diff(dl) > 1)
                        .map(|d| cost[d * w + x])
                        .all(|c| c == u32::MAX || c as f64 >= best * (1.0 + UNIQUENESS));
                    (dl.abs_diff(dr) <= 1 && unique).then_some(dl as u16)
                })
                .collect();
            (y, row)
        })
        .collect();
    for (y, row) in rows {
        for (x, d) in row.into_iter().enumerate() {
            map.set(x, y, d);
        }
    }
    Ok(map)
}
