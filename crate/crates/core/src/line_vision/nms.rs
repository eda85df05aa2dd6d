use super::response::{Heatmap, ScanDirection};
use crate::geometry::Vec2;
use crate::scalar::Real;

/// Local maxima of a heatmap along its scan direction, as `(i, j)` sites.
///
/// A site survives when its score reaches `threshold`, is strictly greater
/// than every earlier site within `radius` on its scanline and not smaller
/// than any later one, so a plateau yields only its first site.
pub fn nms_sites<T: Real>(h: &Heatmap<T>, radius: usize, threshold: T) -> Vec<(usize, usize)> {
    let radius = radius.max(1);
    let (n_lines, n_along) = match h.direction {
        ScanDirection::Horizontal => (h.height, h.width),
        ScanDirection::Vertical => (h.width, h.height),
    };
    let at = |line: usize, k: usize| match h.direction {
        ScanDirection::Horizontal => h.get(k, line),
        ScanDirection::Vertical => h.get(line, k),
    };
    let mut out = Vec::new();
    for line in 0..n_lines {
        for k in 0..n_along {
            let s = at(line, k);
            if s < threshold {
                continue;
            }
            let lo = k.saturating_sub(radius);
            let hi = (k + radius).min(n_along - 1);
            let before_ok = (lo..k).all(|q| s > at(line, q));
            let after_ok = before_ok && (k + 1..=hi).all(|q| s >= at(line, q));
            if after_ok {
                out.push(match h.direction {
                    ScanDirection::Horizontal => (k, line),
                    ScanDirection::Vertical => (line, k),
                });
            }
        }
    }
    out.sort_by_key(|&(i, j)| (j, i));
    out
}

/// Local maxima mapped to full-resolution pixel coordinates, refined to
/// sub-pixel precision with a parabola through the peak and its neighbours.
pub fn nms<T: Real>(h: &Heatmap<T>, radius: usize, threshold: T) -> Vec<Vec2<T>> {
    nms_sites(h, radius, threshold)
        .into_iter()
        .map(|(i, j)| {
            let (mut x, mut y) = (T::lit((i * h.stride_x) as f64), T::lit((j * h.stride_y) as f64));
            let s0 = h.get(i, j);
            let neighbours = match h.direction {
                ScanDirection::Horizontal if i > 0 && i + 1 < h.width => Some((h.get(i - 1, j), h.get(i + 1, j))),
                ScanDirection::Vertical if j > 0 && j + 1 < h.height => Some((h.get(i, j - 1), h.get(i, j + 1))),
                _ => None,
            };
            if let Some((a, b)) = neighbours {
                let denom = a - T::lit(2.0) * s0 + b;
                if denom < T::zero() {
                    let off = (T::lit(0.5) * (a - b) / denom).max(T::lit(-0.5)).min(T::lit(0.5));
                    match h.direction {
                        ScanDirection::Horizontal => x += off * T::lit(h.stride_x as f64),
                        ScanDirection::Vertical => y += off * T::lit(h.stride_y as f64),
                    }
                }
            }
            Vec2::new(x, y)
        })
        .collect()
}
