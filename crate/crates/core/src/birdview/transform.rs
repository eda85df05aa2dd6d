use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::camera::{project, CameraExtrinsics, CameraIntrinsics};
use crate::geometry::{Vec2, Vec3};
use crate::image::{Image, Raster};
use crate::scalar::Real;

fn d_yaw<T: Real>() -> T {
    T::zero()
}

/// Virtual top-down camera: an orthographic view of the field plane.
///
/// Image up points along `yaw` in the field frame, image right 90 degrees
/// clockwise from it. Pixel centers sit at integer coordinates and
/// `view_center` maps to the middle of the image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BirdviewSpec<T> {
    pub out_width: usize,
    pub out_height: usize,
    pub meters_per_pixel: T,
    pub view_center: Vec2<T>,
    #[serde(default = "d_yaw")]
    pub yaw: T,
}

impl<T: Real> Default for BirdviewSpec<T> {
    fn default() -> Self {
        Self {
            out_width: 640,
            out_height: 480,
            meters_per_pixel: T::lit(0.01),
            view_center: Vec2::zero(),
            yaw: T::zero(),
        }
    }
}

impl<T: Real> BirdviewSpec<T> {
    fn axes(&self) -> (Vec2<T>, Vec2<T>) {
        let up = Vec2::from_angle(self.yaw);
        let right = Vec2::new(up.y, -up.x);
        (up, right)
    }

    fn center_px(&self) -> Vec2<T> {
        let two = T::lit(2.0);
        Vec2::new(
            T::lit(self.out_width as f64 - 1.0) / two,
            T::lit(self.out_height as f64 - 1.0) / two,
        )
    }

    pub fn pixel_to_field(&self, px: Vec2<T>) -> Vec2<T> {
        let (up, right) = self.axes();
        let c = self.center_px();
        self.view_center + right * ((px.x - c.x) * self.meters_per_pixel) + up * ((c.y - px.y) * self.meters_per_pixel)
    }

    pub fn field_to_pixel(&self, p: Vec2<T>) -> Vec2<T> {
        let (up, right) = self.axes();
        let c = self.center_px();
        let d = p - self.view_center;
        Vec2::new(
            c.x + d.dot(right) / self.meters_per_pixel,
            c.y - d.dot(up) / self.meters_per_pixel,
        )
    }

    /// Birdview centered `ahead` meters in front of a robot, image up along its heading.
    pub fn ahead_of(robot: &crate::geometry::FieldPose<T>, ahead: T, base: &Self) -> Self {
        Self {
            view_center: robot.to_field(Vec2::new(ahead, T::zero())),
            yaw: robot.theta,
            ..*base
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    Nearest,
    Bilinear,
}

/// Source pixel coordinates for every birdview pixel (row-major), `None`
/// where the field point is behind the camera or outside the input image.
///
/// Only the output resolution is visited; the distorted input is sampled
/// directly without building a rectified intermediate image.
pub fn birdview_map<T: Real>(
    ex: &CameraExtrinsics<T>,
    intr: &CameraIntrinsics<T>,
    spec: &BirdviewSpec<T>,
) -> Vec<Option<Vec2<T>>> {
    let w = spec.out_width;
    (0..w * spec.out_height)
        .into_par_iter()
        .map(|k| {
            let px = Vec2::new(T::lit((k % w) as f64), T::lit((k / w) as f64));
            let g = spec.pixel_to_field(px);
            project(Vec3::new(g.x, g.y, T::zero()), ex, intr)
                .ok()
                .filter(|s| intr.contains(*s))
        })
        .collect()
}

/// Pixels that support bilinear blending.
pub trait Blend: Copy + Default + Send + Sync {
    fn blend(p: [Self; 4], w: [f64; 4]) -> Self;
}

impl Blend for u8 {
    fn blend(p: [u8; 4], w: [f64; 4]) -> u8 {
        let v: f64 = p.iter().zip(w).map(|(&a, b)| a as f64 * b).sum();
        v.round().clamp(0.0, 255.0) as u8
    }
}

impl Blend for [u8; 3] {
    fn blend(p: [[u8; 3]; 4], w: [f64; 4]) -> [u8; 3] {
        let mut out = [0u8; 3];
        for (c, o) in out.iter_mut().enumerate() {
            *o = u8::blend([p[0][c], p[1][c], p[2][c], p[3][c]], w);
        }
        out
    }
}

/// Resamples `src` at the given coordinates; unmapped pixels are black.
pub fn remap<T: Real, P: Blend>(
    src: &Image<P>,
    map: &[Option<Vec2<T>>],
    width: usize,
    height: usize,
    sampling: Sampling,
) -> Image<P> {
    assert_eq!(map.len(), width * height);
    let data = map
        .par_iter()
        .map(|m| match (m, sampling) {
            (None, _) => P::default(),
            (Some(s), Sampling::Nearest) => src
                .get_checked(s.x.round().to_i64().unwrap_or(-1), s.y.round().to_i64().unwrap_or(-1))
                .unwrap_or_default(),
            (Some(s), Sampling::Bilinear) => {
                let (x, y) = (s.x.to_f64_lossy(), s.y.to_f64_lossy());
                let (x0, y0) = (x.floor(), y.floor());
                let (fx, fy) = (x - x0, y - y0);
                let (xi, yi) = (x0 as i64, y0 as i64);
                let at = |dx: i64, dy: i64| {
                    src.get_checked((xi + dx).clamp(0, src.width() as i64 - 1), (yi + dy).clamp(0, src.height() as i64 - 1))
                        .unwrap_or_default()
                };
                P::blend(
                    [at(0, 0), at(1, 0), at(0, 1), at(1, 1)],
                    [(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy],
                )
            }
        })
        .collect();
    Image::from_vec(width, height, data)
}

/// Top-down view of the field plane as seen by the camera.
pub fn birdview_transform<T: Real>(
    r: &Raster,
    ex: &CameraExtrinsics<T>,
    intr: &CameraIntrinsics<T>,
    spec: &BirdviewSpec<T>,
    sampling: Sampling,
) -> Raster {
    let map = birdview_map(ex, intr, spec);
    let (w, h) = (spec.out_width, spec.out_height);
    Raster::new(
        remap(&r.luma, &map, w, h, sampling),
        remap(&r.green, &map, w, h, sampling),
    )
}
