use rayon::prelude::*;

use super::camera::CameraIntrinsics;
use super::CameraError;
use crate::geometry::Vec2;
use crate::image::{Gray, Image};
use crate::scalar::Real;

/// Turns a rectilinear render into a radially distorted one.
///
/// Each output pixel is undistorted with `(k1, k2)` and sampled from the
/// rectilinear source with the same focal length and principal point. Pixels
/// whose source falls outside the render stay black; [`fov_mask`] covers them.
pub fn emulate_wide_angle<T: Real, P: Copy + Default + Send + Sync>(
    src: &Image<P>,
    rect: &CameraIntrinsics<T>,
    k1: T,
    k2: T,
) -> Result<Image<P>, CameraError> {
    let distorted = rect.with_distortion(k1, k2)?;
    let w = src.width();
    let data = (0..w * src.height())
        .into_par_iter()
        .map(|k| {
            let px = Vec2::new(T::lit((k % w) as f64), T::lit((k / w) as f64));
            distorted
                .undistort(distorted.pixel_to_normalized(px))
                .ok()
                .map(|n| rect.normalized_to_pixel(n))
                .and_then(|s| src.get_checked(s.x.round().to_i64()?, s.y.round().to_i64()?))
                .unwrap_or_default()
        })
        .collect();
    Ok(Image::from_vec(w, src.height(), data))
}

/// Binary mask (255 valid, 0 masked) of pixels whose ray lies within
/// `fov_limit / 2` of the optical axis.
pub fn fov_mask<T: Real>(intr: &CameraIntrinsics<T>, fov_limit: T) -> Gray {
    let half = fov_limit / T::lit(2.0);
    // one part in 1e9 of slack so the exact full field of view keeps its corners
    let limit = half + half.abs() * T::lit(1e-9);
    Gray::from_fn(intr.width, intr.height, |x, y| {
        let px = Vec2::new(T::lit(x as f64), T::lit(y as f64));
        match intr.ray_angle(px) {
            Ok(a) if a <= limit => 255,
            _ => 0,
        }
    })
}

/// Blacks out every pixel where `mask` is zero.
pub fn apply_mask<P: Copy + Default>(img: &Image<P>, mask: &Gray) -> Image<P> {
    assert_eq!((img.width(), img.height()), (mask.width(), mask.height()));
    Image::from_fn(img.width(), img.height(), |x, y| {
        if mask.get(x, y) == 0 {
            P::default()
        } else {
            img.get(x, y)
        }
    })
}
