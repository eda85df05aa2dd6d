//! Pinhole camera with two-coefficient radial distortion.
//!
//! Optical frame: `x` right, `y` down, `z` along the optical axis. The camera
//! body frame follows the field convention (`x` forward, `y` left, `z` up) and
//! is placed in the field by roll/pitch/yaw; positive pitch looks down.

use serde::{Deserialize, Serialize};

use super::CameraError;
use crate::geometry::{FieldPose, Mat3, Vec2, Vec3};
use crate::scalar::Real;

const MAX_FIXED_POINT_ITERS: usize = 20;
const UNDISTORT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CameraIntrinsics<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    #[serde(default)]
    pub k1: T,
    #[serde(default)]
    pub k2: T,
    pub width: usize,
    pub height: usize,
}

impl<T: Real> CameraIntrinsics<T> {
    /// Validated constructor. Rejects distortion coefficients whose radial
    /// map is not strictly increasing over the image.
    pub fn new(fx: T, fy: T, cx: T, cy: T, k1: T, k2: T, width: usize, height: usize) -> Result<Self, CameraError> {
        let c = Self {
            fx,
            fy,
            cx,
            cy,
            k1,
            k2,
            width,
            height,
        };
        c.validate()?;
        Ok(c)
    }

    /// Distortion-free camera with the given horizontal field of view and the
    /// principal point at the image center.
    pub fn from_hfov(width: usize, height: usize, hfov: T) -> Result<Self, CameraError> {
        let two = T::lit(2.0);
        let cx = T::lit(width as f64 - 1.0) / two;
        let cy = T::lit(height as f64 - 1.0) / two;
        let f = T::lit(width as f64) / two / (hfov / two).tan();
        Self::new(f, f, cx, cy, T::zero(), T::zero(), width, height)
    }

    pub fn with_distortion(&self, k1: T, k2: T) -> Result<Self, CameraError> {
        Self::new(self.fx, self.fy, self.cx, self.cy, k1, k2, self.width, self.height)
    }

    pub fn validate(&self) -> Result<(), CameraError> {
        let bad = |m: &str| Err(CameraError::InvalidIntrinsics(m.to_string()));
        if !(self.fx > T::zero() && self.fy > T::zero()) {
            return bad("focal lengths must be positive");
        }
        if self.width == 0 || self.height == 0 {
            return bad("image dimensions must be positive");
        }
        let (w, h) = (T::lit(self.width as f64), T::lit(self.height as f64));
        if !(self.cx >= T::zero() && self.cx < w && self.cy >= T::zero() && self.cy < h) {
            return bad("principal point must lie inside the image");
        }
        self.check_monotonic()
    }

    /// Largest distorted normalized radius present in the image.
    fn max_distorted_radius(&self) -> T {
        let corners = [
            (T::zero(), T::zero()),
            (T::lit(self.width as f64 - 1.0), T::zero()),
            (T::zero(), T::lit(self.height as f64 - 1.0)),
            (T::lit(self.width as f64 - 1.0), T::lit(self.height as f64 - 1.0)),
        ];
        corners
            .iter()
            .map(|&(u, v)| self.pixel_to_normalized(Vec2::new(u, v)).norm())
            .fold(T::zero(), T::max)
    }

    fn check_monotonic(&self) -> Result<(), CameraError> {
        if self.k1 >= T::zero() && self.k2 >= T::zero() {
            return Ok(());
        }
        let target = self.max_distorted_radius();
        let step = (target / T::lit(2000.0)).max(T::lit(1e-6));
        let mut r = T::zero();
        for _ in 0..200_000 {
            let r2 = r * r;
            let slope = T::one() + T::lit(3.0) * self.k1 * r2 + T::lit(5.0) * self.k2 * r2 * r2;
            if slope <= T::zero() {
                return Err(CameraError::NonMonotonicDistortion {
                    k1: self.k1.to_f64_lossy(),
                    k2: self.k2.to_f64_lossy(),
                });
            }
            if self.distort_radius(r) >= target {
                return Ok(());
            }
            r += step;
        }
        Err(CameraError::NonMonotonicDistortion {
            k1: self.k1.to_f64_lossy(),
            k2: self.k2.to_f64_lossy(),
        })
    }

    /// Forward radial map `r' = r (1 + k1 r^2 + k2 r^4)`.
    #[inline]
    pub fn distort_radius(&self, r: T) -> T {
        let r2 = r * r;
        r * (T::one() + self.k1 * r2 + self.k2 * r2 * r2)
    }

    #[inline]
    pub fn distort(&self, n: Vec2<T>) -> Vec2<T> {
        let r2 = n.norm_sq();
        n * (T::one() + self.k1 * r2 + self.k2 * r2 * r2)
    }

    /// Inverts the radial map by fixed-point iteration, with a Newton polish
    /// for points the plain iteration does not settle within its budget.
    pub fn undistort(&self, d: Vec2<T>) -> Result<Vec2<T>, CameraError> {
        let rd = d.norm();
        if rd == T::zero() || (self.k1 == T::zero() && self.k2 == T::zero()) {
            return Ok(d);
        }
        let tol = T::solver_tol(UNDISTORT_TOL);
        let mut r = rd;
        for _ in 0..MAX_FIXED_POINT_ITERS {
            let r2 = r * r;
            let next = rd / (T::one() + self.k1 * r2 + self.k2 * r2 * r2);
            let done = (next - r).abs() <= tol * rd.max(T::one());
            r = next;
            if done {
                return Ok(d * (r / rd));
            }
        }
        for _ in 0..MAX_FIXED_POINT_ITERS {
            let r2 = r * r;
            let f = self.distort_radius(r) - rd;
            let df = T::one() + T::lit(3.0) * self.k1 * r2 + T::lit(5.0) * self.k2 * r2 * r2;
            if df <= T::zero() {
                break;
            }
            let step = f / df;
            r -= step;
            if step.abs() <= tol * rd.max(T::one()) {
                return Ok(d * (r / rd));
            }
        }
        Err(CameraError::NoConvergence)
    }

    #[inline]
    pub fn pixel_to_normalized(&self, px: Vec2<T>) -> Vec2<T> {
        Vec2::new((px.x - self.cx) / self.fx, (px.y - self.cy) / self.fy)
    }

    #[inline]
    pub fn normalized_to_pixel(&self, n: Vec2<T>) -> Vec2<T> {
        Vec2::new(self.fx * n.x + self.cx, self.fy * n.y + self.cy)
    }

    /// Angle between the optical axis and the ray through `px`.
    pub fn ray_angle(&self, px: Vec2<T>) -> Result<T, CameraError> {
        Ok(self.undistort(self.pixel_to_normalized(px))?.norm().atan())
    }

    /// Full diagonal field of view, corner to corner.
    pub fn diagonal_fov(&self) -> Result<T, CameraError> {
        let (w, h) = (T::lit(self.width as f64 - 1.0), T::lit(self.height as f64 - 1.0));
        let mut m = T::zero();
        for (u, v) in [(T::zero(), T::zero()), (w, T::zero()), (T::zero(), h), (w, h)] {
            m = m.max(self.ray_angle(Vec2::new(u, v))?);
        }
        Ok(m * T::lit(2.0))
    }

    pub fn contains(&self, px: Vec2<T>) -> bool {
        px.x >= T::lit(-0.5)
            && px.y >= T::lit(-0.5)
            && px.x < T::lit(self.width as f64 - 0.5)
            && px.y < T::lit(self.height as f64 - 0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CameraExtrinsics<T> {
    /// Camera center in the field frame, meters.
    pub position: Vec3<T>,
    #[serde(default)]
    pub roll: T,
    pub pitch: T,
    pub yaw: T,
}

impl<T: Real> CameraExtrinsics<T> {
    pub fn new(position: Vec3<T>, roll: T, pitch: T, yaw: T) -> Self {
        Self {
            position,
            roll,
            pitch,
            yaw,
        }
    }

    /// Camera looking straight down from `height` above `(x, y)`, image up
    /// pointing along `yaw`.
    pub fn looking_down(x: T, y: T, height: T, yaw: T) -> Self {
        Self::new(Vec3::new(x, y, height), T::zero(), T::FRAC_PI_2(), yaw)
    }

    /// Interprets `self` as a mount relative to the robot base and returns the
    /// field-frame extrinsics for a robot standing at `robot`.
    pub fn mounted_on(&self, robot: &FieldPose<T>) -> Self {
        let p = robot.to_field(self.position.xy());
        Self::new(
            Vec3::new(p.x, p.y, self.position.z),
            self.roll,
            self.pitch,
            self.yaw + robot.theta,
        )
    }

    /// Body-to-field rotation.
    pub fn rotation(&self) -> Mat3<T> {
        Mat3::rot_z(self.yaw)
            .mul_mat(&Mat3::rot_y(self.pitch))
            .mul_mat(&Mat3::rot_x(self.roll))
    }

    /// Field direction of an optical-frame ray.
    pub fn ray_to_field(&self, optical: Vec3<T>) -> Vec3<T> {
        let body = Vec3::new(optical.z, -optical.x, -optical.y);
        self.rotation().mul_vec(body)
    }

    /// Field point expressed in the optical frame.
    pub fn field_to_optical(&self, p: Vec3<T>) -> Vec3<T> {
        let b = self.rotation().transpose().mul_vec(p - self.position);
        Vec3::new(-b.y, -b.z, b.x)
    }
}

/// Field point to distorted pixel coordinates.
pub fn project<T: Real>(p: Vec3<T>, ex: &CameraExtrinsics<T>, intr: &CameraIntrinsics<T>) -> Result<Vec2<T>, CameraError> {
    let o = ex.field_to_optical(p);
    if o.z <= T::epsilon() {
        return Err(CameraError::BehindCamera);
    }
    let n = Vec2::new(o.x / o.z, o.y / o.z);
    Ok(intr.normalized_to_pixel(intr.distort(n)))
}

/// Intersects the viewing ray of `px` with the flat field `z = 0`.
pub fn unproject_to_ground<T: Real>(
    px: Vec2<T>,
    ex: &CameraExtrinsics<T>,
    intr: &CameraIntrinsics<T>,
) -> Result<Vec2<T>, CameraError> {
    if !(ex.position.z > T::zero()) {
        return Err(CameraError::BelowGround);
    }
    let n = intr.undistort(intr.pixel_to_normalized(px))?;
    let ray = ex.ray_to_field(Vec3::new(n.x, n.y, T::one()));
    if ray.z >= -T::lit(1e-12) {
        return Err(CameraError::HorizonRay);
    }
    let t = -ex.position.z / ray.z;
    Ok((ex.position + ray * t).xy())
}
