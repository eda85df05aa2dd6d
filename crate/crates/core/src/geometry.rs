//! Small fixed-size vector types and planar pose algebra.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// A 2D point or vector. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]")]
#[serde(bound = "T: Real")]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> From<[T; 2]> for Vec2<T> {
    fn from(a: [T; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl<T: Real> From<Vec2<T>> for [T; 2] {
    fn from(v: Vec2<T>) -> Self {
        [v.x, v.y]
    }
}

impl<T: Real> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Unit vector at angle `theta` from the x axis.
    #[inline]
    pub fn from_angle(theta: T) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    #[inline]
    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    /// Counter-clockwise perpendicular.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > T::epsilon()).then(|| self / n)
    }

    /// Rotates counter-clockwise by `theta`.
    #[inline]
    pub fn rotated(self, theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn cast<U: Real>(self) -> Vec2<U> {
        Vec2::new(U::lit(self.x.to_f64_lossy()), U::lit(self.y.to_f64_lossy()))
    }
}

impl<T: Real> Add for Vec2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> AddAssign for Vec2<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl<T: Real> Sub for Vec2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Mul<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Real> Div<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s)
    }
}

impl<T: Real> Neg for Vec2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// A 3D point or vector. Serialized as `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 3]", into = "[T; 3]")]
#[serde(bound = "T: Real")]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> From<[T; 3]> for Vec3<T> {
    fn from(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl<T: Real> From<Vec3<T>> for [T; 3] {
    fn from(v: Vec3<T>) -> Self {
        [v.x, v.y, v.z]
    }
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > T::epsilon()).then(|| self * (T::one() / n))
    }

    #[inline]
    pub fn xy(self) -> Vec2<T> {
        Vec2::new(self.x, self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Div<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 matrix, used for rotations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Real> Mat3<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self([[o, z, z], [z, o, z], [z, z, o]])
    }

    pub fn rot_x(a: T) -> Self {
        let (s, c) = a.sin_cos();
        let (o, z) = (T::one(), T::zero());
        Self([[o, z, z], [z, c, -s], [z, s, c]])
    }

    pub fn rot_y(a: T) -> Self {
        let (s, c) = a.sin_cos();
        let (o, z) = (T::one(), T::zero());
        Self([[c, z, s], [z, o, z], [-s, z, c]])
    }

    pub fn rot_z(a: T) -> Self {
        let (s, c) = a.sin_cos();
        let (o, z) = (T::one(), T::zero());
        Self([[c, -s, z], [s, c, z], [z, z, o]])
    }

    pub fn mul_mat(&self, o: &Self) -> Self {
        let mut m = [[T::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Self(m)
    }

    #[inline]
    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        let r = &self.0;
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    pub fn transpose(&self) -> Self {
        let r = &self.0;
        Self([
            [r[0][0], r[1][0], r[2][0]],
            [r[0][1], r[1][1], r[2][1]],
            [r[0][2], r[1][2], r[2][2]],
        ])
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let two_pi = T::TAU();
    let mut a = theta % two_pi;
    if a <= -T::PI() {
        a += two_pi;
    } else if a > T::PI() {
        a -= two_pi;
    }
    a
}

/// Wraps an angle into `[0, pi)`, the canonical range of an undirected line.
pub fn wrap_half_turn<T: Real>(theta: T) -> T {
    let pi = T::PI();
    let mut a = theta % pi;
    if a < T::zero() {
        a += pi;
    }
    if a >= pi {
        a -= pi;
    }
    a
}

/// Smallest distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance<T: Real>(p: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> T {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq <= T::zero() {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len_sq).max(T::zero()).min(T::one());
    p.dist(a + ab * t)
}

/// Robot pose on the field: position in meters, heading in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FieldPose<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
}

impl<T: Real> FieldPose<T> {
    pub fn new(x: T, y: T, theta: T) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    #[inline]
    pub fn position(&self) -> Vec2<T> {
        Vec2::new(self.x, self.y)
    }

    /// Applies `delta`, expressed in this pose's own frame.
    pub fn compose(&self, delta: &FieldPose<T>) -> FieldPose<T> {
        let p = self.position() + Vec2::new(delta.x, delta.y).rotated(self.theta);
        FieldPose::new(p.x, p.y, self.theta + delta.theta)
    }

    /// The pose `d` with `self.compose(d) == *other`.
    pub fn delta_to(&self, other: &FieldPose<T>) -> FieldPose<T> {
        let p = (other.position() - self.position()).rotated(-self.theta);
        FieldPose::new(p.x, p.y, other.theta - self.theta)
    }

    /// Field-frame point to this pose's frame.
    #[inline]
    pub fn to_local(&self, p: Vec2<T>) -> Vec2<T> {
        (p - self.position()).rotated(-self.theta)
    }

    /// Point in this pose's frame to the field frame.
    #[inline]
    pub fn to_field(&self, p: Vec2<T>) -> Vec2<T> {
        p.rotated(self.theta) + self.position()
    }
}
