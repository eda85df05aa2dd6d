use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::birdview::{BirdviewSpec, CameraExtrinsics, CameraIntrinsics};
use crate::field_model::FieldSpec;
use crate::geometry::{point_segment_distance, FieldPose, Vec2, Vec3};
use crate::image::Rgb;
use crate::scalar::Real;
use crate::stereo_obstacles::StereoRig;

pub const GRASS: [u8; 3] = [40, 130, 45];
pub const PAINT: [u8; 3] = [235, 235, 235];
pub const BACKDROP: [u8; 3] = [60, 60, 70];
const BOX_TOP: [u8; 3] = [150, 150, 150];
const BOX_SIDE_X: [u8; 3] = [120, 120, 120];
const BOX_SIDE_Y: [u8; 3] = [100, 100, 100];

/// Axis-aligned box standing on the field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Obstacle<T> {
    pub center: Vec2<T>,
    /// Half the side of the square footprint.
    pub radius: T,
    pub height: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Scene<T> {
    pub field: FieldSpec<T>,
    pub robot: FieldPose<T>,
    /// Camera pose relative to the robot base.
    pub mount: CameraExtrinsics<T>,
    pub intrinsics: CameraIntrinsics<T>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle<T>>,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
    /// Subsamples per pixel side.
    #[serde(default = "d_supersample")]
    pub supersample: usize,
}

fn d_supersample() -> usize {
    2
}

impl<T: Real> Scene<T> {
    /// Head camera 0.45 m above the ground, tilted 35 degrees down, 640x480
    /// with a 70 degree horizontal field of view.
    pub fn standard(field: FieldSpec<T>, robot: FieldPose<T>) -> Self {
        Self {
            field,
            robot,
            mount: CameraExtrinsics::new(Vec3::new(T::zero(), T::zero(), T::lit(0.45)), T::zero(), T::lit(35f64.to_radians()), T::zero()),
            intrinsics: CameraIntrinsics::from_hfov(640, 480, T::lit(70f64.to_radians())).expect("valid default intrinsics"),
            obstacles: Vec::new(),
            noise: 0.0,
            seed: 0,
            supersample: d_supersample(),
        }
    }

    pub fn camera(&self) -> CameraExtrinsics<T> {
        self.mount.mounted_on(&self.robot)
    }
}

/// Whether a ground point is painted white.
pub fn is_painted<T: Real>(field: &FieldSpec<T>, p: Vec2<T>) -> bool {
    let hw = field.line_width / T::lit(2.0);
    field.line_segments.iter().any(|s| point_segment_distance(p, s.a, s.b) <= hw)
        || ((p - field.circle.center).norm() - field.circle.radius).abs() <= hw
}

fn ground_color<T: Real>(field: &FieldSpec<T>, p: Vec2<T>) -> [u8; 3] {
    if is_painted(field, p) {
        PAINT
    } else {
        GRASS
    }
}

/// Ray/box slab test; returns hit distance and the axis of the face hit
/// (0 = x side, 1 = y side, 2 = top).
fn hit_box<T: Real>(o: Vec3<T>, d: Vec3<T>, b: &Obstacle<T>) -> Option<(T, usize)> {
    let lo = [b.center.x - b.radius, b.center.y - b.radius, T::zero()];
    let hi = [b.center.x + b.radius, b.center.y + b.radius, b.height];
    let (oo, dd) = ([o.x, o.y, o.z], [d.x, d.y, d.z]);
    let mut t_near = T::neg_infinity();
    let mut t_far = T::infinity();
    let mut axis = 0;
    for k in 0..3 {
        if dd[k].abs() < T::lit(1e-15) {
            if oo[k] < lo[k] || oo[k] > hi[k] {
                return None;
            }
            continue;
        }
        let (mut t0, mut t1) = ((lo[k] - oo[k]) / dd[k], (hi[k] - oo[k]) / dd[k]);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        if t0 > t_near {
            t_near = t0;
            axis = k;
        }
        t_far = t_far.min(t1);
    }
    (t_near <= t_far && t_near > T::zero()).then_some((t_near, axis))
}

/// Smooth value noise in `[-1, 1]` over 3D space with `scale`-meter cells.
pub fn value_noise<T: Real>(p: Vec3<T>, scale: f64) -> f64 {
    fn lattice(ix: i64, iy: i64, iz: i64) -> f64 {
        let mut h = (ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
            ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
            ^ (iz as u64).wrapping_mul(0x1656_67B1_9E37_79F9);
        h ^= h >> 31;
        h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h ^= h >> 29;
        (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }
    let q = [p.x.to_f64_lossy() / scale, p.y.to_f64_lossy() / scale, p.z.to_f64_lossy() / scale];
    let i = q.map(|v| v.floor() as i64);
    let f = [q[0] - i[0] as f64, q[1] - i[1] as f64, q[2] - i[2] as f64];
    let mut acc = 0.0;
    for corner in 0..8 {
        let (dx, dy, dz) = (corner & 1, (corner >> 1) & 1, (corner >> 2) & 1);
        let w = [(dx, f[0]), (dy, f[1]), (dz, f[2])]
            .iter()
            .map(|&(c, t)| if c == 1 { t } else { 1.0 - t })
            .product::<f64>();
        acc += w * lattice(i[0] + dx as i64, i[1] + dy as i64, i[2] + dz as i64);
    }
    acc
}

fn textured(c: [u8; 3], p: Vec3<f64>, amplitude: f64) -> [u8; 3] {
    if amplitude == 0.0 {
        return c;
    }
    let v = amplitude * (0.6 * value_noise(p, 0.015) + 0.4 * value_noise(p, 0.006));
    c.map(|ch| (ch as f64 + v).round().clamp(0.0, 255.0) as u8)
}

/// Color seen along a field-frame ray.
fn trace<T: Real>(scene: &Scene<T>, origin: Vec3<T>, dir: Vec3<T>, texture: f64) -> [u8; 3] {
    let mut best: Option<(T, [u8; 3])> = None;
    for b in &scene.obstacles {
        if let Some((t, axis)) = hit_box(origin, dir, b) {
            if best.is_none_or(|(bt, _)| t < bt) {
                let c = [BOX_SIDE_X, BOX_SIDE_Y, BOX_TOP][axis];
                best = Some((t, c));
            }
        }
    }
    if dir.z < T::zero() {
        let t = -origin.z / dir.z;
        if best.is_none_or(|(bt, _)| t < bt) {
            let p = origin + dir * t;
            best = Some((t, ground_color(&scene.field, p.xy())));
        }
    }
    match best {
        Some((t, c)) => {
            let p = origin + dir * t;
            let p = Vec3::new(p.x.to_f64_lossy(), p.y.to_f64_lossy(), p.z.to_f64_lossy());
            textured(c, p, texture)
        }
        None => BACKDROP,
    }
}

fn average(samples: &[[u8; 3]]) -> [u8; 3] {
    let n = samples.len() as u32;
    let mut s = [0u32; 3];
    for c in samples {
        for k in 0..3 {
            s[k] += c[k] as u32;
        }
    }
    s.map(|v| ((v + n / 2) / n) as u8)
}

fn offsets(k: usize) -> Vec<f64> {
    let k = k.max(1);
    (0..k).map(|s| (s as f64 + 0.5) / k as f64 - 0.5).collect()
}

/// Adds seeded Gaussian noise to every channel of every pixel in row-major order.
pub fn add_noise(img: &mut Rgb, sigma: f64, seed: u64) {
    if sigma <= 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    for p in img.pixels_mut() {
        for ch in p.iter_mut() {
            *ch = (*ch as f64 + normal.sample(&mut rng)).round().clamp(0.0, 255.0) as u8;
        }
    }
}

fn render_camera<T: Real>(
    scene: &Scene<T>,
    ex: &CameraExtrinsics<T>,
    intr: &CameraIntrinsics<T>,
    texture: f64,
) -> Rgb {
    let (w, h) = (intr.width, intr.height);
    let offs = offsets(scene.supersample);
    let data: Vec<[u8; 3]> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let mut samples = Vec::with_capacity(offs.len() * offs.len());
            for &oy in &offs {
                for &ox in &offs {
                    let px = Vec2::new(T::lit(x as f64 + ox), T::lit(y as f64 + oy));
                    let c = match intr.undistort(intr.pixel_to_normalized(px)) {
                        Ok(n) => trace(scene, ex.position, ex.ray_to_field(Vec3::new(n.x, n.y, T::one())), texture),
                        Err(_) => [0, 0, 0],
                    };
                    samples.push(c);
                }
            }
            average(&samples)
        })
        .collect();
    Rgb::from_vec(w, h, data)
}

/// Perspective render of the field through the scene camera.
pub fn render_field<T: Real>(scene: &Scene<T>) -> Rgb {
    let mut img = render_camera(scene, &scene.camera(), &scene.intrinsics, 0.0);
    add_noise(&mut img, scene.noise, scene.seed);
    img
}

/// Orthographic top-down render of the field (no obstacles).
pub fn render_birdview<T: Real>(field: &FieldSpec<T>, view: &BirdviewSpec<T>, supersample: usize, noise: f64, seed: u64) -> Rgb {
    let (w, h) = (view.out_width, view.out_height);
    let offs = offsets(supersample);
    let data: Vec<[u8; 3]> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let mut samples = Vec::with_capacity(offs.len() * offs.len());
            for &oy in &offs {
                for &ox in &offs {
                    let p = view.pixel_to_field(Vec2::new(T::lit(x as f64 + ox), T::lit(y as f64 + oy)));
                    samples.push(ground_color(field, p));
                }
            }
            average(&samples)
        })
        .collect();
    let mut img = Rgb::from_vec(w, h, data);
    add_noise(&mut img, noise, seed);
    img
}

/// Texture amplitude used for stereo renders, 8-bit levels.
pub const STEREO_TEXTURE: f64 = 45.0;

/// Left and right views of a rectified pair; the left camera is the scene
/// camera, the right one sits `rig.baseline` to its right. Surfaces carry a
/// fixed world-space texture so that block matching has something to lock on.
pub fn render_stereo<T: Real>(scene: &Scene<T>, rig: &StereoRig<T>) -> (Rgb, Rgb) {
    let intr = rig.intrinsics();
    let left = scene.camera();
    let mut right = left;
    // body y points left
    right.position = left.position + left.rotation().mul_vec(Vec3::new(T::zero(), -rig.baseline, T::zero()));
    let mut l = render_camera(scene, &left, &intr, STEREO_TEXTURE);
    let mut r = render_camera(scene, &right, &intr, STEREO_TEXTURE);
    add_noise(&mut l, scene.noise, scene.seed);
    add_noise(&mut r, scene.noise, scene.seed.wrapping_add(1));
    (l, r)
}
