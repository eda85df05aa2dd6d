//! Fixtures and ground truth shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use fieldkit::ball_planner::compute_cost;
use fieldkit::field_model::GridIndex;
use fieldkit::geometry::Vec3;
use fieldkit::line_vision::LineSegment;
use fieldkit::pipeline_scheduler::{FilterSpec, Payload, PipelineSpec, Registry};
use fieldkit::localization::{estimate_pose, landmark_likelihood, uniform_particles, FieldLandmarks, Landmark, Sigmas};
use fieldkit::birdview::{birdview_map, birdview_transform, emulate_wide_angle, project, unproject_to_ground, Sampling};
use fieldkit::image::{draw_line, luma_of, Gray, Raster, Rgb};
use fieldkit::stereo_obstacles::PointCloud;
use fieldkit::synth::{render_field, Obstacle, GRASS, PAINT};
use fieldkit::{BirdviewSpec, CameraExtrinsics, CameraIntrinsics, FieldPose, FieldSpec, PlanContext, Scene, Vec2};
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

/// Liang-Barsky clip of `a`-`b` to `[lo, hi]` on both axes.
pub fn clip(a: Vec2, b: Vec2, lo: Vec2, hi: Vec2) -> Option<(Vec2, Vec2)> {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-d.x, a.x - lo.x),
        (d.x, hi.x - a.x),
        (-d.y, a.y - lo.y),
        (d.y, hi.y - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    (t0 < t1).then(|| (a + d * t0, a + d * t1))
}

/// Painted straight lines of `field` as they appear in a top-down render,
/// clipped `margin` pixels inside the image and at least `min_len` long.
pub fn birdview_ground_truth(field: &FieldSpec, view: &BirdviewSpec, margin: f64, min_len: f64) -> Vec<(Vec2, Vec2)> {
    let lo = Vec2::new(margin, margin);
    let hi = Vec2::new(view.out_width as f64 - 1.0 - margin, view.out_height as f64 - 1.0 - margin);
    field
        .line_segments
        .iter()
        .filter_map(|s| clip(view.field_to_pixel(s.a), view.field_to_pixel(s.b), lo, hi))
        .filter(|(a, b)| a.dist(*b) >= min_len)
        .collect()
}

/// Top-down view of a random patch of the field at 1 cm per pixel.
pub fn random_view(rng: &mut impl Rng) -> BirdviewSpec {
    BirdviewSpec {
        view_center: Vec2::new(rng.random_range(-4.5..4.5), rng.random_range(-3.0..3.0)),
        yaw: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        ..BirdviewSpec::default()
    }
}

fn undirected_angle(d: Vec2) -> f64 {
    d.y.atan2(d.x).rem_euclid(std::f64::consts::PI)
}

/// Whether some detected line runs within `deg` degrees of the truth and
/// passes within `px` pixels of its midpoint.
pub fn is_detected(truth: (Vec2, Vec2), lines: &[LineSegment<f64>], px: f64, deg: f64) -> bool {
    let mid = (truth.0 + truth.1) * 0.5;
    let a = undirected_angle(truth.1 - truth.0);
    lines.iter().any(|l| {
        let diff = (undirected_angle(l.p1 - l.p0) - a).abs();
        let diff = diff.min(std::f64::consts::PI - diff);
        diff <= deg.to_radians() && l.distance_to(mid) <= px
    })
}

/// L, T and X arrangements of two perpendicular segments around (100, 100).
pub fn junction_fixtures() -> [(&'static str, Vec<LineSegment<f64>>, usize); 3] {
    let p = Vec2::new;
    [
        (
            "L",
            vec![
                LineSegment::new(p(100.0, 100.0), p(200.0, 100.0)),
                LineSegment::new(p(100.0, 100.0), p(100.0, 200.0)),
            ],
            1,
        ),
        (
            "T",
            vec![
                LineSegment::new(p(0.0, 100.0), p(200.0, 100.0)),
                LineSegment::new(p(100.0, 100.0), p(100.0, 200.0)),
            ],
            2,
        ),
        (
            "X",
            vec![
                LineSegment::new(p(0.0, 100.0), p(200.0, 100.0)),
                LineSegment::new(p(100.0, 0.0), p(100.0, 200.0)),
            ],
            4,
        ),
    ]
}

/// Points on `z = 0` with Gaussian noise plus a share of outliers floating
/// 0.2 to 0.5 m above it.
pub fn noisy_plane(rng: &mut impl Rng, n: usize, sigma: f64, outlier_share: f64) -> PointCloud<f64> {
    let noise = Normal::new(0.0, sigma).unwrap();
    let points = (0..n)
        .map(|_| {
            let (x, y) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            if rng.random::<f64>() < outlier_share {
                Vec3::new(x, y, rng.random_range(0.2..0.5))
            } else {
                Vec3::new(x, y, noise.sample(rng))
            }
        })
        .collect();
    PointCloud::new(points)
}

/// Ground grid on `z = 0` and two point columns ("robots") standing on it.
/// Returns the cloud and the column centroids.
pub fn two_robot_cloud(rng: &mut impl Rng) -> (PointCloud<f64>, [Vec3<f64>; 2]) {
    let mut pts = Vec::new();
    let mut x = -2.0;
    while x <= 2.0 {
        let mut y = -2.0;
        while y <= 2.0 {
            pts.push(Vec3::new(x, y, 0.0));
            y += 0.05;
        }
        x += 0.05;
    }
    let mut centroids = [Vec3::zero(); 2];
    for (k, cx) in [-0.5, 0.5].into_iter().enumerate() {
        let mut col = Vec::new();
        for _ in 0..200 {
            col.push(Vec3::new(
                cx + rng.random_range(-0.08..0.08),
                1.0 + rng.random_range(-0.08..0.08),
                rng.random_range(0.15..0.45),
            ));
        }
        let n = col.len() as f64;
        centroids[k] = col.iter().fold(Vec3::zero(), |a, &p| a + p) / n;
        pts.extend(col);
    }
    (PointCloud::new(pts), centroids)
}

/// Posterior spread `(σ_xy, σ_θ)` of a uniform particle set over the whole
/// field after weighting by one observation of a known landmark.
pub fn spread_after_one(
    field: &FieldSpec,
    landmark: &Landmark<f64>,
    truth: &FieldPose,
    particles: usize,
    rng: &mut impl Rng,
) -> (f64, f64) {
    let (hl, hw) = (field.half_length(), field.half_width());
    let mut set = uniform_particles(particles, (-hl, hl), (-hw, hw), rng);
    let obs = landmark.observe_from(truth);
    let sigmas = Sigmas::default();
    for p in set.iter_mut() {
        p.weight *= landmark_likelihood(&obs, landmark, &p.pose, &sigmas);
    }
    let e = estimate_pose(&set);
    (e.sigma_xy, e.sigma_theta)
}

/// One seed of the ambiguity fixture: a robot somewhere inside a field corner
/// sees the border corner, the touchline next to it, or the nearest goal post.
/// Returns the spreads for corner, line and post, in that order.
pub fn ambiguity_trial(field: &FieldSpec, seed: u64) -> [(f64, f64); 3] {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (hl, hw) = (field.half_length(), field.half_width());
    let (sx, sy) = (
        if rng.random::<bool>() { 1.0 } else { -1.0 },
        if rng.random::<bool>() { 1.0 } else { -1.0 },
    );
    let truth = FieldPose::new(
        sx * (hl - rng.random_range(0.5..2.0)),
        sy * (hw - rng.random_range(0.5..2.0)),
        rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
    );
    let lm = FieldLandmarks::new(field);
    let nearest = |set: &[Landmark<f64>], keep: &dyn Fn(&Landmark<f64>) -> bool| {
        *set.iter()
            .filter(|l| keep(l))
            .min_by(|a, b| a.distance_from(truth.position()).total_cmp(&b.distance_from(truth.position())))
            .expect("layout has the landmark")
    };
    let corner = nearest(&lm.corners, &|_| true);
    let touchline = nearest(&lm.lines, &|l| matches!(l, Landmark::Line { a, b } if a.y.abs() == hw && b.y.abs() == hw));
    let post = nearest(&lm.posts, &|_| true);
    [corner, touchline, post].map(|l| spread_after_one(field, &l, &truth, 5000, &mut rng))
}

/// Random DAG of `n` filters listed in shuffled order. Filter `i` reads a
/// random subset of the source and of earlier filters' outputs and writes `s{i}`.
pub fn random_dag(rng: &mut impl Rng, n: usize) -> PipelineSpec {
    let mut filters: Vec<FilterSpec> = (0..n)
        .map(|i| {
            let mut inputs: Vec<String> = (0..i).filter(|_| rng.random::<f64>() < 0.3).map(|j| format!("s{j}")).collect();
            if inputs.is_empty() || rng.random::<f64>() < 0.2 {
                inputs.push("src".into());
            }
            FilterSpec {
                inputs,
                ..FilterSpec::new(&format!("f{i:02}"), &[], &[&format!("s{i}")])
            }
        })
        .collect();
    for i in (1..filters.len()).rev() {
        filters.swap(i, rng.random_range(0..=i));
    }
    PipelineSpec {
        source_slots: vec!["src".into()],
        filters,
    }
}

/// Longest dependency chain in filters, by memoized depth over producers.
pub fn longest_path(spec: &PipelineSpec) -> usize {
    fn depth(spec: &PipelineSpec, name: &str, memo: &mut std::collections::HashMap<String, usize>) -> usize {
        if let Some(&d) = memo.get(name) {
            return d;
        }
        let f = spec.filter(name).unwrap();
        let d = 1 + f
            .inputs
            .iter()
            .filter_map(|i| spec.filters.iter().find(|g| g.outputs.contains(i)))
            .map(|g| depth(spec, &g.name.clone(), memo))
            .max()
            .unwrap_or(0);
        memo.insert(name.to_string(), d);
        d
    }
    let mut memo = std::collections::HashMap::new();
    spec.filters.iter().map(|f| depth(spec, &f.name, &mut memo)).max().unwrap_or(0)
}

/// Start and end instants of every filter run, recorded by the filters themselves.
pub type RunLog = Arc<Mutex<Vec<(String, Instant, Instant)>>>;

/// Registry whose filters sleep `ms` and log their own run interval.
pub fn logging_registry(spec: &PipelineSpec, ms: u64, log: &RunLog) -> Registry {
    let mut r = Registry::new();
    for f in &spec.filters {
        let (name, n, log) = (f.name.clone(), f.outputs.len(), log.clone());
        r.insert(&f.name, move |_| {
            let start = Instant::now();
            std::thread::sleep(Duration::from_millis(ms));
            log.lock().unwrap().push((name.clone(), start, Instant::now()));
            Ok((0..n).map(|_| Arc::new(()) as Payload).collect())
        });
    }
    r
}

/// Producer-consumer pairs where the consumer started before the producer ended.
pub fn ordering_violations(spec: &PipelineSpec, log: &[(String, Instant, Instant)]) -> usize {
    let mut bad = 0;
    for c in &spec.filters {
        for p in spec.filters.iter().filter(|p| p.outputs.iter().any(|o| c.inputs.contains(o))) {
            let pe = log.iter().find(|e| e.0 == p.name).map(|e| e.2);
            let cs = log.iter().find(|e| e.0 == c.name).map(|e| e.1);
            if let (Some(pe), Some(cs)) = (pe, cs) {
                bad += (cs < pe) as usize;
            }
        }
    }
    bad
}

/// Four independent 50 ms filters feeding nothing.
pub fn four_wide() -> PipelineSpec {
    PipelineSpec {
        source_slots: vec!["src".into()],
        filters: (0..4).map(|i| FilterSpec::new(&format!("w{i}"), &["src"], &[&format!("o{i}")])).collect(),
    }
}

/// Mean frame time of `frames` frames of `spec` with 50 ms sleeping filters.
pub fn frame_time(spec: &PipelineSpec, workers: usize, serial: bool, frames: u64) -> Duration {
    use fieldkit::pipeline_scheduler::{sleep_registry, Executor};
    let mut ex = Executor::new(spec.clone(), sleep_registry(spec, 50), Some(workers)).unwrap();
    ex.set_serial(serial);
    let t0 = Instant::now();
    for k in 0..frames {
        ex.run_frame(k, vec![("src".into(), Arc::new(()) as Payload)]).unwrap();
    }
    t0.elapsed() / frames as u32
}

/// Random texture and a copy moved `shift` pixels left, so that left pixel
/// `x` reappears at right pixel `x - shift`.
pub fn shifted_pair(rng: &mut impl Rng, w: usize, h: usize, shift: usize) -> (Gray, Gray) {
    let left = Gray::from_fn(w, h, |_, _| rng.random::<u8>());
    let right = Gray::from_fn(w, h, |x, y| left.get_checked((x + shift) as i64, y as i64).unwrap_or(0));
    (left, right)
}

/// Field-frame up direction expressed in the optical frame of `camera`.
pub fn optical_up(camera: &fieldkit::CameraExtrinsics) -> Vec3<f64> {
    let up = Vec3::new(0.0, 0.0, 1.0);
    let e = |v: Vec3<f64>| camera.ray_to_field(v).dot(up);
    Vec3::new(e(Vec3::new(1.0, 0.0, 0.0)), e(Vec3::new(0.0, 1.0, 0.0)), e(Vec3::new(0.0, 0.0, 1.0)))
}

/// Robot at the center facing +x with two boxes 1.2 m ahead, 0.6 m apart.
pub fn two_box_scene() -> (Scene, [Vec2; 2]) {
    let mut scene = Scene::standard(FieldSpec::default(), FieldPose::new(0.0, 0.0, 0.0));
    let centers = [Vec2::new(1.2, 0.3), Vec2::new(1.2, -0.3)];
    scene.obstacles = centers
        .iter()
        .map(|&center| Obstacle {
            center,
            radius: 0.1,
            height: 0.35,
        })
        .collect();
    (scene, centers)
}

pub fn random_context(rng: &mut impl Rng, field: &FieldSpec) -> PlanContext {
    let pt = |rng: &mut dyn rand::RngCore| Vec2::new(rng.random_range(-4.4..4.4), rng.random_range(-2.9..2.9));
    let robot = {
        let p = pt(rng);
        FieldPose::new(p.x, p.y, rng.random_range(-3.1..3.1))
    };
    let mut ctx = PlanContext::new(robot, pt(rng), field);
    for _ in 0..rng.random_range(0..=3) {
        ctx.opponents.push(pt(rng));
    }
    for _ in 0..rng.random_range(0..=2) {
        let p = pt(rng);
        ctx.teammates.push(FieldPose::new(p.x, p.y, rng.random_range(-3.1..3.1)));
    }
    ctx
}

/// Textbook Dijkstra over cells, with neighbours found by scanning a square
/// window for centers inside any kick annulus.
pub fn dijkstra(ctx: &PlanContext, field: &FieldSpec) -> Option<f64> {
    let reach = ctx.kick_lengths.iter().cloned().fold(0.0, f64::max) + field.cell_size;
    let w = (reach / field.cell_size).ceil() as i64;
    let mut offsets = Vec::new();
    for dr in -w..=w {
        for dc in -w..=w {
            let d = ((dr * dr + dc * dc) as f64).sqrt() * field.cell_size;
            if (dr, dc) != (0, 0) && ctx.kick_lengths.iter().any(|k| (d - k).abs() <= field.cell_size / 2.0 + 1e-9) {
                offsets.push((dr, dc));
            }
        }
    }
    let (rows, cols) = (field.rows() as i64, field.cols() as i64);
    let id = |r: i64, c: i64| (r * cols + c) as usize;
    let start = field.pose_to_cell(ctx.ball).ok()?;
    let goal = field.pose_to_cell(ctx.goal).ok()?;
    let s = id(start.row as i64, start.col as i64);
    let t = id(goal.row as i64, goal.col as i64);
    let mut dist = vec![f64::INFINITY; (rows * cols) as usize];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Reverse((OrdF(0.0), s)));
    while let Some(Reverse((OrdF(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == t {
            return Some(d);
        }
        let (r, c) = ((u as i64) / cols, (u as i64) % cols);
        let from = field.cell_center(GridIndex::new(r as usize, c as usize));
        for &(dr, dc) in &offsets {
            let (nr, nc) = (r + dr, c + dc);
            if nr < 0 || nc < 0 || nr >= rows || nc >= cols {
                continue;
            }
            let to = field.cell_center(GridIndex::new(nr as usize, nc as usize));
            let nd = d + compute_cost(ctx, from, to, u == s);
            let v = id(nr, nc);
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((OrdF(nd), v)));
            }
        }
    }
    None
}

#[derive(PartialEq, PartialOrd)]
pub struct OrdF(f64);
impl Eq for OrdF {}
impl Ord for OrdF {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}


/// Tilted head camera 0.45 m up, 60 degree field of view.
pub fn tilted_camera(k1: f64, k2: f64) -> (CameraExtrinsics, CameraIntrinsics) {
    let ex = CameraExtrinsics::new(Vec3::new(-1.0, 0.5, 0.45), 0.02, 35f64.to_radians(), 0.3);
    let intr = CameraIntrinsics::from_hfov(640, 480, 60f64.to_radians())
        .and_then(|c| c.with_distortion(k1, k2))
        .unwrap();
    (ex, intr)
}

/// Largest ground round-trip error, meters, over `n` random ground points
/// visible to the distorted tilted camera.
pub fn round_trip_error(n: usize, seed: u64) -> f64 {
    let (ex, intr) = tilted_camera(-0.3, 0.1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut worst) = (0, 0.0f64);
    while checked < n {
        let g = Vec2::new(rng.random_range(-0.8..3.0), rng.random_range(-0.5..2.5));
        let Ok(px) = project(Vec3::new(g.x, g.y, 0.0), &ex, &intr) else { continue };
        if !intr.contains(px) {
            continue;
        }
        let back = unproject_to_ground(px, &ex, &intr).unwrap();
        worst = worst.max(back.dist(g));
        checked += 1;
    }
    worst
}

/// Bright run across image column `x` near `row`: (centroid, width).
fn stripe_across(img: &Gray, x: usize, row: f64, threshold: u8) -> Option<(f64, usize)> {
    let lo = (row - 12.0).max(0.0) as usize;
    let hi = ((row + 12.0) as usize).min(img.height() - 1);
    let ys: Vec<usize> = (lo..=hi).filter(|&y| img.get(x, y) > threshold).collect();
    (!ys.is_empty()).then(|| (ys.iter().sum::<usize>() as f64 / ys.len() as f64, ys.len()))
}

#[derive(Debug)]
pub struct StripeStats {
    pub columns: usize,
    /// Largest distance of a column centroid from the fitted line, pixels.
    pub max_residual: f64,
    /// Distance of the mean centroid from the projected line, pixels.
    pub row_offset: f64,
    pub width_min: usize,
    pub width_max: usize,
    pub expected_width: f64,
}

/// The halfway line in the birdview of a rendered head-camera image.
pub fn halfway_line_in_birdview() -> StripeStats {
    let field = FieldSpec::default();
    let robot = FieldPose::new(-1.3, 0.2, 0.0);
    let scene = Scene::standard(field.clone(), robot);
    let img = render_field(&scene);
    let spec = BirdviewSpec::ahead_of(&robot, 1.3, &BirdviewSpec::default());
    let out = birdview_transform(&Raster::from_rgb(&img), &scene.camera(), &scene.intrinsics, &spec, Sampling::Bilinear);
    let map = birdview_map(&scene.camera(), &scene.intrinsics, &spec);
    let (a, b) = (spec.field_to_pixel(Vec2::new(0.0, -0.5)), spec.field_to_pixel(Vec2::new(0.0, 0.5)));
    let row = (a.y + b.y) / 2.0;
    let threshold = (luma_of(PAINT) / 2) + (luma_of(GRASS) / 2);
    let mut samples = Vec::new();
    for x in a.x.min(b.x).ceil() as usize..=a.x.max(b.x).floor() as usize {
        if (row as usize - 12..row as usize + 12).all(|y| map[y * spec.out_width + x].is_some()) {
            if let Some(s) = stripe_across(&out.luma, x, row, threshold) {
                samples.push((x as f64, s));
            }
        }
    }
    // least-squares line through the centroids
    let n = samples.len() as f64;
    let (mx, my) = samples.iter().fold((0.0, 0.0), |s, (x, (c, _))| (s.0 + x / n, s.1 + c / n));
    let sxy: f64 = samples.iter().map(|(x, (c, _))| (x - mx) * (c - my)).sum();
    let sxx: f64 = samples.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let widths = samples.iter().map(|s| s.1 .1);
    StripeStats {
        columns: samples.len(),
        max_residual: samples.iter().map(|(x, (c, _))| (c - (my + slope * (x - mx))).abs()).fold(0.0, f64::max),
        row_offset: (my - row).abs(),
        width_min: widths.clone().min().unwrap_or(0),
        width_max: widths.max().unwrap_or(0),
        expected_width: field.line_width / spec.meters_per_pixel,
    }
}

/// White three-pixel bar across rows 80..83 of a black 640x480 image.
pub fn horizontal_bar() -> Rgb {
    let mut src = Rgb::filled(640, 480, [0, 0, 0]);
    for dy in 0..3 {
        draw_line(&mut src, 0.0, 80.0 + dy as f64, 639.0, 80.0 + dy as f64, [255, 255, 255]);
    }
    src
}

fn chord_deviation(pts: &[Vec2]) -> f64 {
    let (p0, p1) = (pts[0], pts[pts.len() - 1]);
    let u = (p1 - p0).normalized().unwrap();
    pts.iter().map(|p| (*p - p0).cross(u).abs()).fold(0.0, f64::max)
}

/// Emulates a wide-angle lens on [`horizontal_bar`]. Returns how far the
/// bar bends off its chord and how far undistorting the bent bar lands
/// from its original center row, both in pixels.
pub fn wide_angle_bend(k1: f64, k2: f64) -> (f64, f64) {
    let rect = CameraIntrinsics::from_hfov(640, 480, 70f64.to_radians()).unwrap();
    let out = emulate_wide_angle(&horizontal_bar(), &rect, k1, k2).unwrap();
    let distorted = rect.with_distortion(k1, k2).unwrap();
    let gray = out.map(luma_of);
    let mut curve = Vec::new();
    for x in (0..640).step_by(4) {
        let ys: Vec<usize> = (0..480).filter(|&y| gray.get(x, y) > 128).collect();
        if !ys.is_empty() {
            curve.push(Vec2::new(x as f64, ys.iter().sum::<usize>() as f64 / ys.len() as f64));
        }
    }
    assert!(curve.len() > 100, "bar lost: {} columns", curve.len());
    let residual = curve
        .iter()
        .map(|&p| rect.normalized_to_pixel(distorted.undistort(distorted.pixel_to_normalized(p)).unwrap()))
        .map(|p| (p.y - 81.0).abs())
        .fold(0.0, f64::max);
    (chord_deviation(&curve), residual)
}
