mod support;

use std::collections::BTreeSet;

use fieldkit::geometry::Vec3;
use fieldkit::image::{rgb_to_gray, Gray};
use fieldkit::stereo_obstacles::{
    block_match, cluster_on_field, detect_obstacles, disparity_to_points, extract_clusters, ransac_plane, voxel_bin,
    DisparityMap, GroundPlane, ObstacleParams, RansacParams, StereoError,
};
use fieldkit::synth::render_stereo;
use fieldkit::{PointCloud, StereoRig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn z_up(seed: u64) -> RansacParams<f64> {
    RansacParams {
        seed,
        up: Vec3::new(0.0, 0.0, 1.0),
        ..RansacParams::default()
    }
}

#[test]
fn constant_shift_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (left, right) = support::shifted_pair(&mut rng, 96, 40, 7);
    let d = block_match(&left, &right, 7, 16).unwrap();
    let mut valid = 0;
    // interior: window fits and the match lies inside the right image
    for y in 3..37 {
        for x in 7 + 3..96 - 3 - 7 {
            if let Some(v) = d.get(x, y) {
                assert_eq!(v, 7, "at ({x}, {y})");
                valid += 1;
            }
        }
    }
    assert!(valid > 2000);
}

#[test]
fn textureless_pair_gives_zero_or_nothing() {
    let img = Gray::filled(40, 20, 128);
    let d = block_match(&img, &img, 5, 8).unwrap();
    for y in 0..20 {
        for x in 0..40 {
            assert!(matches!(d.get(x, y), None | Some(0)));
        }
    }
}

#[test]
fn unrelated_noise_is_mostly_invalidated() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = Gray::from_fn(80, 40, |_, _| rng.random::<u8>());
    let b = Gray::from_fn(80, 40, |_, _| rng.random::<u8>());
    let d = block_match(&a, &b, 7, 32).unwrap();
    let invalid = 80 * 40 - d.valid_count();
    assert!(invalid as f64 >= 0.8 * (80 * 40) as f64, "{invalid}");
}

#[test]
fn matching_rejects_bad_input() {
    let a = Gray::filled(10, 10, 0);
    let b = Gray::filled(11, 10, 0);
    assert!(matches!(block_match(&a, &b, 3, 4), Err(StereoError::DimensionMismatch { .. })));
    assert!(matches!(block_match(&a, &a, 4, 4), Err(StereoError::InvalidParameter(_))));
}

fn single(d: u16, u: usize, v: usize) -> DisparityMap {
    let mut m = DisparityMap::new(8, 8);
    m.set(u, v, Some(d));
    m
}

#[test]
fn depth_of_62_px_is_one_meter() {
    let rig = StereoRig::new(0.062, 1000.0, 8, 8).unwrap();
    let pc = disparity_to_points(&single(62, 3, 5), &rig, 1);
    assert_eq!(pc.len(), 1);
    assert!((pc.points[0].z - 1.0).abs() < 1e-12);
    assert_eq!(rig.depth(62.0), pc.points[0].z);
}

#[test]
fn principal_point_lies_on_the_axis() {
    let rig = StereoRig {
        cx: 4.0,
        cy: 2.0,
        ..StereoRig::new(0.062, 500.0, 8, 8).unwrap()
    };
    let p = disparity_to_points(&single(10, 4, 2), &rig, 1).points[0];
    assert_eq!((p.x, p.y), (0.0, 0.0));
}

#[test]
fn depth_is_inverse_in_disparity() {
    let rig = StereoRig::standard();
    for d in 1..=30u16 {
        let z1 = disparity_to_points(&single(d, 1, 1), &rig, 1).points[0].z;
        let z2 = disparity_to_points(&single(2 * d, 1, 1), &rig, 1).points[0].z;
        assert!((z1 - 2.0 * z2).abs() <= 1e-12 * z1);
        assert!((z1 * d as f64 - rig.focal * rig.baseline).abs() <= 1e-12 * z1 * d as f64);
    }
    assert!(disparity_to_points(&single(0, 1, 1), &rig, 1).is_empty());
}

#[test]
fn voxel_binning_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts: Vec<Vec3<f64>> = (0..10_000)
        .map(|_| Vec3::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), rng.random_range(0.0..0.1)))
        .collect();
    let pc = PointCloud::new(pts.clone());
    let occupied: BTreeSet<(i64, i64, i64)> = pts
        .iter()
        .map(|p| ((p.x / 0.05).floor() as i64, (p.y / 0.05).floor() as i64, (p.z / 0.05).floor() as i64))
        .collect();
    assert_eq!(voxel_bin(&pc, 0.05, 1).len(), occupied.len());
    let mut last = usize::MAX;
    for min in 1..8 {
        let n = voxel_bin(&pc, 0.05, min).len();
        assert!(n <= last);
        last = n;
    }
}

#[test]
fn voxel_binning_trivia() {
    let one = PointCloud::new(vec![Vec3::new(0.01, 0.01, 0.01), Vec3::new(0.03, 0.03, 0.03)]);
    let out = voxel_bin(&one, 0.05, 1);
    assert_eq!(out.len(), 1);
    assert!((out.points[0].x - 0.02).abs() < 1e-12);
    let lone = PointCloud::new(vec![Vec3::new(0.01, 0.01, 0.01)]);
    assert!(voxel_bin(&lone, 0.05, 2).is_empty());
}

#[test]
fn exact_plane_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pc = support::noisy_plane(&mut rng, 500, 0.0, 0.0);
    let plane = ransac_plane(&pc, &z_up(0)).unwrap();
    assert!((plane.normal.z - 1.0).abs() < 1e-9 && plane.offset.abs() < 1e-9);
    assert_eq!(plane.inlier_count, 500);
}

#[test]
fn noisy_plane_normal_within_two_degrees() {
    let mut errors = Vec::new();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let pc = support::noisy_plane(&mut rng, 2000, 0.005, 0.2);
        let plane = ransac_plane(&pc, &z_up(seed)).unwrap();
        assert!(plane.inlier_count as f64 >= 0.75 * 2000.0);
        errors.push(plane.normal_angle(Vec3::new(0.0, 0.0, 1.0)).to_degrees());
    }
    errors.sort_by(f64::total_cmp);
    assert!(errors[10] <= 2.0 && errors[19] <= 5.0, "{errors:?}");
}

#[test]
fn three_points_define_the_plane() {
    let pts = vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
    let plane = ransac_plane(&PointCloud::new(pts.clone()), &z_up(0)).unwrap();
    for p in pts {
        assert!(plane.signed_distance(p).abs() < 1e-12);
    }
    assert!((plane.normal.norm() - 1.0).abs() < 1e-12 && plane.normal.z > 0.0);
}

#[test]
fn collinear_or_tiny_clouds_are_degenerate() {
    let line = PointCloud::new((0..20).map(|k| Vec3::new(k as f64, 0.0, 0.0)).collect());
    assert_eq!(ransac_plane(&line, &z_up(0)), Err(StereoError::DegenerateCloud));
    let two = PointCloud::new(vec![Vec3::zero(), Vec3::new(1.0, 0.0, 0.0)]);
    assert_eq!(ransac_plane(&two, &z_up(0)), Err(StereoError::DegenerateCloud));
}

fn ground() -> GroundPlane<f64> {
    GroundPlane {
        normal: Vec3::new(0.0, 0.0, 1.0),
        offset: 0.0,
        inlier_count: 0,
    }
}

#[test]
fn two_robots_make_two_clusters() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (pc, truth) = support::two_robot_cloud(&mut rng);
    let plane = ransac_plane(&pc, &z_up(5)).unwrap();
    let clusters = extract_clusters(&pc, &plane, 0.1, 0.15, 10);
    assert_eq!(clusters.len(), 2);
    for t in truth {
        let c = clusters.iter().min_by(|a, b| (a.centroid - t).norm().total_cmp(&(b.centroid - t).norm())).unwrap();
        assert!((c.centroid - t).norm() <= 0.03);
        assert!(c.max_protrusion > 0.1 && c.point_count >= 10);
    }
}

#[test]
fn gaps_split_columns_only_when_wider_than_the_link() {
    let column = |gap: f64| {
        let mut pts: Vec<Vec3<f64>> = (0..20).map(|k| Vec3::new(0.0, 0.0, 0.2 + 0.01 * k as f64)).collect();
        pts.extend((0..20).map(|k| Vec3::new(0.0, 0.0, 0.39 + gap + 0.01 * k as f64)));
        PointCloud::new(pts)
    };
    assert_eq!(extract_clusters(&column(0.1), &ground(), 0.1, 0.15, 10).len(), 1);
    assert_eq!(extract_clusters(&column(0.2), &ground(), 0.1, 0.15, 10).len(), 2);
    let flat = PointCloud::new(vec![Vec3::new(0.0, 0.0, 0.05); 50]);
    assert!(extract_clusters(&flat, &ground(), 0.1, 0.15, 10).is_empty());
}

#[test]
fn rendered_scene_shows_both_boxes() {
    let (scene, centers) = support::two_box_scene();
    let rig = StereoRig::standard();
    let (l, r) = render_stereo(&scene, &rig);
    let report = detect_obstacles(&rgb_to_gray(&l), &rgb_to_gray(&r), &rig, &ObstacleParams::default()).unwrap();
    let camera = scene.camera();
    let up = support::optical_up(&camera);
    assert!(report.plane.normal_angle(up).to_degrees() <= 2.0);
    assert_eq!(report.clusters.len(), 2);
    for c in &report.clusters {
        let on_field = cluster_on_field(c, &camera);
        // the visible faces pull the centroid toward the camera
        assert!(centers.iter().any(|b| on_field.dist(*b) < 0.15), "{on_field:?}");
    }
}

#[test]
fn low_box_is_not_an_obstacle() {
    let (mut scene, _) = support::two_box_scene();
    for o in scene.obstacles.iter_mut() {
        o.height = 0.05;
    }
    let rig = StereoRig::standard();
    let (l, r) = render_stereo(&scene, &rig);
    let report = detect_obstacles(&rgb_to_gray(&l), &rgb_to_gray(&r), &rig, &ObstacleParams::default()).unwrap();
    assert!(report.clusters.is_empty());
}
