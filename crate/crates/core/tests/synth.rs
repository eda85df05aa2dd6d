use fieldkit::localization::{expected_observations, MotionNoise, RobotObservation, Sigmas};
use fieldkit::synth::{generate_trajectory, render_birdview, render_field, render_stereo, TrajectoryConfig};
use fieldkit::{BirdviewSpec, FieldPose, FieldSpec, Scene, StereoRig, Vec2};

#[test]
fn renders_are_deterministic() {
    let field = FieldSpec::default();
    let mut scene = Scene::standard(field.clone(), FieldPose::new(-1.0, 0.5, 0.3));
    scene.noise = 5.0;
    scene.seed = 9;
    assert_eq!(render_field(&scene), render_field(&scene));
    let view = BirdviewSpec::default();
    assert_eq!(render_birdview(&field, &view, 2, 8.0, 1), render_birdview(&field, &view, 2, 8.0, 1));
    assert_ne!(render_birdview(&field, &view, 2, 8.0, 1), render_birdview(&field, &view, 2, 8.0, 2));
}

#[test]
fn pixel_noise_has_the_requested_sigma() {
    let field = FieldSpec::default();
    let view = BirdviewSpec {
        view_center: Vec2::new(-2.0, 1.0),
        ..BirdviewSpec::default()
    };
    let clean = render_birdview(&field, &view, 2, 0.0, 3);
    let noisy = render_birdview(&field, &view, 2, 8.0, 3);
    let (mut n, mut sum, mut sq) = (0usize, 0.0, 0.0);
    for (a, b) in clean.pixels().iter().zip(noisy.pixels()) {
        for k in 0..3 {
            // away from the clamp at 0 and 255
            if (40..=215).contains(&a[k]) {
                let d = b[k] as f64 - a[k] as f64;
                n += 1;
                sum += d;
                sq += d * d;
            }
        }
    }
    assert!(n > 10_000);
    let mean = sum / n as f64;
    let sd = (sq / n as f64 - mean * mean).sqrt();
    assert!((sd - 8.0).abs() <= 0.8, "{sd}");
}

#[test]
fn zero_baseline_pair_is_identical() {
    let scene = Scene::standard(FieldSpec::default(), FieldPose::new(0.0, 0.0, 0.0));
    let rig = StereoRig {
        baseline: 0.0,
        ..StereoRig::standard()
    };
    let (l, r) = render_stereo(&scene, &rig);
    assert_eq!(l, r);
}

#[test]
fn noiseless_trajectory_is_consistent() {
    let field = FieldSpec::default();
    let cfg = TrajectoryConfig {
        odom_noise: MotionNoise::zero(),
        obs_sigmas: Sigmas {
            distance: 0.0,
            position: 0.0,
            angle: 0.0,
        },
        ..TrajectoryConfig::default()
    };
    let start = FieldPose::new(-2.0, 1.0, 0.5);
    let traj = generate_trajectory(&field, start, &cfg);
    assert_eq!(traj.steps.len(), cfg.steps);
    let mut pose = start;
    for s in &traj.steps {
        pose = pose.compose(&s.odometry);
        assert!(pose.position().dist(s.truth.position()) < 1e-9);
        assert!(fieldkit::geometry::wrap_angle(pose.theta - s.truth.theta).abs() < 1e-9);
        assert!(s.truth.x.abs() <= field.length / 2.0 && s.truth.y.abs() <= field.width / 2.0);
        let want = expected_observations(&s.truth, &field, cfg.max_range);
        assert_eq!(s.observations.len(), want.len());
        for (a, b) in s.observations.iter().zip(&want) {
            assert_eq!(a.kind_name(), b.kind_name());
        }
    }
}

#[test]
fn trajectories_repeat_per_seed() {
    let field = FieldSpec::default();
    let start = FieldPose::new(1.0, -1.0, 2.0);
    let cfg = TrajectoryConfig {
        seed: 4,
        ..TrajectoryConfig::default()
    };
    assert_eq!(generate_trajectory(&field, start, &cfg), generate_trajectory(&field, start, &cfg));
    let other = TrajectoryConfig { seed: 5, ..cfg };
    assert_ne!(generate_trajectory(&field, start, &cfg), generate_trajectory(&field, start, &other));
}

#[test]
fn odometry_and_observation_noise_match_the_config() {
    let field = FieldSpec::default();
    let cfg = TrajectoryConfig {
        steps: 3000,
        seed: 6,
        ..TrajectoryConfig::default()
    };
    let traj = generate_trajectory(&field, FieldPose::new(0.0, 0.0, 0.0), &cfg);
    let mut prev = traj.start;
    let (mut ex, mut ed) = (Vec::new(), Vec::new());
    for s in &traj.steps {
        let delta = prev.delta_to(&s.truth);
        ex.push(s.odometry.x - delta.x);
        let want = expected_observations(&s.truth, &field, cfg.max_range);
        for (o, w) in s.observations.iter().zip(&want) {
            if let (RobotObservation::PointFeature { position: p }, RobotObservation::PointFeature { position: q }) = (o, w) {
                ed.push(p.x - q.x);
            }
        }
        prev = s.truth;
    }
    let sd = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
    };
    assert!((sd(&ex) - cfg.odom_noise.x).abs() <= 0.1 * cfg.odom_noise.x);
    assert!(ed.len() > 100);
    assert!((sd(&ed) - cfg.obs_sigmas.position).abs() <= 0.1 * cfg.obs_sigmas.position, "{}", sd(&ed));
}
