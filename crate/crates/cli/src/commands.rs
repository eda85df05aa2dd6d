use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use anyhow::anyhow;
use fieldkit::ball_planner::{plan_ball_path, PlanError};
use fieldkit::birdview::{apply_mask, birdview_map, emulate_wide_angle, fov_mask, remap, Sampling};
use fieldkit::image::Raster;
use fieldkit::line_vision::{detect_lines, LineDetectorConfig};
use fieldkit::localization::{pose_error, FilterConfig, LocalizationError, ParticleFilter};
use fieldkit::pipeline_scheduler::{compute_batches, demo_pipeline, parse_pipeline, sleep_registry, Executor, Payload};
use fieldkit::stereo_obstacles::{detect_obstacles, stereo_cloud, ObstacleParams, StereoError};
use fieldkit::synth::{
    detection_overlay, generate_trajectory, plan_overlay, render_birdview, render_field, render_stereo, Trajectory,
    TrajectoryConfig,
};
use fieldkit::{BirdviewSpec, CameraExtrinsics, CameraIntrinsics, FieldPose, FieldSpec, PlanContext, Scene, StereoRig};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::io::*;
use crate::{Cli, Command, Failure, InitRegion, RenderMode};

pub fn run(cli: &Cli) -> CmdResult {
    let config = cli.config.as_deref();
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Plan {
            robot,
            ball,
            opponents,
            teammates,
            overlay,
        } => plan(config, out, robot, ball, opponents, teammates, overlay.as_deref()),
        Command::DetectLines { image, overlay } => detect(config, out, cli.seed, image, overlay.as_deref()),
        Command::Birdview { image } => birdview(config, out, image),
        Command::Distort {
            image,
            k1,
            k2,
            hfov,
            fov_limit,
        } => distort(out, image, *k1, *k2, *hfov, *fov_limit),
        Command::Mask {
            width,
            height,
            hfov,
            k1,
            k2,
            fov_limit,
        } => mask(out, *width, *height, *hfov, *k1, *k2, *fov_limit),
        Command::Localize { trajectory, init } => localize(config, out, cli.seed, trajectory, *init),
        Command::Stereo { left, right, cloud } => stereo(config, out, cli.seed, left, right, cloud.as_deref()),
        Command::PipelineBench {
            spec,
            frames,
            workers,
            default_ms,
        } => pipeline_bench(out, spec.as_deref(), *frames, *workers, *default_ms),
        Command::Render {
            mode,
            robot,
            noise,
            out_right,
        } => render(config, out, cli.seed, *mode, robot, *noise, out_right.as_deref()),
        Command::GenTrajectory { steps, start } => gen_trajectory(config, out, cli.seed, *steps, start),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct PlanFile {
    field: Option<FieldSpec>,
    context: Option<PlanContext>,
}

fn plan(
    config: Option<&Path>,
    out: Option<&Path>,
    robot: &Option<String>,
    ball: &Option<String>,
    opponents: &[String],
    teammates: &[String],
    overlay: Option<&Path>,
) -> CmdResult {
    let file: PlanFile = load_config(config)?;
    let field = file.field.unwrap_or_default();
    field.validate().input()?;
    let mut ctx = match (file.context, ball) {
        (Some(c), _) => c,
        (None, Some(_)) => PlanContext::new(FieldPose::new(0.0, 0.0, 0.0), fieldkit::Vec2::zero(), &field),
        (None, None) => return Err(input_error("a ball position is required (--ball or the config's context)")),
    };
    if let Some(r) = robot {
        ctx.robot = parse_pose(r)?;
    }
    if let Some(b) = ball {
        ctx.ball = parse_point(b)?;
    }
    for o in opponents {
        ctx.opponents.push(parse_point(o)?);
    }
    for t in teammates {
        ctx.teammates.push(parse_pose(t)?);
    }
    let result = plan_ball_path(&ctx, &field).map_err(|e| match e {
        PlanError::NoPath => Failure::Algorithm(e.into()),
        other => Failure::Input(other.into()),
    })?;
    if let Some(p) = overlay {
        write_ppm(p, &plan_overlay(&field, &ctx, &result, 0.02))?;
    }
    emit(out, &result)
}

fn detect(config: Option<&Path>, out: Option<&Path>, seed: u64, image: &Path, overlay: Option<&Path>) -> CmdResult {
    let mut cfg: LineDetectorConfig = load_config(config)?;
    cfg.hough.seed = seed;
    let rgb = read_image(image)?.into_rgb();
    let det = detect_lines::<f64>(&Raster::from_rgb(&rgb), &cfg);
    if let Some(p) = overlay {
        write_ppm(p, &detection_overlay(&rgb, &det))?;
    }
    emit(out, &det)
}

#[derive(Debug, Deserialize)]
#[serde(default)]
struct BirdviewFile {
    intrinsics: Option<CameraIntrinsics>,
    /// Camera pose relative to the robot.
    mount: CameraExtrinsics,
    robot: FieldPose,
    /// Meters ahead of the robot at the view center.
    ahead: f64,
    view: BirdviewSpec,
    sampling: Sampling,
}

impl Default for BirdviewFile {
    fn default() -> Self {
        let standard = Scene::standard(FieldSpec::default(), FieldPose::new(0.0, 0.0, 0.0));
        Self {
            intrinsics: None,
            mount: standard.mount,
            robot: FieldPose::new(0.0, 0.0, 0.0),
            ahead: 1.5,
            view: BirdviewSpec::default(),
            sampling: Sampling::Bilinear,
        }
    }
}

fn birdview(config: Option<&Path>, out: Option<&Path>, image: &Path) -> CmdResult {
    let cfg: BirdviewFile = load_config(config)?;
    let dest = require_out(out, "birdview image")?;
    let rgb = read_image(image)?.into_rgb();
    let intr = match cfg.intrinsics {
        Some(i) => {
            i.validate().input()?;
            i
        }
        None => CameraIntrinsics::from_hfov(rgb.width(), rgb.height(), 70f64.to_radians()).input()?,
    };
    let ex = cfg.mount.mounted_on(&cfg.robot);
    let view = BirdviewSpec::ahead_of(&cfg.robot, cfg.ahead, &cfg.view);
    let map = birdview_map(&ex, &intr, &view);
    let mapped = map.iter().filter(|m| m.is_some()).count();
    let img = remap(&rgb, &map, view.out_width, view.out_height, cfg.sampling);
    write_ppm(&dest, &img)?;
    emit(
        None,
        &json!({
            "width": view.out_width,
            "height": view.out_height,
            "meters_per_pixel": view.meters_per_pixel,
            "view_center": view.view_center,
            "mapped_pixels": mapped,
        }),
    )
}

fn distort(out: Option<&Path>, image: &Path, k1: f64, k2: f64, hfov: f64, fov_limit: Option<f64>) -> CmdResult {
    let dest = require_out(out, "distorted image")?;
    let rgb = read_image(image)?.into_rgb();
    let rect = CameraIntrinsics::from_hfov(rgb.width(), rgb.height(), hfov.to_radians()).input()?;
    let mut img = emulate_wide_angle(&rgb, &rect, k1, k2).input()?;
    let distorted = rect.with_distortion(k1, k2).input()?;
    if let Some(limit) = fov_limit {
        img = apply_mask(&img, &fov_mask(&distorted, limit.to_radians()));
    }
    write_ppm(&dest, &img)?;
    emit(
        None,
        &json!({
            "width": img.width(),
            "height": img.height(),
            "k1": k1,
            "k2": k2,
            "diagonal_fov_deg": distorted.diagonal_fov().input()?.to_degrees(),
        }),
    )
}

fn mask(out: Option<&Path>, width: usize, height: usize, hfov: f64, k1: f64, k2: f64, fov_limit: f64) -> CmdResult {
    let dest = require_out(out, "mask")?;
    let intr = CameraIntrinsics::from_hfov(width, height, hfov.to_radians())
        .and_then(|c| c.with_distortion(k1, k2))
        .input()?;
    let m = fov_mask(&intr, fov_limit.to_radians());
    write_pgm(&dest, &m)?;
    let valid = m.pixels().iter().filter(|&&v| v > 0).count();
    emit(
        None,
        &json!({
            "width": width,
            "height": height,
            "fov_limit_deg": fov_limit,
            "valid_pixels": valid,
        }),
    )
}

#[derive(Debug, Serialize)]
struct StepEstimate {
    step: usize,
    x: f64,
    y: f64,
    theta: f64,
    sigma_xy: f64,
    sigma_theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_xy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_theta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct LocalizeFile {
    field: Option<FieldSpec>,
    filter: FilterConfig<f64>,
}

fn localize(config: Option<&Path>, out: Option<&Path>, seed: u64, trajectory: &Path, init: InitRegion) -> CmdResult {
    let cfg: LocalizeFile = load_config(config)?;
    let field = cfg.field.unwrap_or_default();
    field.validate().input()?;
    let traj: Trajectory<f64> = read_json(trajectory)?;
    let mut pf = match init {
        InitRegion::OwnHalf => ParticleFilter::own_half(&field, cfg.filter, seed),
        InitRegion::Field => ParticleFilter::uniform(&field, cfg.filter, seed),
    };
    let mut lines = String::new();
    for (k, s) in traj.steps.iter().enumerate() {
        let e = pf.step(&s.odometry, &s.observations).map_err(|e| match e {
            LocalizationError::Degenerate => Failure::Algorithm(anyhow!("step {k}: {e}")),
            other => Failure::Input(other.into()),
        })?;
        let (dp, dt) = pose_error(&e.pose, &s.truth);
        let row = StepEstimate {
            step: k,
            x: e.pose.x,
            y: e.pose.y,
            theta: e.pose.theta,
            sigma_xy: e.sigma_xy,
            sigma_theta: e.sigma_theta,
            error_xy: Some(dp),
            error_theta: Some(dt),
        };
        lines.push_str(&serde_json::to_string(&row).map_err(|e| Failure::Input(e.into()))?);
        lines.push('\n');
    }
    emit_text(out, &lines)
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct StereoFile {
    rig: Option<StereoRig>,
    params: ObstacleParams<f64>,
}

fn stereo(config: Option<&Path>, out: Option<&Path>, seed: u64, left: &Path, right: &Path, cloud: Option<&Path>) -> CmdResult {
    let mut cfg: StereoFile = load_config(config)?;
    cfg.params.ransac.seed = seed;
    let l = read_image(left)?.into_gray();
    let r = read_image(right)?.into_gray();
    let rig = match cfg.rig {
        Some(rig) => rig,
        None => {
            let f = l.width() as f64 / 2.0 / 35f64.to_radians().tan();
            StereoRig::new(0.062, f, l.width(), l.height()).input()?
        }
    };
    let classify = |e: StereoError| match e {
        StereoError::DegenerateCloud => Failure::Algorithm(e.into()),
        other => Failure::Input(other.into()),
    };
    if let Some(p) = cloud {
        let pc = stereo_cloud(&l, &r, &rig, &cfg.params).map_err(classify)?;
        emit_text(Some(p), &pc.to_xyz())?;
    }
    let report = detect_obstacles(&l, &r, &rig, &cfg.params).map_err(classify)?;
    emit(out, &report)
}

fn pipeline_bench(out: Option<&Path>, spec: Option<&Path>, frames: u64, workers: Option<usize>, default_ms: u64) -> CmdResult {
    let spec = match spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Input(e.into()))?;
            parse_pipeline(&text).input()?
        }
        None => demo_pipeline(),
    };
    let workers = workers.unwrap_or_else(|| {
        compute_batches(&spec).batches.iter().map(Vec::len).max().unwrap_or(1)
    });
    let sources = |frame: u64| -> Vec<(String, Payload)> {
        spec.source_slots
            .iter()
            .map(|s| (s.clone(), Arc::new(frame) as Payload))
            .collect()
    };
    let timed = |serial: bool| -> CmdResult<(Vec<Vec<String>>, Vec<Duration>, BTreeMap<String, u64>, Vec<Vec<String>>)> {
        let mut ex = Executor::new(spec.clone(), sleep_registry(&spec, default_ms), Some(workers)).input()?;
        ex.set_serial(serial);
        let mut walls = Vec::new();
        let mut executed = Vec::new();
        for f in 0..frames {
            let rep = ex.run_frame(f, sources(f)).algorithm()?;
            walls.push(rep.wall);
            executed.push(rep.executed);
        }
        let counts = spec.filters.iter().map(|f| (f.name.clone(), ex.run_count(&f.name))).collect();
        Ok((ex.plan().batches.clone(), walls, counts, executed))
    };
    let (batches, par, counts, executed) = timed(false)?;
    let (_, ser, _, _) = timed(true)?;
    let mean = |v: &[Duration]| v.iter().map(Duration::as_secs_f64).sum::<f64>() / v.len().max(1) as f64 * 1e3;
    let (mp, ms) = (mean(&par), mean(&ser));
    // timings vary run to run, so they stay out of the JSON result
    eprintln!("parallel frame: {mp:.2} ms, serial frame: {ms:.2} ms, speedup: {:.2}x", ms / mp.max(1e-9));
    emit(
        out,
        &json!({
            "frames": frames,
            "batches": batches,
            "executions": counts,
            "executed_per_frame": executed,
        }),
    )
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct RenderFile {
    scene: Option<Scene>,
    view: Option<BirdviewSpec>,
    rig: Option<StereoRig>,
}

fn render(
    config: Option<&Path>,
    out: Option<&Path>,
    seed: u64,
    mode: RenderMode,
    robot: &Option<String>,
    noise: Option<f64>,
    out_right: Option<&Path>,
) -> CmdResult {
    let cfg: RenderFile = load_config(config)?;
    let dest = require_out(out, "rendered image")?;
    let mut scene = cfg
        .scene
        .unwrap_or_else(|| Scene::standard(FieldSpec::default(), FieldPose::new(-2.0, 0.0, 0.0)));
    scene.field.validate().input()?;
    scene.intrinsics.validate().input()?;
    if let Some(r) = robot {
        scene.robot = parse_pose(r)?;
    }
    if let Some(n) = noise {
        scene.noise = n;
    }
    scene.seed = seed;
    let (w, h, files) = match mode {
        RenderMode::Perspective => {
            let img = render_field(&scene);
            write_ppm(&dest, &img)?;
            (img.width(), img.height(), vec![dest.display().to_string()])
        }
        RenderMode::Birdview => {
            let view = cfg
                .view
                .unwrap_or_else(|| BirdviewSpec::ahead_of(&scene.robot, 1.5, &BirdviewSpec::default()));
            let img = render_birdview(&scene.field, &view, scene.supersample, scene.noise, seed);
            write_ppm(&dest, &img)?;
            (img.width(), img.height(), vec![dest.display().to_string()])
        }
        RenderMode::Stereo => {
            let right_path = out_right.ok_or_else(|| input_error("--out-right is required for stereo renders"))?;
            let rig = cfg.rig.unwrap_or_else(StereoRig::standard);
            rig.validate().input()?;
            let (l, r) = render_stereo(&scene, &rig);
            write_ppm(&dest, &l)?;
            write_ppm(right_path, &r)?;
            (l.width(), l.height(), vec![dest.display().to_string(), right_path.display().to_string()])
        }
    };
    emit(
        None,
        &json!({
            "mode": format!("{mode:?}").to_lowercase(),
            "width": w,
            "height": h,
            "robot": scene.robot,
            "files": files,
        }),
    )
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct TrajectoryFile {
    field: Option<FieldSpec>,
    trajectory: TrajectoryConfig<f64>,
}

fn gen_trajectory(config: Option<&Path>, out: Option<&Path>, seed: u64, steps: Option<usize>, start: &str) -> CmdResult {
    let mut cfg: TrajectoryFile = load_config(config)?;
    let field = cfg.field.unwrap_or_default();
    field.validate().input()?;
    if let Some(n) = steps {
        cfg.trajectory.steps = n;
    }
    if cfg.trajectory.steps == 0 {
        return Err(input_error("steps must be at least 1"));
    }
    cfg.trajectory.seed = seed;
    let start = parse_pose(start)?;
    emit(out, &generate_trajectory(&field, start, &cfg.trajectory))
}
