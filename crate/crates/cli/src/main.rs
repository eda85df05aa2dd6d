use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod io;

/// Perception and planning tools for a small humanoid soccer robot.
#[derive(Debug, Parser)]
#[command(name = "fieldkit", version)]
pub struct Cli {
    /// Seed for every random choice made by the command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// JSON file with command-specific settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Primary output file; JSON results go to stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenderMode {
    Perspective,
    Birdview,
    Stereo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitRegion {
    OwnHalf,
    Field,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan a kick sequence from the ball to the opponent goal.
    Plan {
        /// Robot pose "x,y,theta".
        #[arg(long, allow_hyphen_values = true)]
        robot: Option<String>,
        /// Ball position "x,y".
        #[arg(long, allow_hyphen_values = true)]
        ball: Option<String>,
        /// Opponent position "x,y" (repeatable).
        #[arg(long = "opponent", allow_hyphen_values = true)]
        opponents: Vec<String>,
        /// Teammate pose "x,y,theta" (repeatable).
        #[arg(long = "teammate", allow_hyphen_values = true)]
        teammates: Vec<String>,
        /// Write a top view of the plan as PPM.
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
    /// Detect field lines and corners in a PGM/PPM image.
    DetectLines {
        image: PathBuf,
        /// Write the image with detections drawn on it as PPM.
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
    /// Resample a camera image into a top-down view of the field.
    Birdview { image: PathBuf },
    /// Apply wide-angle radial distortion to a rectilinear image.
    Distort {
        image: PathBuf,
        #[arg(long, default_value_t = -0.3, allow_hyphen_values = true)]
        k1: f64,
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        k2: f64,
        /// Horizontal field of view of the input, degrees.
        #[arg(long, default_value_t = 70.0)]
        hfov: f64,
        /// Black out pixels beyond this field of view, degrees.
        #[arg(long)]
        fov_limit: Option<f64>,
    },
    /// Write the field-of-view mask of a distorted camera as PGM.
    Mask {
        #[arg(long, default_value_t = 640)]
        width: usize,
        #[arg(long, default_value_t = 480)]
        height: usize,
        #[arg(long, default_value_t = 70.0)]
        hfov: f64,
        #[arg(long, default_value_t = -0.3, allow_hyphen_values = true)]
        k1: f64,
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        k2: f64,
        /// Field of view kept by the mask, degrees.
        #[arg(long, default_value_t = 75.0)]
        fov_limit: f64,
    },
    /// Run the particle filter over a trajectory file, one JSON line per step.
    Localize {
        trajectory: PathBuf,
        #[arg(long, value_enum, default_value_t = InitRegion::OwnHalf)]
        init: InitRegion,
    },
    /// Detect obstacles in a rectified stereo pair.
    Stereo {
        left: PathBuf,
        right: PathBuf,
        /// Dump the filtered point cloud as "x y z" lines.
        #[arg(long)]
        cloud: Option<PathBuf>,
    },
    /// Run a pipeline of sleeping filters and compare with serial execution.
    PipelineBench {
        /// Pipeline JSON; the bundled demo pipeline when omitted.
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        frames: u64,
        /// Worker threads; defaults to the widest batch.
        #[arg(long)]
        workers: Option<usize>,
        /// Sleep for filters without a cost, milliseconds.
        #[arg(long, default_value_t = 10)]
        default_ms: u64,
    },
    /// Render a synthetic camera, top-down or stereo image.
    Render {
        #[arg(long, value_enum, default_value_t = RenderMode::Perspective)]
        mode: RenderMode,
        /// Robot pose "x,y,theta".
        #[arg(long, allow_hyphen_values = true)]
        robot: Option<String>,
        /// Gaussian pixel noise, 8-bit levels.
        #[arg(long)]
        noise: Option<f64>,
        /// Right image of a stereo render.
        #[arg(long)]
        out_right: Option<PathBuf>,
    },
    /// Generate a random walk with noisy odometry and observations.
    GenTrajectory {
        #[arg(long)]
        steps: Option<usize>,
        /// Start pose "x,y,theta".
        #[arg(long, allow_hyphen_values = true, default_value = "-2,0,0")]
        start: String,
    },
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, unreadable or malformed input.
    Input(anyhow::Error),
    /// The algorithm ran but found no answer (no path, degenerate data).
    Algorithm(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Algorithm(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Input(e) | Failure::Algorithm(e)) = &f;
            eprintln!("fieldkit: {e:#}");
            ExitCode::from(f.code())
        }
    }
}
