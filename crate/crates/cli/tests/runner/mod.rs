//! Drives the `fieldkit` binary through every subcommand.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fieldkit"))
}

pub fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

/// One invocation of each subcommand, ordered so that later ones consume
/// files written by earlier ones. Every entry names the files it writes.
pub fn sweep() -> Vec<(&'static str, Vec<&'static str>, Vec<&'static str>)> {
    vec![
        ("render", vec!["render", "--seed", "3", "--noise", "4", "--out", "cam.ppm"], vec!["cam.ppm"]),
        (
            "render-birdview",
            vec!["render", "--mode", "birdview", "--seed", "3", "--noise", "8", "--out", "top.ppm"],
            vec!["top.ppm"],
        ),
        (
            "render-stereo",
            vec!["render", "--mode", "stereo", "--seed", "3", "--robot", "0,0,0", "--out", "left.ppm", "--out-right", "right.ppm"],
            vec!["left.ppm", "right.ppm"],
        ),
        ("plan", vec!["plan", "--seed", "1", "--robot", "-2,1,0", "--ball", "-1,0.5", "--opponent", "0,0.5", "--overlay", "plan.ppm"], vec!["plan.ppm"]),
        ("detect-lines", vec!["detect-lines", "top.ppm", "--seed", "5", "--overlay", "lines.ppm"], vec!["lines.ppm"]),
        ("birdview", vec!["birdview", "cam.ppm", "--out", "bird.ppm"], vec!["bird.ppm"]),
        ("distort", vec!["distort", "cam.ppm", "--out", "wide.ppm"], vec!["wide.ppm"]),
        ("mask", vec!["mask", "--out", "mask.pgm"], vec!["mask.pgm"]),
        ("stereo", vec!["stereo", "left.ppm", "right.ppm", "--seed", "2", "--cloud", "cloud.xyz"], vec!["cloud.xyz"]),
        ("gen-trajectory", vec!["gen-trajectory", "--seed", "7", "--steps", "30", "--out", "traj.json"], vec!["traj.json"]),
        ("localize", vec!["localize", "traj.json", "--seed", "7"], vec![]),
        ("pipeline-bench", vec!["pipeline-bench", "--frames", "4", "--default-ms", "1"], vec![]),
    ]
}

/// Stdout and written files of a full sweep, or the first failing command.
pub fn capture(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut out = Vec::new();
    for (name, args, files) in sweep() {
        let o = run(dir, &args);
        if !o.status.success() {
            return Err(format!("{name}: {:?} {}", o.status, String::from_utf8_lossy(&o.stderr)));
        }
        out.push((format!("{name} stdout"), o.stdout));
        for f in files {
            let bytes = std::fs::read(dir.join(f)).map_err(|e| format!("{name}: {f}: {e}"))?;
            out.push((format!("{name} {f}"), bytes));
        }
    }
    Ok(out)
}

/// Names of sweep outputs that differ between two runs in `dir`.
pub fn nondeterministic(dir: &Path) -> Result<Vec<String>, String> {
    let a = capture(dir)?;
    let b = capture(dir)?;
    Ok(a.iter().zip(&b).filter(|(x, y)| x.1 != y.1).map(|(x, _)| x.0.clone()).collect())
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}
