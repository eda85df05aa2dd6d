use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use fieldkit::image::{encode_pgm, encode_ppm, read_pnm, Gray, Pnm, Rgb};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::Failure;

pub type CmdResult<T = ()> = Result<T, Failure>;

pub trait InputContext<T> {
    fn input(self) -> CmdResult<T>;
    fn algorithm(self) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> InputContext<T> for Result<T, E> {
    fn input(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Input(e.into()))
    }

    fn algorithm(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Algorithm(e.into()))
    }
}

pub fn input_error(msg: impl std::fmt::Display) -> Failure {
    Failure::Input(anyhow!("{msg}"))
}

/// Settings from `--config`, or the type's defaults.
pub fn load_config<C: DeserializeOwned + Default>(path: Option<&Path>) -> CmdResult<C> {
    match path {
        Some(p) => read_json(p),
        None => Ok(C::default()),
    }
}

pub fn read_json<C: DeserializeOwned>(path: &Path) -> CmdResult<C> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .input()?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .input()
}

pub fn read_image(path: &Path) -> CmdResult<Pnm> {
    let f = fs::File::open(path)
        .with_context(|| format!("opening {}", path.display()))
        .input()?;
    read_pnm(std::io::BufReader::new(f))
        .with_context(|| format!("decoding {}", path.display()))
        .input()
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CmdResult {
    fs::write(path, bytes)
        .with_context(|| format!("writing {}", path.display()))
        .input()
}

pub fn write_ppm(path: &Path, img: &Rgb) -> CmdResult {
    write_bytes(path, &encode_ppm(img))
}

pub fn write_pgm(path: &Path, img: &Gray) -> CmdResult {
    write_bytes(path, &encode_pgm(img))
}

pub fn to_json<V: Serialize>(v: &V) -> CmdResult<String> {
    serde_json::to_string_pretty(v).context("serializing output").input()
}

/// JSON document to `out`, or stdout.
pub fn emit<V: Serialize>(out: Option<&Path>, v: &V) -> CmdResult {
    let mut s = to_json(v)?;
    s.push('\n');
    emit_text(out, &s)
}

pub fn emit_text(out: Option<&Path>, s: &str) -> CmdResult {
    match out {
        Some(p) => write_bytes(p, s.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(s.as_bytes()).context("writing stdout").input()
        }
    }
}

pub fn require_out(out: Option<&Path>, what: &str) -> CmdResult<PathBuf> {
    out.map(Path::to_path_buf)
        .ok_or_else(|| input_error(format!("--out is required to write the {what}")))
}

fn parse_numbers(s: &str, n: usize, what: &str) -> CmdResult<Vec<f64>> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(input_error(format!("expected {what} as {n} comma-separated numbers, got {s:?}"))),
    }
}

pub fn parse_point(s: &str) -> CmdResult<fieldkit::Vec2> {
    let v = parse_numbers(s, 2, "a point x,y")?;
    Ok(fieldkit::Vec2::new(v[0], v[1]))
}

pub fn parse_pose(s: &str) -> CmdResult<fieldkit::FieldPose> {
    let v = parse_numbers(s, 3, "a pose x,y,theta")?;
    Ok(fieldkit::FieldPose::new(v[0], v[1], v[2]))
}
