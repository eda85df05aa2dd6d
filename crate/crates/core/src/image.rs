//! Raster containers, binary PGM/PPM codecs and a few drawing helpers.

use std::io::{self, Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PnmError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("unsupported or malformed PNM header: {0}")]
    Header(String),
    #[error("truncated pixel data: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
}

/// Row-major image of `P` pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image<P> {
    width: usize,
    height: usize,
    data: Vec<P>,
}

pub type Gray = Image<u8>;
pub type Rgb = Image<[u8; 3]>;

impl<P: Copy + Default> Image<P> {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, P::default())
    }

    pub fn filled(width: usize, height: usize, value: P) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<P>) -> Self {
        assert_eq!(data.len(), width * height, "pixel buffer size mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> P) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> P {
        self.data[y * self.width + x]
    }

    /// Pixel at signed coordinates, `None` outside the image.
    #[inline]
    pub fn get_checked(&self, x: i64, y: i64) -> Option<P> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            None
        } else {
            Some(self.get(x as usize, y as usize))
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: P) {
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn set_checked(&mut self, x: i64, y: i64, v: P) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.set(x as usize, y as usize, v);
        }
    }

    pub fn pixels(&self) -> &[P] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [P] {
        &mut self.data
    }

    pub fn map<Q: Copy + Default>(&self, f: impl Fn(P) -> Q) -> Image<Q> {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&p| f(p)).collect(),
        }
    }

    /// Builds an image by gathering pixels of `self` through a precomputed
    /// index map; `None` entries become `fill`.
    pub fn gather(&self, width: usize, height: usize, map: &[Option<usize>], fill: P) -> Image<P> {
        assert_eq!(map.len(), width * height);
        Image {
            width,
            height,
            data: map
                .iter()
                .map(|m| m.map_or(fill, |i| self.data[i]))
                .collect(),
        }
    }
}

/// Two-plane image used by the line detector: brightness and greenness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub luma: Gray,
    pub green: Gray,
}

impl Raster {
    pub fn new(luma: Gray, green: Gray) -> Self {
        assert_eq!((luma.width(), luma.height()), (green.width(), green.height()));
        Self { luma, green }
    }

    pub fn width(&self) -> usize {
        self.luma.width()
    }

    pub fn height(&self) -> usize {
        self.luma.height()
    }

    /// Splits an RGB image into luma (BT.601) and greenness `g - max(r, b)`.
    pub fn from_rgb(img: &Rgb) -> Self {
        Self {
            luma: img.map(luma_of),
            green: img.map(greenness_of),
        }
    }

    /// Gray input carries no color; greenness is zero everywhere.
    pub fn from_gray(img: &Gray) -> Self {
        Self {
            luma: img.clone(),
            green: Gray::new(img.width(), img.height()),
        }
    }
}

#[inline]
pub fn luma_of(p: [u8; 3]) -> u8 {
    ((299 * p[0] as u32 + 587 * p[1] as u32 + 114 * p[2] as u32 + 500) / 1000) as u8
}

#[inline]
pub fn greenness_of(p: [u8; 3]) -> u8 {
    p[1].saturating_sub(p[0].max(p[2]))
}

pub fn rgb_to_gray(img: &Rgb) -> Gray {
    img.map(luma_of)
}

pub fn gray_to_rgb(img: &Gray) -> Rgb {
    img.map(|v| [v, v, v])
}

fn read_token(bytes: &[u8], pos: &mut usize) -> Result<String, PnmError> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(PnmError::Header("unexpected end of header".into()));
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn parse_header(bytes: &[u8]) -> Result<(String, usize, usize, usize), PnmError> {
    let mut pos = 0;
    let magic = read_token(bytes, &mut pos)?;
    let mut num = |name: &str| -> Result<usize, PnmError> {
        read_token(bytes, &mut pos)?
            .parse()
            .map_err(|_| PnmError::Header(format!("bad {name}")))
    };
    let w = num("width")?;
    let h = num("height")?;
    let maxval = num("maxval")?;
    if maxval != 255 {
        return Err(PnmError::Header(format!("maxval {maxval} (only 255 supported)")));
    }
    if w == 0 || h == 0 {
        return Err(PnmError::Header("zero-sized image".into()));
    }
    // exactly one whitespace byte separates header and data
    Ok((magic, w, h, pos + 1))
}

/// Decoded PNM file: either gray (P5) or color (P6).
#[derive(Debug, Clone)]
pub enum Pnm {
    Gray(Gray),
    Rgb(Rgb),
}

impl Pnm {
    pub fn into_rgb(self) -> Rgb {
        match self {
            Pnm::Gray(g) => gray_to_rgb(&g),
            Pnm::Rgb(c) => c,
        }
    }

    pub fn into_gray(self) -> Gray {
        match self {
            Pnm::Gray(g) => g,
            Pnm::Rgb(c) => rgb_to_gray(&c),
        }
    }

    pub fn into_raster(self) -> Raster {
        match self {
            Pnm::Gray(g) => Raster::from_gray(&g),
            Pnm::Rgb(c) => Raster::from_rgb(&c),
        }
    }
}

pub fn decode_pnm(bytes: &[u8]) -> Result<Pnm, PnmError> {
    let (magic, w, h, off) = parse_header(bytes)?;
    let body = bytes.get(off..).unwrap_or(&[]);
    match magic.as_str() {
        "P5" => {
            if body.len() < w * h {
                return Err(PnmError::Truncated {
                    expected: w * h,
                    got: body.len(),
                });
            }
            Ok(Pnm::Gray(Image::from_vec(w, h, body[..w * h].to_vec())))
        }
        "P6" => {
            if body.len() < 3 * w * h {
                return Err(PnmError::Truncated {
                    expected: 3 * w * h,
                    got: body.len(),
                });
            }
            let data = body[..3 * w * h]
                .chunks_exact(3)
                .map(|c| [c[0], c[1], c[2]])
                .collect();
            Ok(Pnm::Rgb(Image::from_vec(w, h, data)))
        }
        m => Err(PnmError::Header(format!("magic {m} (expected P5 or P6)"))),
    }
}

pub fn read_pnm(mut r: impl Read) -> Result<Pnm, PnmError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode_pnm(&bytes)
}

pub fn encode_pgm(img: &Gray) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn encode_ppm(img: &Rgb) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    for p in img.pixels() {
        out.extend_from_slice(p);
    }
    out
}

pub fn write_pgm(mut w: impl Write, img: &Gray) -> io::Result<()> {
    w.write_all(&encode_pgm(img))
}

pub fn write_ppm(mut w: impl Write, img: &Rgb) -> io::Result<()> {
    w.write_all(&encode_ppm(img))
}

/// Draws a line with Bresenham stepping, clipped to the image.
pub fn draw_line<P: Copy + Default>(img: &mut Image<P>, x0: f64, y0: f64, x1: f64, y1: f64, v: P) {
    let (mut x, mut y) = (x0.round() as i64, y0.round() as i64);
    let (xe, ye) = (x1.round() as i64, y1.round() as i64);
    let dx = (xe - x).abs();
    let dy = -(ye - y).abs();
    let sx = if x < xe { 1 } else { -1 };
    let sy = if y < ye { 1 } else { -1 };
    let mut err = dx + dy;
    // bound the walk so absurd coordinates cannot hang the caller
    let limit = (dx - dy + 1).min(1 << 24);
    for _ in 0..limit {
        img.set_checked(x, y, v);
        if x == xe && y == ye {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Fills an axis-aligned square of half-size `r` around `(cx, cy)`.
pub fn draw_dot<P: Copy + Default>(img: &mut Image<P>, cx: f64, cy: f64, r: i64, v: P) {
    let (cx, cy) = (cx.round() as i64, cy.round() as i64);
    for y in cy - r..=cy + r {
        for x in cx - r..=cx + r {
            img.set_checked(x, y, v);
        }
    }
}
